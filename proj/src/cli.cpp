#include "matlang/cli.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "matlang/algos.hpp"
#include "matlang/errors.hpp"
#include "matlang/eval.hpp"
#include "matlang/fuzz.hpp"
#include "matlang/rewrite.hpp"
#include "matlang/textio.hpp"
#include "matlang/typecheck.hpp"

namespace matlang {
namespace {

using nlohmann::json;

// Thrown by command bodies to abort with a specific exit code; the
// dispatcher renders the message on the error stream.
struct ExitError {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in || in.bad()) throw ExitError{3, "cannot read " + path};
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw ExitError{3, "cannot write " + path};
}

struct Options {
  std::string prog;
  std::vector<std::string> binds;  // NAME=PATH
  std::vector<std::string> sizes;  // SYM=N
  std::string to;
  std::string out_path;
  std::string format = "text";
  std::uint64_t seed = 0;
  std::size_t cases = 100;
  std::size_t max_dim = 4;
  std::string algo;
  std::string graph;
  std::size_t source = 0;
  bool source_given = false;

  bool records() const { return format == "records"; }
};

// Records one matrix dimension against the schema's size term, unifying
// symbols across bindings; a symbol already pinned to a different value is
// an instance error.
void bind_dim(Instance& inst, const std::string& name, const SizeTerm& t,
              std::size_t got, const char* which) {
  if (t.is_one()) {
    if (got != 1)
      throw ExitError{4, name + " must have exactly one " + which +
                             ", file has " + std::to_string(got)};
    return;
  }
  auto [it, fresh] = inst.sizes.emplace(t.name(), got);
  if (!fresh && it->second != got)
    throw ExitError{4, "size " + t.name() + " = " + std::to_string(it->second) +
                           " conflicts with " + which + " count " +
                           std::to_string(got) + " of " + name};
}

void bind_dims(Instance& inst, const std::string& name, const MatrixType& ty,
               const Matrix& m) {
  bind_dim(inst, name, ty.rows, m.rows(), "row");
  bind_dim(inst, name, ty.cols, m.cols(), "column");
}

std::pair<std::string, std::string> split_kv(const std::string& kv,
                                             const char* flag,
                                             const char* shape) {
  auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
    throw ExitError{2, std::string(flag) + " expects " + shape + ", got '" +
                           kv + "'"};
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

// --size entries first (explicit sizes win conflicts against each other),
// then --bind files with dimension inference, then full schema conformance.
Instance build_instance(const Schema& schema, const Options& opt) {
  Instance inst;
  for (const auto& kv : opt.sizes) {
    auto [sym, val] = split_kv(kv, "--size", "SYM=N");
    std::size_t n = 0;
    auto* first = val.data();
    auto* last = val.data() + val.size();
    auto [p, ec] = std::from_chars(first, last, n);
    if (ec != std::errc{} || p != last || n == 0)
      throw ExitError{2, "--size " + sym + " needs a positive integer"};
    auto [it, fresh] = inst.sizes.emplace(sym, n);
    if (!fresh && it->second != n)
      throw ExitError{2, "--size " + sym + " given twice with different values"};
  }
  for (const auto& kv : opt.binds) {
    auto [name, path] = split_kv(kv, "--bind", "NAME=PATH");
    auto it = schema.find(name);
    if (it == schema.end())
      throw ExitError{4, "binding '" + name + "' is not declared by the program"};
    if (inst.mats.count(name))
      throw ExitError{2, "--bind " + name + " given twice"};
    Matrix m = parse_matrix(read_file(path));
    bind_dims(inst, name, it->second, m);
    inst.mats.emplace(name, std::move(m));
  }
  check_instance(schema, inst);
  return inst;
}

void emit_matrix(const Options& opt, std::ostream& out, const char* cmd,
                 const Matrix& m) {
  std::string text = print_matrix(m);
  if (!opt.out_path.empty()) write_file(opt.out_path, text);
  if (opt.records()) {
    json j{{"cmd", cmd},
           {"rows", m.rows()},
           {"cols", m.cols()},
           {"ring", std::string(ring_name(m.ring()))},
           {"matrix", text}};
    out << j.dump() << "\n";
  } else if (opt.out_path.empty()) {
    out << text;
  }
}

int cmd_check(const Options& opt, std::ostream& out) {
  ParsedProgram p = parse_program(read_file(opt.prog));
  TypedProgram t = infer_program(p.schema, p.expr);
  if (opt.records()) {
    json j{{"cmd", "check"},
           {"dialect", std::string(dialect_name(p.dialect))},
           {"rows", t.type.rows.str()},
           {"cols", t.type.cols.str()},
           {"ring", std::string(ring_name(t.type.ring))},
           {"type", t.type.str()}};
    out << j.dump() << "\n";
  } else {
    out << "dialect: " << dialect_name(p.dialect) << "\n"
        << "type: " << t.type.str() << "\n";
  }
  return 0;
}

int cmd_eval(const Options& opt, std::ostream& out) {
  ParsedProgram p = parse_program(read_file(opt.prog));
  Instance inst = build_instance(p.schema, opt);
  Matrix r = eval_program(p.schema, inst, p.expr);
  emit_matrix(opt, out, "eval", r);
  return 0;
}

int cmd_lower(const Options& opt, std::ostream& out) {
  ParsedProgram p = parse_program(read_file(opt.prog));
  Lowered low = lower_to(p.schema, p.expr, *dialect_from_name(opt.to));
  std::string text = print_program(low.schema, low.expr);
  if (!opt.out_path.empty()) write_file(opt.out_path, text);
  if (opt.records()) {
    json j{{"cmd", "lower"},
           {"source", std::string(dialect_name(low.report.source))},
           {"target", std::string(dialect_name(low.report.target))},
           {"changed", low.report.changed},
           {"encoded", low.report.encoded},
           {"fresh", low.report.fresh_names},
           {"macros", low.report.macros},
           {"program", text}};
    out << j.dump() << "\n";
  } else {
    if (opt.out_path.empty()) out << text;
    out << low.report.str();
  }
  return 0;
}

int cmd_diff(const Options& opt, std::ostream& out) {
  ParsedProgram p = parse_program(read_file(opt.prog));
  Instance inst = build_instance(p.schema, opt);
  Matrix direct = eval_program(p.schema, inst, p.expr);
  Lowered low = lower_to(p.schema, p.expr, *dialect_from_name(opt.to));
  Matrix other = [&] {
    if (!low.report.encoded) return eval_program(low.schema, inst, low.expr);
    Instance enc;
    enc.sizes = inst.sizes;
    for (const auto& [name, m] : inst.mats) enc.mats.emplace(name, encode_matrix(m));
    return decode_matrix(direct.ring(), eval_program(low.schema, enc, low.expr));
  }();
  std::string why = matrix_mismatch(direct, other, 1e-9);
  if (opt.records()) {
    json j{{"cmd", "diff"},
           {"target", opt.to},
           {"encoded", low.report.encoded},
           {"equal", why.empty()}};
    if (!why.empty()) j["mismatch"] = why;
    out << j.dump() << "\n";
  } else {
    out << (why.empty() ? std::string("equal") : why) << "\n";
  }
  return why.empty() ? 0 : 5;
}

int cmd_algo(const Options& opt, std::ostream& out) {
  Matrix g = parse_matrix(read_file(opt.graph));
  ProgramDef pd;
  bool needs_source = false;
  if (opt.algo == "wcc") {
    pd = wcc_program();
  } else if (opt.algo == "reach") {
    pd = reach_program();
    needs_source = true;
  } else if (opt.algo == "sssp") {
    pd = sssp_program();
    needs_source = true;
  } else {
    pd = vec_max_program();
  }
  if (needs_source && !opt.source_given)
    throw ExitError{2, "--source is required for " + opt.algo};
  if (!needs_source && opt.source_given)
    throw ExitError{2, "--source does not apply to " + opt.algo};

  Instance inst;
  const char* gname = opt.algo == "maxv" ? "V" : "A";
  bind_dims(inst, gname, pd.schema.at(gname), g);
  inst.mats.emplace(gname, std::move(g));
  if (needs_source) {
    std::size_t n = inst.sizes.at("n");
    if (opt.source < 1 || opt.source > n)
      throw ExitError{4, "--source must be in 1.." + std::to_string(n)};
    inst.mats.emplace("S", opt.algo == "sssp"
                               ? min_plus_source(n, opt.source)
                               : bool_source(n, opt.source));
  }
  check_instance(pd.schema, inst);
  Matrix r = eval_program(pd.schema, inst, pd.expr);
  emit_matrix(opt, out, "algo", r);
  return 0;
}

int cmd_fuzz(const Options& opt, std::ostream& out) {
  FuzzResult res = run_fuzz({opt.seed, opt.cases, opt.max_dim});
  if (opt.records()) {
    for (const FuzzFailure& f : res.failures) {
      json j{{"cmd", "fuzz-failure"},
             {"case", f.case_index},
             {"phase", f.phase},
             {"message", f.message},
             {"program", f.program},
             {"sizes", f.sizes},
             {"matrices", f.matrices}};
      out << j.dump() << "\n";
    }
    json j{{"cmd", "fuzz"},
           {"cases", res.cases},
           {"compared", res.compared},
           {"skipped", res.skipped},
           {"failures", res.failures.size()}};
    out << j.dump() << "\n";
  } else {
    for (const FuzzFailure& f : res.failures) out << render_failure(f) << "\n";
    out << "fuzz: cases=" << res.cases << " compared=" << res.compared
        << " skipped=" << res.skipped << " failures=" << res.failures.size()
        << "\n";
  }
  return res.failures.empty() ? 0 : 5;
}

void add_format(CLI::App* sub, Options& opt) {
  sub->add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"text", "records"}));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  Options opt;
  CLI::App app{"matlang: type, evaluate, lower, and differential-test "
               "programs in the MATLANG dialect family",
               "matlang"};
  app.require_subcommand(1);

  auto add_prog = [&](CLI::App* sub) {
    sub->add_option("prog", opt.prog, "program file")->required();
  };
  auto add_bindings = [&](CLI::App* sub) {
    sub->add_option("--bind", opt.binds, "bind a schema matrix: NAME=PATH")
        ->type_size(1)
        ->allow_extra_args(false);
    sub->add_option("--size", opt.sizes, "pin a size symbol: SYM=N")
        ->type_size(1)
        ->allow_extra_args(false);
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out_path, "write the result to a file");
  };

  CLI::App* c_check = app.add_subcommand("check", "parse, classify, and type a program");
  add_prog(c_check);
  add_format(c_check, opt);

  CLI::App* c_eval = app.add_subcommand("eval", "evaluate a program on bound matrices");
  add_prog(c_eval);
  add_bindings(c_eval);
  add_out(c_eval);
  add_format(c_eval, opt);

  CLI::App* c_lower = app.add_subcommand("lower", "lower a program to a target dialect");
  add_prog(c_lower);
  c_lower->add_option("--to", opt.to, "target dialect")
      ->required()
      ->check(CLI::IsMember({"dec", "sifor"}));
  add_out(c_lower);
  add_format(c_lower, opt);

  CLI::App* c_diff = app.add_subcommand(
      "diff", "evaluate a program directly and through a lowering, compare");
  add_prog(c_diff);
  c_diff->add_option("--to", opt.to, "target dialect")
      ->required()
      ->check(CLI::IsMember({"dec", "sifor"}));
  add_bindings(c_diff);
  add_format(c_diff, opt);

  CLI::App* c_algo = app.add_subcommand("algo", "run a stdlib graph program");
  c_algo->add_option("name", opt.algo, "algorithm")
      ->required()
      ->check(CLI::IsMember({"wcc", "reach", "sssp", "maxv"}));
  c_algo->add_option("graph", opt.graph, "matrix file (adjacency or vector)")
      ->required();
  CLI::Option* source_opt =
      c_algo->add_option("--source", opt.source, "1-based source vertex");
  add_out(c_algo);
  add_format(c_algo, opt);

  CLI::App* c_fuzz = app.add_subcommand(
      "fuzz", "differential-test the lowering passes on random programs");
  c_fuzz->add_option("--seed", opt.seed, "rng seed");
  c_fuzz->add_option("--cases", opt.cases, "number of cases");
  c_fuzz->add_option("--max-dim", opt.max_dim, "largest matrix dimension");
  add_format(c_fuzz, opt);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("matlang");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }
  opt.source_given = source_opt->count() > 0;

  try {
    if (c_check->parsed()) return cmd_check(opt, out);
    if (c_eval->parsed()) return cmd_eval(opt, out);
    if (c_lower->parsed()) return cmd_lower(opt, out);
    if (c_diff->parsed()) return cmd_diff(opt, out);
    if (c_algo->parsed()) return cmd_algo(opt, out);
    return cmd_fuzz(opt, out);
  } catch (const ExitError& e) {
    err << e.message << "\n";
    return e.code;
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const TypeCheckError& e) {
    err << "type error: " << e.what() << "\n";
    return 2;
  } catch (const DialectError& e) {
    err << "dialect error: " << e.what() << "\n";
    return 2;
  } catch (const EvalError& e) {
    err << eval_error_kind_name(e.kind()) << " error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace matlang
