#include "matlang/fuzz.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "matlang/errors.hpp"
#include "matlang/rewrite.hpp"
#include "matlang/textio.hpp"
#include "matlang/typecheck.hpp"

namespace matlang {

namespace {

bool type_eq(const MatrixType& a, const MatrixType& b) {
  return a.rows == b.rows && a.cols == b.cols && a.ring == b.ring;
}

bool schema_eq(const Schema& a, const Schema& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [n, t] : a) {
    auto it = b.find(n);
    if (it == b.end() || !type_eq(t, it->second)) return false;
  }
  return true;
}

struct Gen {
  std::mt19937_64& rng;
  Dialect target;
  std::size_t max_dim;
  Schema schema;
  Instance inst;
  Ring primary{};
  Ring secondary{};
  int nodes = 25;
  int matmuls = 3;
  int loops = 2;
  int loop_depth = 0;
  int counter = 0;
  std::vector<std::pair<std::string, MatrixType>> scope = {};

  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng); }

  SizeTerm rand_size() {
    switch (pick(3)) {
      case 0:
        return SizeTerm::one();
      case 1:
        return SizeTerm::sym("m");
      default:
        return SizeTerm::sym("k");
    }
  }

  std::size_t dim_of(const SizeTerm& t) const {
    return t.is_one() ? 1 : inst.sizes.at(t.name());
  }

  ScalarValue rand_value(Ring r) {
    switch (r) {
      case Ring::Bool:
        return ScalarValue::of_bool(chance(0.5));
      case Ring::Int:
        return ScalarValue::of_int(r, static_cast<std::int64_t>(pick(4)));
      case Ring::Real:
        return ScalarValue::of_real(r, 0.5 * static_cast<double>(pick(7)));
      case Ring::IntMinPlus:
        return chance(0.35)
                   ? ScalarValue::pos_inf(r)
                   : ScalarValue::of_int(r, static_cast<std::int64_t>(pick(4)));
      case Ring::RealMinPlus:
        return chance(0.35)
                   ? ScalarValue::pos_inf(r)
                   : ScalarValue::of_real(r, 0.5 * static_cast<double>(pick(7)));
      case Ring::IntMaxPlus:
        return chance(0.35)
                   ? ScalarValue::neg_inf(r)
                   : ScalarValue::of_int(r, static_cast<std::int64_t>(pick(4)));
      case Ring::RealMaxPlus:
        return chance(0.35)
                   ? ScalarValue::neg_inf(r)
                   : ScalarValue::of_real(r, 0.5 * static_cast<double>(pick(7)));
    }
    throw std::logic_error("unknown ring");
  }

  Expr leaf(const MatrixType& ty) {
    std::vector<std::string> local;
    for (const auto& [n, t] : scope)
      if (type_eq(t, ty)) local.push_back(n);
    if (!local.empty() && chance(0.6)) return var(local[pick(local.size())]);
    std::vector<std::string> mats;
    for (const auto& [n, t] : schema)
      if (type_eq(t, ty)) mats.push_back(n);
    if (!mats.empty() && chance(0.6)) return var(mats[pick(mats.size())]);
    std::string name = "M" + std::to_string(counter++);
    Matrix m(dim_of(ty.rows), dim_of(ty.cols), ty.ring);
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c)
        if (chance(0.7)) m.set(r, c, rand_value(ty.ring));
    schema.emplace(name, ty);
    inst.mats.emplace(name, std::move(m));
    return var(name);
  }

  ScalarPtr rand_body(const std::vector<std::pair<std::string, Ring>>& params,
                      Ring out, int depth) {
    if (depth >= 2 || chance(0.3)) {
      if (!params.empty() && chance(0.75))
        return sc_param(params[pick(params.size())].first);
      return sc_lit(rand_value(out));
    }
    auto rec = [&] { return rand_body(params, out, depth + 1); };
    switch (pick(4)) {
      case 0:
        return sc_add(rec(), rec());
      case 1:
        return sc_mul(rec(), rec());
      case 2:
        return sc_cond(rec(), rec(), rec(), rec());
      default:
        return sc_add(rec(), sc_lit(rand_value(out)));
    }
  }

  PointwiseFn rand_fn(std::size_t arity, Ring r) {
    std::vector<std::pair<std::string, Ring>> params;
    for (std::size_t i = 0; i < arity; ++i)
      params.emplace_back("p" + std::to_string(i), r);
    ScalarPtr body = rand_body(params, r, 0);
    return make_fn(std::move(params), std::move(body));
  }

  std::string fresh() { return "t" + std::to_string(counter++); }

  Expr gen(const MatrixType& ty, int depth) {
    if (--nodes <= 0 || depth >= 5) return leaf(ty);
    enum Choice {
      kLeaf,
      kTrans,
      kOnes,
      kDiag,
      kMatMul,
      kApply,
      kCast,
      kPick,
      kLet,
      kLoopCan,
      kLoopCnt
    };
    std::vector<Choice> cs = {kLeaf, kLeaf, kTrans, kApply, kLet};
    if (ty.cols.is_one()) cs.push_back(kOnes);
    if (ty.rows == ty.cols) cs.push_back(kDiag);
    if (matmuls > 0) {
      cs.push_back(kMatMul);
      cs.push_back(kMatMul);
    }
    bool dec_like = target == Dialect::DEC_ML || target == Dialect::CORE;
    if (dec_like) cs.push_back(kPick);
    if (target == Dialect::CORE) cs.push_back(kCast);
    if (loops > 0 && loop_depth < 2) {
      if (target == Dialect::FOR_ML || target == Dialect::SIFOR_ML) {
        cs.push_back(kLoopCan);
        cs.push_back(kLoopCan);
      }
      if (dec_like) {
        cs.push_back(kLoopCnt);
        cs.push_back(kLoopCnt);
      }
    }
    switch (cs[pick(cs.size())]) {
      case kLeaf:
        return leaf(ty);
      case kTrans:
        return transpose(gen({ty.cols, ty.rows, ty.ring}, depth + 1));
      case kOnes:
        return ones(gen({ty.rows, rand_size(), ty.ring}, depth + 1));
      case kDiag:
        return diag(gen({ty.rows, SizeTerm::one(), ty.ring}, depth + 1));
      case kMatMul: {
        --matmuls;
        SizeTerm inner = rand_size();
        Expr a = gen({ty.rows, inner, ty.ring}, depth + 1);
        Expr b = gen({inner, ty.cols, ty.ring}, depth + 1);
        return matmul(std::move(a), std::move(b));
      }
      case kApply: {
        std::size_t arity = 1 + (chance(0.5) ? 1 : 0);
        PointwiseFn fn = rand_fn(arity, ty.ring);
        std::vector<Expr> args;
        for (std::size_t i = 0; i < arity; ++i)
          args.push_back(gen(ty, depth + 1));
        return apply(std::move(fn), std::move(args));
      }
      case kCast: {
        Ring from = ty.ring == primary ? secondary : primary;
        return apply(make_cast_fn(from, ty.ring),
                     {gen({ty.rows, ty.cols, from}, depth + 1)});
      }
      case kPick:
        return pickany(gen(ty, depth + 1));
      case kLet: {
        MatrixType bt{rand_size(), rand_size(), ty.ring};
        std::string n = fresh();
        Expr bound = gen(bt, depth + 1);
        scope.emplace_back(n, bt);
        Expr body = gen(ty, depth + 1);
        scope.pop_back();
        return let_in(std::move(n), std::move(bound), std::move(body));
      }
      case kLoopCan:
      case kLoopCnt: {
        bool canonical = target == Dialect::FOR_ML ||
                         target == Dialect::SIFOR_ML;
        MatrixType head_ty{rand_size(), SizeTerm::one(), ty.ring};
        return gen_loop(ty, depth, canonical, head_ty);
      }
    }
    return leaf(ty);
  }

  // head_ty shapes the canonical seed vector / counted driver.
  Expr gen_loop(const MatrixType& ty, int depth, bool canonical,
                const MatrixType& head_ty) {
    --loops;
    std::size_t nbind =
        (target != Dialect::FOR_ML && chance(0.35)) ? 2 : 1;
    std::vector<MatrixType> bt{ty};
    if (nbind == 2) bt.push_back({rand_size(), rand_size(), ty.ring});
    std::vector<Expr> inits;
    for (const auto& t : bt) inits.push_back(gen(t, depth + 1));
    Expr head = gen(head_ty, depth + 1);
    std::vector<std::string> names;
    std::size_t mark = scope.size();
    for (const auto& t : bt) {
      names.push_back(fresh());
      scope.emplace_back(names.back(), t);
    }
    std::string v;
    if (canonical) {
      v = fresh();
      scope.emplace_back(v, head_ty);
    }
    ++loop_depth;
    std::vector<Binding> bindings;
    for (std::size_t i = 0; i < bt.size(); ++i)
      bindings.push_back({names[i], gen(bt[i], depth + 1)});
    --loop_depth;
    scope.resize(mark);
    if (canonical)
      return let_in(v, std::move(head),
                    for_canonical(v, std::move(bindings), std::move(inits)));
    return for_counted(std::move(head), std::move(bindings), std::move(inits));
  }
};

}  // namespace

GenProgram gen_program(std::mt19937_64& rng, Dialect target,
                       std::size_t max_dim) {
  Gen g{rng, target, std::max<std::size_t>(std::size_t{1}, max_dim), {}, {}};
  constexpr Ring all[] = {Ring::Bool,        Ring::Int,
                          Ring::Real,        Ring::IntMinPlus,
                          Ring::RealMinPlus, Ring::IntMaxPlus,
                          Ring::RealMaxPlus};
  g.primary = all[g.pick(7)];
  do {
    g.secondary = all[g.pick(7)];
  } while (g.secondary == g.primary);
  auto dim = [&] {
    if (g.max_dim > 4 && g.chance(0.15))
      return std::size_t{5} + g.pick(g.max_dim - 4);
    return std::size_t{1} + g.pick(std::min<std::size_t>(4, g.max_dim));
  };
  g.inst.sizes["m"] = dim();
  g.inst.sizes["k"] = dim();
  MatrixType ty{g.rand_size(), g.rand_size(), g.primary};
  Expr e = g.gen(ty, 0);
  return {std::move(g.schema), std::move(e), std::move(g.inst), target};
}

namespace {

struct CaseRunner {
  const FuzzConfig& cfg;
  FuzzResult& res;
  std::size_t index;
  const GenProgram& gp;

  void fail(const std::string& phase, const std::string& message) {
    FuzzFailure f;
    f.case_index = index;
    f.phase = phase;
    f.message = message;
    f.program = print_program(gp.schema, gp.expr);
    f.sizes = gp.inst.sizes;
    for (const auto& [n, m] : gp.inst.mats) f.matrices[n] = print_matrix(m);
    res.failures.push_back(std::move(f));
  }

  bool compare(const Matrix& direct, const Matrix& lowered,
               const std::string& phase) {
    std::string why = matrix_mismatch(direct, lowered, 1e-9);
    if (!why.empty()) {
      fail(phase, why);
      return false;
    }
    return true;
  }

  void run() {
    // print/parse round-trip
    std::string text = print_program(gp.schema, gp.expr);
    try {
      ParsedProgram pp = parse_program(text);
      if (!expr_equal(pp.expr, gp.expr) || !schema_eq(pp.schema, gp.schema)) {
        fail("roundtrip", "reparsed program differs");
        return;
      }
    } catch (const ParseError& ex) {
      fail("roundtrip", ex.what());
      return;
    }

    std::optional<Matrix> direct;
    try {
      direct.emplace(eval_program(gp.schema, gp.inst, gp.expr));
    } catch (const EvalError& ex) {
      if (ex.kind() == EvalErrorKind::Arith) {
        ++res.skipped;
        return;
      }
      fail("eval", ex.what());
      return;
    } catch (const TypeCheckError& ex) {
      fail("typecheck", ex.what());
      return;
    }

    // the result must land on the inferred type
    try {
      TypedProgram tp = infer_program(gp.schema, gp.expr);
      std::size_t er = instance_size(gp.inst, tp.type.rows);
      std::size_t ec = instance_size(gp.inst, tp.type.cols);
      if (direct->rows() != er || direct->cols() != ec ||
          direct->ring() != tp.type.ring) {
        fail("type soundness",
             "inferred " + tp.type.str() + " but evaluated to " +
                 std::to_string(direct->rows()) + "x" +
                 std::to_string(direct->cols()) + " over " +
                 std::string(ring_name(direct->ring())));
        return;
      }
    } catch (const TypeCheckError& ex) {
      fail("type soundness", ex.what());
      return;
    }

    auto sd = smallest_dialect(gp.expr, gp.schema);
    if (!sd) {
      fail("dialect", "generated program fits no dialect");
      return;
    }

    try {
      switch (*sd) {
        case Dialect::ML:
        case Dialect::FOR_ML:
        case Dialect::SIFOR_ML: {
          Lowered low = lower_sifor_to_dec(gp.schema, gp.expr);
          Matrix got = eval_program(low.schema, gp.inst, low.expr);
          if (!compare(*direct, got, "compare(sifor->dec)")) return;
          ++res.compared;
          return;
        }
        case Dialect::CORE:
          if (!validate_dialect(gp.expr, Dialect::DEC_ML, gp.schema).ok) {
            Lowered low = lower_muse_to_dec(gp.schema, gp.expr);
            Instance enc{gp.inst.sizes, {}};
            for (const auto& [n, m] : gp.inst.mats)
              enc.mats.emplace(n, encode_matrix(m));
            Matrix got_enc = eval_program(low.schema, enc, low.expr);
            Matrix got = decode_matrix(direct->ring(), got_enc);
            if (!compare(*direct, got, "compare(muse->dec)")) return;
            ++res.compared;
            return;
          }
          [[fallthrough]];
        case Dialect::DEC_ML: {
          Lowered low = lower_dec_to_sifor(gp.schema, gp.expr);
          Matrix got = eval_program(low.schema, gp.inst, low.expr);
          if (!compare(*direct, got, "compare(dec->sifor)")) return;
          ++res.compared;
          return;
        }
        case Dialect::MUSE_ML:
          return;
      }
    } catch (const EvalError& ex) {
      fail("eval(lowered)", ex.what());
    } catch (const TypeCheckError& ex) {
      fail("lower", ex.what());
    } catch (const DialectError& ex) {
      fail("lower", ex.what());
    } catch (const std::logic_error& ex) {
      fail("lower", ex.what());
    }
  }
};

}  // namespace

std::string render_failure(const FuzzFailure& f) {
  std::string out = "case " + std::to_string(f.case_index) + " [" + f.phase +
                    "]: " + f.message + "\n";
  if (!f.sizes.empty()) {
    out += "sizes:";
    for (const auto& [n, v] : f.sizes) out += " " + n + "=" + std::to_string(v);
    out += "\n";
  }
  out += "program:\n" + f.program;
  for (const auto& [n, text] : f.matrices) out += "bind " + n + ":\n" + text;
  return out;
}

FuzzResult run_fuzz(const FuzzConfig& cfg) {
  constexpr Dialect targets[] = {Dialect::ML, Dialect::FOR_ML,
                                 Dialect::SIFOR_ML, Dialect::DEC_ML,
                                 Dialect::CORE};
  FuzzResult res;
  for (std::size_t i = 0; i < cfg.cases; ++i) {
    ++res.cases;
    std::mt19937_64 rng(cfg.seed + i);
    GenProgram gp = gen_program(rng, targets[i % 5], cfg.max_dim);
    CaseRunner{cfg, res, i, gp}.run();
  }
  return res;
}

}  // namespace matlang
