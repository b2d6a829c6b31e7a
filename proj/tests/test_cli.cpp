// End-to-end tests of the command-line surface: exit codes, exact text
// output, records mode, and file plumbing. The engine itself is covered
// elsewhere; this file cares about the glue.
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "matlang/cli.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Res {
  int code;
  std::string out;
  std::string err;
};

Res cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = matlang::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string root = MATLANG_SOURCE_DIR;

std::string prog(const std::string& name) { return root + "/programs/" + name; }
std::string mat(const std::string& name) { return root + "/mats/" + name; }

// Scratch files live under one per-run directory.
fs::path scratch_dir() {
  static fs::path d = [] {
    fs::path p = fs::temp_directory_path() / "matlang_cli_tests";
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string scratch(const std::string& name, const std::string& text) {
  fs::path p = scratch_dir() / name;
  std::ofstream f(p);
  f << text;
  f.close();
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Every line must parse as one JSON object; returns them in order.
std::vector<json> record_lines(const std::string& out) {
  std::vector<json> v;
  std::istringstream ss(out);
  std::string line;
  while (std::getline(ss, line)) {
    REQUIRE(!line.empty());
    v.push_back(json::parse(line));
  }
  return v;
}

}  // namespace

TEST_CASE("check prints dialect and type") {
  Res r = cli({"check", prog("wcc.ml")});
  CHECK(r.code == 0);
  CHECK(r.out == "dialect: core\ntype: a x a over bool\n");
  CHECK(r.err.empty());

  Res v = cli({"check", prog("vec_sum.ml")});
  CHECK(v.code == 0);
  CHECK(v.out == "dialect: ml\ntype: 1 x 1 over int\n");
}

TEST_CASE("check records mode") {
  Res r = cli({"check", prog("sssp.ml"), "--format", "records"});
  CHECK(r.code == 0);
  auto lines = record_lines(r.out);
  REQUIRE(lines.size() == 1);
  const json& j = lines[0];
  CHECK(j.at("cmd") == "check");
  CHECK(j.at("dialect") == "core");
  CHECK(j.at("rows") == "n");
  CHECK(j.at("cols") == "1");
  CHECK(j.at("ring") == "int_min_plus");
  CHECK(j.at("type") == "n x 1 over int_min_plus");
}

TEST_CASE("eval computes and prints a matrix") {
  Res r = cli({"eval", prog("vec_sum.ml"), "--bind", "V=" + mat("vec123.mtx")});
  CHECK(r.code == 0);
  CHECK(r.out == "matrix 1 1 int\n1 1 6\n");

  SUBCASE("repeat runs are byte-identical") {
    Res again =
        cli({"eval", prog("vec_sum.ml"), "--bind", "V=" + mat("vec123.mtx")});
    CHECK(again.out == r.out);
    CHECK(again.code == r.code);
  }

  SUBCASE("--out writes the file and keeps stdout quiet") {
    std::string path = (scratch_dir() / "sum_out.mtx").string();
    Res w = cli({"eval", prog("vec_sum.ml"), "--bind",
                 "V=" + mat("vec123.mtx"), "--out", path});
    CHECK(w.code == 0);
    CHECK(w.out.empty());
    CHECK(slurp(path) == "matrix 1 1 int\n1 1 6\n");
  }

  SUBCASE("records mode carries the matrix text") {
    Res j = cli({"eval", prog("vec_sum.ml"), "--bind",
                 "V=" + mat("vec123.mtx"), "--format", "records"});
    auto lines = record_lines(j.out);
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].at("cmd") == "eval");
    CHECK(lines[0].at("rows") == 1);
    CHECK(lines[0].at("cols") == 1);
    CHECK(lines[0].at("ring") == "int");
    CHECK(lines[0].at("matrix") == "matrix 1 1 int\n1 1 6\n");
  }
}

TEST_CASE("eval with explicit sizes and free size symbols") {
  // recurrence.ml binds A (n x n) and B (n x 1); sizes come from the files.
  Res r = cli({"eval", prog("recurrence.ml"), "--bind", "A=" + mat("a3.mtx"),
               "--bind", "B=" + mat("b3.mtx")});
  CHECK(r.code == 0);

  SUBCASE("a matching --size is accepted") {
    Res s = cli({"eval", prog("recurrence.ml"), "--size", "n=3", "--bind",
                 "A=" + mat("a3.mtx"), "--bind", "B=" + mat("b3.mtx")});
    CHECK(s.code == 0);
    CHECK(s.out == r.out);
  }

  SUBCASE("a conflicting --size is an instance error") {
    Res s = cli({"eval", prog("recurrence.ml"), "--size", "n=2", "--bind",
                 "A=" + mat("a3.mtx"), "--bind", "B=" + mat("b3.mtx")});
    CHECK(s.code == 4);
    CHECK(!s.err.empty());
  }
}

TEST_CASE("exit codes for bad input") {
  SUBCASE("missing program file is an I/O error") {
    Res r = cli({"check", root + "/programs/nope.ml"});
    CHECK(r.code == 3);
    CHECK(!r.err.empty());
  }
  SUBCASE("unparseable program") {
    std::string p = scratch("broken.ml", "matrix A over;\n");
    Res r = cli({"check", p});
    CHECK(r.code == 2);
    CHECK(!r.err.empty());
  }
  SUBCASE("type errors carry the rule") {
    std::string p = scratch("illtyped.ml",
                            "matrix A : n x n over int;\n"
                            "matrix V : n x 1 over int;\nin\nV * A\n");
    Res r = cli({"check", p});
    CHECK(r.code == 2);
    CHECK(r.err.find("type error:") == 0);
  }
  SUBCASE("unparseable matrix file") {
    std::string m = scratch("broken.mtx", "matrix 2 2 int\n1 1 oops\n");
    Res r = cli({"eval", prog("vec_sum.ml"), "--bind", "V=" + m});
    CHECK(r.code == 2);
  }
  SUBCASE("binding a name outside the schema") {
    Res r =
        cli({"eval", prog("vec_sum.ml"), "--bind", "W=" + mat("vec123.mtx")});
    CHECK(r.code == 4);
  }
  SUBCASE("binding the same name twice") {
    Res r = cli({"eval", prog("vec_sum.ml"), "--bind",
                 "V=" + mat("vec123.mtx"), "--bind", "V=" + mat("vec123.mtx")});
    CHECK(r.code == 2);
  }
  SUBCASE("leaving a schema matrix unbound") {
    Res r = cli({"eval", prog("vec_sum.ml")});
    CHECK(r.code == 4);
  }
  SUBCASE("binding a matrix of the wrong ring") {
    Res r =
        cli({"eval", prog("vec_sum.ml"), "--bind", "V=" + mat("wsrc4_1.mtx")});
    CHECK(r.code == 4);
  }
  SUBCASE("malformed --size") {
    Res r = cli({"eval", prog("vec_sum.ml"), "--size", "n=zero", "--bind",
                 "V=" + mat("vec123.mtx")});
    CHECK(r.code == 2);
  }
  SUBCASE("usage errors come from the parser") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"lower", prog("wcc.ml"), "--to", "ml"}).code == 2);
    CHECK(cli({"lower", prog("wcc.ml")}).code == 2);  // --to is required
  }
  SUBCASE("--help succeeds and shows the subcommands") {
    Res r = cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("check") != std::string::npos);
    CHECK(r.out.find("fuzz") != std::string::npos);
  }
}

TEST_CASE("runtime failures map to the instance exit code") {
  std::string p = scratch("overflow.ml",
                          "matrix V : n x 1 over int;\nin\n"
                          "apply[(c: int) -> c * int(4000000000)](\n"
                          "  apply[(c: int) -> c * int(4000000000)](V))\n");
  Res r = cli({"eval", p, "--bind", "V=" + mat("vec123.mtx")});
  CHECK(r.code == 4);
  CHECK(r.err.find("arith error:") == 0);
}

TEST_CASE("lower prints the program and the report") {
  Res r = cli({"lower", prog("wcc.ml"), "--to", "sifor"});
  CHECK(r.code == 0);
  CHECK(r.out.find("for [") != std::string::npos);  // canonical loop appeared
  CHECK(r.out.find("source: core\n") != std::string::npos);
  CHECK(r.out.find("target: sifor\n") != std::string::npos);

  SUBCASE("--out splits program from report") {
    std::string path = (scratch_dir() / "wcc_sifor.ml").string();
    Res w = cli({"lower", prog("wcc.ml"), "--to", "sifor", "--out", path});
    CHECK(w.code == 0);
    CHECK(w.out.find("target: sifor\n") != std::string::npos);
    CHECK(w.out.find("for [") == std::string::npos);  // program went to the file
    std::string text = slurp(path);
    CHECK(text.find("for [") != std::string::npos);

    // The written program parses; wcc's single binding means the loops come
    // out single-binding too, so the smallest fit is plain `for`.
    Res chk = cli({"check", path});
    CHECK(chk.code == 0);
    CHECK(chk.out.find("dialect: for\n") == 0);
  }

  SUBCASE("records mode") {
    Res j = cli({"lower", prog("wcc.ml"), "--to", "sifor", "--format",
                 "records"});
    auto lines = record_lines(j.out);
    REQUIRE(lines.size() == 1);
    const json& rec = lines[0];
    CHECK(rec.at("cmd") == "lower");
    CHECK(rec.at("source") == "core");
    CHECK(rec.at("target") == "sifor");
    CHECK(rec.at("changed") == true);
    CHECK(rec.at("encoded") == false);
    CHECK(rec.at("macros").is_array());
    std::vector<std::string> macros = rec.at("macros");
    CHECK(std::find(macros.begin(), macros.end(), "pickany expansion") !=
          macros.end());
    CHECK(rec.at("fresh").is_array());
    CHECK(!rec.at("fresh").empty());
    CHECK(rec.at("program").is_string());
  }

  SUBCASE("lowering a program already in the target leaves it unchanged") {
    Res j = cli({"lower", prog("recurrence_sifor.ml"), "--to", "sifor",
                 "--format", "records"});
    auto lines = record_lines(j.out);
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].at("changed") == false);
    CHECK(lines[0].at("macros").empty());
  }
}

TEST_CASE("diff reports equal on the shipped programs") {
  Res r = cli({"diff", prog("wcc.ml"), "--to", "sifor", "--bind",
               "A=" + mat("path4.mtx")});
  CHECK(r.code == 0);
  CHECK(r.out == "equal\n");

  // vec_max lowers through the encoding into the reals.
  Res e = cli({"diff", prog("vec_max.ml"), "--to", "dec", "--bind",
               "V=" + mat("vec123.mtx"), "--format", "records"});
  CHECK(e.code == 0);
  auto lines = record_lines(e.out);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].at("cmd") == "diff");
  CHECK(lines[0].at("encoded") == true);
  CHECK(lines[0].at("equal") == true);
  CHECK(!lines[0].contains("mismatch"));
}

TEST_CASE("algo runs the stdlib programs") {
  SUBCASE("wcc labels a path graph as one component") {
    Res r = cli({"algo", "wcc", mat("path4.mtx")});
    CHECK(r.code == 0);
    // every row's single label is vertex 1
    CHECK(r.out == "matrix 4 4 bool\n1 1 true\n2 1 true\n3 1 true\n4 1 true\n");
  }
  SUBCASE("reach from vertex 2 on the directed chain") {
    Res r = cli({"algo", "reach", mat("chain4.mtx"), "--source", "2"});
    CHECK(r.code == 0);
    CHECK(r.out == "matrix 4 1 bool\n2 1 true\n3 1 true\n4 1 true\n");
  }
  SUBCASE("sssp distances") {
    Res r = cli({"algo", "sssp", mat("wgraph4.mtx"), "--source", "1"});
    CHECK(r.code == 0);
    CHECK(r.out ==
          "matrix 4 1 int_min_plus\n1 1 0\n2 1 4\n3 1 5\n4 1 7\n");
  }
  SUBCASE("maxv over a plain int vector") {
    Res r = cli({"algo", "maxv", mat("vec123.mtx")});
    CHECK(r.code == 0);
    CHECK(r.out == "matrix 1 1 int_max_plus\n1 1 3\n");
  }
  SUBCASE("--source misuse is a usage error") {
    CHECK(cli({"algo", "reach", mat("chain4.mtx")}).code == 2);
    CHECK(cli({"algo", "wcc", mat("path4.mtx"), "--source", "1"}).code == 2);
  }
  SUBCASE("--source outside 1..n is an instance error") {
    CHECK(cli({"algo", "reach", mat("chain4.mtx"), "--source", "9"}).code == 4);
    CHECK(cli({"algo", "reach", mat("chain4.mtx"), "--source", "0"}).code == 4);
  }
  SUBCASE("graph of the wrong ring is an instance error") {
    CHECK(cli({"algo", "wcc", mat("wgraph4.mtx")}).code == 4);
  }
}

TEST_CASE("fuzz summarizes its run") {
  Res r = cli({"fuzz", "--seed", "7", "--cases", "25", "--max-dim", "4"});
  CHECK(r.code == 0);
  CHECK(r.out.find("fuzz: cases=25 compared=") == 0);
  CHECK(r.out.find("failures=0\n") != std::string::npos);

  SUBCASE("records mode ends with the summary object") {
    Res j = cli({"fuzz", "--seed", "7", "--cases", "25", "--max-dim", "4",
                 "--format", "records"});
    CHECK(j.code == 0);
    auto lines = record_lines(j.out);
    REQUIRE(!lines.empty());
    const json& last = lines.back();
    CHECK(last.at("cmd") == "fuzz");
    CHECK(last.at("cases") == 25);
    CHECK(last.at("failures") == 0);
  }

  SUBCASE("runs are reproducible by seed") {
    Res a = cli({"fuzz", "--seed", "11", "--cases", "30"});
    Res b = cli({"fuzz", "--seed", "11", "--cases", "30"});
    CHECK(a.out == b.out);
  }
}
