#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "helpers.hpp"
#include "powlab/cli.hpp"
#include "powlab/io.hpp"

using namespace powlab;
using namespace powlab::testutil;

namespace fs = std::filesystem;

static const std::string kData = POWLAB_DATA_DIR;

TEST_CASE("structure files load and round-trip") {
  FiniteStructure z8 = load_structure(kData + "/z8.struct");
  CHECK(z8.size() == 8);
  CHECK(z8.funcs.at("add").at({3, 7}) == 2);
  CHECK(z8.consts.at("zero") == 0);

  FiniteStructure gf3 = load_structure(kData + "/gf3inv.struct");
  CHECK(gf3.funcs.at("inv").count({0}) == 0);
  CHECK(gf3.funcs.at("inv").at({2}) == 2);

  // render -> parse -> render is stable.
  std::string once = render_structure(gf3);
  std::istringstream in(once);
  FiniteStructure back = parse_structure(in, "roundtrip");
  CHECK(render_structure(back) == once);
}

TEST_CASE("structure parse errors carry file and line") {
  std::istringstream bad1("structure S\nfun add/2: (0,0)->0\n");
  CHECK_THROWS_WITH_AS(parse_structure(bad1, "f"),
                       doctest::Contains("f:2"), Error);
  std::istringstream bad2("structure S\ndomain 0 1\nfun add/2: (0,2)->0\n");
  CHECK_THROWS_WITH_AS(parse_structure(bad2, "f"),
                       doctest::Contains("unknown element"), Error);
  std::istringstream bad3("structure S\ndomain 0\nconst c = 1\n");
  CHECK_THROWS_AS(parse_structure(bad3, "f"), Error);
  std::istringstream bad4(
      "structure S\ndomain 0 1\nfun f/1: (0)->0 (0)->1\n");
  CHECK_THROWS_WITH_AS(parse_structure(bad4, "f"),
                       doctest::Contains("conflicting"), Error);
}

TEST_CASE("index family and ultrafilter files") {
  IndexFamily fam = load_index_family(kData + "/fam22.indexfam");
  CHECK(fam.stages() == 2);
  CHECK(fam.sets[0].name == "I0");
  CHECK(fam.size(1) == 2);

  UltrafilterSpec u = load_ultrafilter(kData + "/principal_j0.ultra", fam);
  CHECK(u.over == "I0");
  CHECK(u.family.ultrafilter);
  CHECK(u.family.principal_at == 0);

  // Explicit family form matches its principal equivalent.
  UltrafilterSpec e = load_ultrafilter(kData + "/explicit_j1.ultra", fam);
  CHECK(e.family.principal_at == 1);
  CHECK(e.family.sets == principal_ultrafilter(2, 1).sets);

  // Unknown index set is rejected.
  std::istringstream bad("ultrafilter over I9: principal j0\n");
  CHECK_THROWS_WITH_AS(parse_ultrafilter(bad, "u", fam),
                       doctest::Contains("unknown index set"), Error);

  // Size-1 index sets are rejected by the family invariant.
  std::istringstream small("indexset I0: only\n");
  CHECK_THROWS_WITH_AS(parse_index_family(small, "fam"),
                       doctest::Contains("cardinality"), Error);
}

TEST_CASE("corpus loading skips comments and blanks") {
  auto lines = load_corpus_lines(kData + "/horn30.txt");
  CHECK(lines.size() == 30);
  FiniteStructure universe = load_structure(kData + "/universe.struct");
  auto formulas = load_corpus(kData + "/horn30.txt", universe.sig);
  CHECK(formulas.size() == 30);
  for (const Formula& f : formulas) CHECK(free_variables(f).empty());
}

namespace {

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> argv{"powlab"};
  argv.insert(argv.end(), args.begin(), args.end());
  return run(argv);
}

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  CHECK(run_cli({"eval"}) == 2);                       // missing inputs
  CHECK(run_cli({"classify", "--corpus", "nope"}) == 2);
  CHECK(run_cli({"build", "cumulative", "--structure", kData + "/z2.struct"}) ==
        2);  // missing indexfam
}

TEST_CASE("cli: identical configuration produces byte-identical reports") {
  fs::path out1 = fs::temp_directory_path() / "powlab_t1";
  fs::path out2 = fs::temp_directory_path() / "powlab_t2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  for (const auto& out : {out1, out2}) {
    CHECK(run_cli({"classify", "--structure", kData + "/universe.struct",
                   "--corpus", kData + "/classify_corpus.txt", "--bound", "2",
                   "--out", out.string()}) == 0);
    CHECK(run_cli({"grid", "--suite", "transport", "--out", out.string()}) == 0);
    CHECK(run_cli({"quotient", "ultra", "--structure", kData + "/z2.struct",
                   "--indexfam", kData + "/fam22.indexfam", "--ultrafilter",
                   kData + "/principal_j0.ultra", "--stage", "1", "--out",
                   out.string()}) == 0);
  }
  for (const char* name :
       {"classify_report.tsv", "grid_report.tsv", "grid_summary.tsv",
        "quotient.struct"})
    CHECK(read_file((out1 / name).string()) == read_file((out2 / name).string()));
}

TEST_CASE("cli: eval composes build cumulative with satisfaction") {
  fs::path out = fs::temp_directory_path() / "powlab_t3";
  fs::remove_all(out);
  CHECK(run_cli({"eval", "--structure", kData + "/z8.struct", "--indexfam",
                 kData + "/fam22.indexfam", "--stage", "1", "--corpus",
                 kData + "/rank2_formulas.txt", "--out", out.string()}) == 0);
  std::string report = read_file((out / "eval.tsv").string());
  CHECK(report.find("add(x,y) = add(y,x)\ttrue") != std::string::npos);
}

TEST_CASE("cli: iso and grid exit codes") {
  fs::path out = fs::temp_directory_path() / "powlab_t4";
  fs::remove_all(out);
  CHECK(run_cli({"iso", "--structure", kData + "/z2.struct", "--indexfam",
                 kData + "/fam22.indexfam", "--stage", "1", "--out",
                 out.string()}) == 0);
  CHECK(run_cli({"grid", "--suite", "rk", "--out", out.string()}) == 0);
  std::string summary = read_file((out / "grid_summary.tsv").string());
  CHECK(summary.find("fail\t0") != std::string::npos);
}
