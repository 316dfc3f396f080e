#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "powlab/syntax.hpp"

using namespace powlab;

namespace {

Signature arith_sig() {
  Signature sig;
  sig.add_function("add", 2);
  sig.add_function("mul", 2);
  sig.add_function("f", 1);
  sig.add_relation("P", 1);
  sig.add_relation("Q", 1);
  sig.add_relation("le", 2);
  sig.add_constant("c0");
  sig.add_constant("c1");
  return sig;
}

}  // namespace

TEST_CASE("signature rejects duplicate and zero-arity symbols") {
  Signature sig;
  sig.add_function("add", 2);
  CHECK_THROWS_AS(sig.add_relation("add", 1), Error);
  CHECK_THROWS_AS(sig.add_constant("add"), Error);
  CHECK_THROWS_AS(sig.add_function("g", 0), Error);
}

TEST_CASE("parse_formula produces the expected trees") {
  Signature sig = arith_sig();

  Formula f1 = parse_formula("x = y", sig);
  CHECK(f1 == Formula::eq(Term::var("x"), Term::var("y")));

  Formula f2 = parse_formula("forall x. exists z. add(x,x) = z", sig);
  Formula want2 = Formula::forall(
      "x", Formula::exists(
               "z", Formula::eq(Term::app("add", {Term::var("x"), Term::var("x")}),
                                Term::var("z"))));
  CHECK(f2 == want2);

  Formula f3 = parse_formula("!(P(x) & x = c0)", sig);
  Formula want3 = Formula::lnot(
      Formula::land(Formula::rel("P", {Term::var("x")}),
                    Formula::eq(Term::var("x"), Term::cons("c0"))));
  CHECK(f3 == want3);
}

TEST_CASE("parser reports position, unknown symbols, arity mismatch") {
  Signature sig = arith_sig();
  CHECK_THROWS_WITH_AS(parse_formula("x = ", sig),
                       doctest::Contains("position"), Error);
  CHECK_THROWS_WITH_AS(parse_formula("x = Zeta", sig),
                       doctest::Contains("unknown symbol"), Error);
  CHECK_THROWS_WITH_AS(parse_formula("add(x) = y", sig),
                       doctest::Contains("arity mismatch"), Error);
  CHECK_THROWS_AS(parse_formula("le(x)", sig), Error);
}

TEST_CASE("precedence: & over | over ->, quantifiers maximal right") {
  Signature sig = arith_sig();
  Formula f = parse_formula("P(x) & Q(x) | P(y) -> Q(y)", sig);
  CHECK(f.kind == Formula::Kind::Implies);
  CHECK(f.kids[0].kind == Formula::Kind::Or);
  CHECK(f.kids[0].kids[0].kind == Formula::Kind::And);

  Formula g = parse_formula("forall x. P(x) -> Q(x)", sig);
  CHECK(g.kind == Formula::Kind::ForAll);
  CHECK(g.kids[0].kind == Formula::Kind::Implies);
}

TEST_CASE("constant names may start with a digit") {
  Signature sig;
  sig.add_function("add", 2);
  sig.add_constant("0c");
  Formula f = parse_formula("forall x. exists z. add(x,z) = 0c", sig);
  CHECK(free_variables(f).empty());
  CHECK(parse_formula(to_string(f), sig) == f);
}

TEST_CASE("free_variables") {
  Signature sig = arith_sig();
  CHECK(free_variables(parse_formula("x = y", sig)) ==
        std::set<std::string>{"x", "y"});
  CHECK(free_variables(parse_formula("forall x. x = y", sig)) ==
        std::set<std::string>{"y"});
  CHECK(free_variables(parse_formula("forall x. exists y. le(x,y)", sig)).empty());
}

namespace {

// Random formula generator for the round-trip and equivalence properties.
struct Gen {
  std::mt19937 rng;
  Signature sig;
  std::vector<std::string> vars{"x", "y", "z"};

  explicit Gen(unsigned seed) : rng(seed), sig(arith_sig()) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  Term term(int depth) {
    int kind = pick(depth > 0 ? 3 : 2);
    if (kind == 0) return Term::var(vars[pick(static_cast<int>(vars.size()))]);
    if (kind == 1) return Term::cons(pick(2) ? "c0" : "c1");
    if (pick(2))
      return Term::app("add", {term(depth - 1), term(depth - 1)});
    return Term::app("f", {term(depth - 1)});
  }

  Formula atom(int depth) {
    if (pick(2)) return Formula::eq(term(depth), term(depth));
    if (pick(2)) return Formula::rel("P", {term(depth)});
    return Formula::rel("le", {term(depth), term(depth)});
  }

  Formula formula(int depth) {
    if (depth == 0) return atom(1);
    switch (pick(7)) {
      case 0: return atom(depth);
      case 1: return Formula::lnot(formula(depth - 1));
      case 2: return Formula::land(formula(depth - 1), formula(depth - 1));
      case 3: return Formula::lor(formula(depth - 1), formula(depth - 1));
      case 4: return Formula::limp(formula(depth - 1), formula(depth - 1));
      case 5:
        return Formula::forall(vars[pick(static_cast<int>(vars.size()))],
                               formula(depth - 1));
      default:
        return Formula::exists(vars[pick(static_cast<int>(vars.size()))],
                               formula(depth - 1));
    }
  }
};

}  // namespace

TEST_CASE("property: print then parse is the identity") {
  Gen gen(20240817);
  for (int i = 0; i < 300; ++i) {
    Formula f = gen.formula(3);
    Formula back = parse_formula(to_string(f), gen.sig);
    CHECK(back == f);
  }
}

TEST_CASE("to_pcnf on the spec shapes") {
  Signature sig = arith_sig();

  PrenexForm p1 = to_pcnf(parse_formula("!(x = y)", sig));
  CHECK(p1.prefix.empty());
  REQUIRE(p1.matrix.size() == 1);
  REQUIRE(p1.matrix[0].size() == 1);
  CHECK_FALSE(p1.matrix[0][0].positive);
  CHECK(p1.matrix[0][0].atom ==
        Formula::eq(Term::var("x"), Term::var("y")));

  PrenexForm p2 = to_pcnf(parse_formula("forall x.(P(x) -> exists y. x = y)", sig));
  REQUIRE(p2.prefix.size() == 2);
  CHECK(p2.prefix[0].first == Quant::ForAll);
  CHECK(p2.prefix[1].first == Quant::Exists);
  CHECK(p2.prefix[0].second == "x0");
  CHECK(p2.prefix[1].second == "x1");
  REQUIRE(p2.matrix.size() == 1);
  REQUIRE(p2.matrix[0].size() == 2);
  CHECK_FALSE(p2.matrix[0][0].positive);
  CHECK(p2.matrix[0][0].atom == Formula::rel("P", {Term::var("x0")}));
  CHECK(p2.matrix[0][1].positive);
  CHECK(p2.matrix[0][1].atom == Formula::eq(Term::var("x0"), Term::var("x1")));

  PrenexForm p3 = to_pcnf(parse_formula("(exists x. P(x)) & (forall y. Q(y))", sig));
  REQUIRE(p3.prefix.size() == 2);
  CHECK(p3.prefix[0].first == Quant::Exists);
  CHECK(p3.prefix[1].first == Quant::ForAll);
  REQUIRE(p3.matrix.size() == 2);
  CHECK(p3.matrix[0] == std::vector<Literal>{{true, Formula::rel("P", {Term::var("x0")})}});
  CHECK(p3.matrix[1] == std::vector<Literal>{{true, Formula::rel("Q", {Term::var("x1")})}});
}

TEST_CASE("to_pdnf on the spec shapes") {
  Signature sig = arith_sig();

  PrenexForm p1 = to_pdnf(parse_formula("x = y", sig));
  CHECK(p1.mode == PrenexForm::Mode::DNF);
  CHECK(p1.prefix.empty());
  REQUIRE(p1.matrix.size() == 1);
  CHECK(p1.matrix[0].size() == 1);

  PrenexForm p2 = to_pdnf(parse_formula("!(P(x) | x = y)", sig));
  REQUIRE(p2.matrix.size() == 1);  // one cube
  REQUIRE(p2.matrix[0].size() == 2);
  CHECK_FALSE(p2.matrix[0][0].positive);
  CHECK_FALSE(p2.matrix[0][1].positive);

  PrenexForm p3 = to_pdnf(parse_formula("forall x.(P(x) & Q(x))", sig));
  REQUIRE(p3.prefix.size() == 1);
  CHECK(p3.prefix[0].first == Quant::ForAll);
  REQUIRE(p3.matrix.size() == 1);
  CHECK(p3.matrix[0].size() == 2);
}

TEST_CASE("pcnf matrix is quantifier- and implication-free") {
  Gen gen(42);
  for (int i = 0; i < 200; ++i) {
    Formula f = gen.formula(3);
    PrenexForm p = to_pcnf(f);
    for (const auto& clause : p.matrix)
      for (const Literal& l : clause) CHECK(l.atom.is_atom());
    // Renamed-apart prefix variables are pairwise distinct.
    std::set<std::string> names;
    for (const auto& [q, v] : p.prefix) CHECK(names.insert(v).second);
  }
}

TEST_CASE("renaming avoids clashing with free variables named like the counter") {
  Signature sig = arith_sig();
  // x0 free in the body; the bound variable must not collide with it.
  Formula f = Formula::forall("y", Formula::eq(Term::var("y"), Term::var("x0")));
  PrenexForm p = to_pcnf(f);
  REQUIRE(p.prefix.size() == 1);
  CHECK(p.prefix[0].second != "x0");
  CHECK(free_variables(p.to_formula()) == std::set<std::string>{"x0"});
}

TEST_CASE("atom_occurrences lists every literal with polarity") {
  Signature sig = arith_sig();
  PrenexForm p1 = to_pcnf(parse_formula("!(x = y)", sig));
  auto occ1 = atom_occurrences(p1);
  REQUIRE(occ1.size() == 1);
  CHECK_FALSE(occ1[0].positive);

  PrenexForm p2 = to_pcnf(parse_formula("x = y | !P(x)", sig));
  auto occ2 = atom_occurrences(p2);
  REQUIRE(occ2.size() == 2);
  CHECK(occ2[0].positive);
  CHECK(occ2[0].atom.kind == Formula::Kind::Equal);
  CHECK_FALSE(occ2[1].positive);

  PrenexForm p3;
  p3.mode = PrenexForm::Mode::CNF;
  Literal px{true, Formula::rel("P", {Term::var("x")})};
  p3.matrix = {{px}, {px}};
  auto occ3 = atom_occurrences(p3);
  CHECK(occ3.size() == 2);  // same atom, two distinct occurrences

  CHECK_THROWS_AS(atom_occurrences(to_pdnf(parse_formula("x = y", sig))), Error);
}

TEST_CASE("parser rejects garbage with Error, never crashes") {
  Signature sig = arith_sig();
  std::mt19937 rng(5150);
  const std::string alphabet = "xyzc01 ()=!&|->.forallexists,add";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    int len = std::uniform_int_distribution<int>(1, 30)(rng);
    for (int i = 0; i < len; ++i)
      s += alphabet[std::uniform_int_distribution<std::size_t>(
          0, alphabet.size() - 1)(rng)];
    try {
      Formula f = parse_formula(s, sig);
      // Anything that parses must round-trip.
      CHECK(parse_formula(to_string(f), sig) == f);
    } catch (const Error&) {
      // fine: malformed input
    }
  }
}

TEST_CASE("matrix size guard aborts oversized distribution") {
  Signature sig = arith_sig();
  // (a1|b1)&(a2|b2)&... over distinct atoms distributes to 2^n cubes.
  auto pair = [&](int i) {
    std::string v = "v" + std::to_string(i);
    std::string w = "w" + std::to_string(i);
    return Formula::lor(Formula::rel("le", {Term::var(v), Term::var(w)}),
                        Formula::rel("le", {Term::var(w), Term::var(v)}));
  };
  Formula f = pair(0);
  for (int i = 1; i < 12; ++i) f = Formula::land(f, pair(i));
  CHECK_THROWS_WITH_AS(to_pdnf(f, 100), doctest::Contains("size cap"), Error);
}
