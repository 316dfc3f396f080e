#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "powlab/cumulative.hpp"

using namespace powlab;
using namespace powlab::testutil;

namespace {

HierElement bar(const HierElement& e, int set, int size) {
  return HierElement::mk_func(set, std::vector<HierElement>(size, e));
}

}  // namespace

TEST_CASE("index family invariants") {
  IndexFamily bad;
  bad.sets.push_back({"I0", {"j"}});
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("cardinality"), Error);

  IndexFamily dup;
  dup.sets.push_back({"I0", {"a", "b"}});
  dup.sets.push_back({"I0", {"c", "d"}});
  CHECK_THROWS_WITH_AS(dup.validate(), doctest::Contains("reused"), Error);
}

TEST_CASE("level is the least containing stage") {
  IndexFamily fam = uniform_family(2, 2);
  CHECK(level(HierElement::mk_base(0), fam) == 0);

  HierElement c0 = bar(HierElement::mk_base(0), 0, 2);
  CHECK(level(c0, fam) == 1);

  HierElement f2 = bar(c0, 1, 2);
  CHECK(level(f2, fam) == 2);
  HierElement mixed = HierElement::mk_func(1, {c0, HierElement::mk_base(1)});
  CHECK(level(mixed, fam) == 2);

  // Malformed: value level exceeds the index-set stage.
  CHECK_THROWS_WITH_AS(level(HierElement::mk_func(0, {c0, c0}), fam),
                       doctest::Contains("malformed"), Error);
  CHECK_THROWS_AS(level(HierElement::mk_func(0, {HierElement::mk_base(0)}), fam),
                  Error);
}

TEST_CASE("vartheta follows the two-case definition") {
  HierElement three = HierElement::mk_base(3);
  HierElement three_bar = bar(three, 0, 2);
  CHECK(vartheta(1, {0, 0}, three_bar) == three);
  CHECK(vartheta(1, {0, 1}, three_bar) == three);
  CHECK(vartheta(1, {0, 0}, HierElement::mk_base(2)) == HierElement::mk_base(2));

  HierElement f2 = bar(three_bar, 1, 2);
  CHECK(vartheta(2, {1, 0}, f2) == three_bar);
  // Level below alpha, or wrong domain: unchanged.
  CHECK(vartheta(2, {1, 0}, three_bar) == three_bar);
  CHECK(vartheta(1, {1, 0}, three_bar) == three_bar);
  CHECK(vartheta(2, {0, 0}, f2) == f2);
}

TEST_CASE("build_level carrier sizes") {
  FiniteStructure z2 = make_zn(2);
  IndexFamily fam = uniform_family(2, 2);

  CumulativePower cp0 = build_level(z2, fam, 0, false);
  CHECK(cp0.carrier.size() == 2);

  CumulativePower cp1 = build_level(z2, fam, 1, false);
  CHECK(cp1.carrier.size() == 6);  // A^{I_0} plus A

  CumulativePower cp2 = build_level(z2, fam, 2, false);
  CHECK(cp2.carrier.size() == 42);  // 6^2 + 6

  // The stage-1 prefix of the stage-2 carrier is the stage-1 carrier.
  for (int i = 0; i < 6; ++i) CHECK(cp2.carrier[i] == cp1.carrier[i]);
}

TEST_CASE("apply_operation: base case, pointwise case, coordinate law") {
  FiniteStructure z8 = make_zn(8);
  IndexFamily fam = uniform_family(1, 2);
  CumulativePower cp = build_level(z8, fam, 1, false);

  auto two = HierElement::mk_base(2), five = HierElement::mk_base(5);
  CHECK(*apply_operation(cp, "add", {two, five}) == HierElement::mk_base(7));

  HierElement three_bar = bar(HierElement::mk_base(3), 0, 2);
  HierElement seven = HierElement::mk_base(7);
  // 3bar + 7 = 2bar (mod 8), computed coordinatewise through vartheta.
  CHECK(*apply_operation(cp, "add", {three_bar, seven}) ==
        bar(HierElement::mk_base(2), 0, 2));

  // Every coordinate of a level-1 result equals the base operation on
  // the vartheta images.
  for (const HierElement& a : cp.carrier)
    for (const HierElement& b : cp.carrier) {
      auto r = apply_operation(cp, "add", {a, b});
      REQUIRE(r.has_value());
      int delta = std::max(a.level(), b.level());
      if (delta == 0) continue;
      for (int j = 0; j < 2; ++j) {
        auto want = apply_operation(
            cp, "add", {vartheta(delta, {0, j}, a), vartheta(delta, {0, j}, b)});
        CHECK(vartheta(delta, {0, j}, *r) == *want);
      }
    }
}

TEST_CASE("holds_relation on the two-element order") {
  Signature sig;
  sig.add_relation("le", 2);
  FiniteStructure S = make_structure(sig, 2, "order2");
  S.rels["le"] = {{0, 0}, {0, 1}, {1, 1}};
  IndexFamily fam = uniform_family(1, 2);
  CumulativePower cp = build_level(S, fam, 1, false);

  auto b0 = HierElement::mk_base(0), b1 = HierElement::mk_base(1);
  CHECK(holds_relation(cp, "le", {b0, b1}));
  CHECK(holds_relation(cp, "le", {bar(b0, 0, 2), b1}));
  CHECK_FALSE(holds_relation(cp, "le", {HierElement::mk_func(0, {b0, b1}), b0}));
}

TEST_CASE("constant_predicate and hereditary constants") {
  FiniteStructure z2 = make_zn(2);
  IndexFamily fam = uniform_family(2, 2);
  CumulativePower cp = build_level(z2, fam, 2, false);

  auto b0 = HierElement::mk_base(0), b1 = HierElement::mk_base(1);
  CHECK(constant_predicate(cp, "zero", b0));
  CHECK(constant_predicate(cp, "zero", bar(b0, 0, 2)));
  CHECK_FALSE(constant_predicate(cp, "zero", HierElement::mk_func(0, {b0, b1})));
  CHECK_FALSE(constant_predicate(cp, "zero", b1));
  // Deeper members of the recursively generated set.
  CHECK(constant_predicate(cp, "zero", bar(bar(b0, 0, 2), 1, 2)));
  CHECK(constant_predicate(cp, "zero",
                           HierElement::mk_func(1, {bar(b0, 0, 2), b0})));

  CHECK(hereditary_constant(cp, "zero", 0) == b0);
  CHECK(hereditary_constant(cp, "zero", 1) == bar(b0, 0, 2));
  CHECK(hereditary_constant(cp, "zero", 2) == bar(bar(b0, 0, 2), 1, 2));
  CHECK(constant_predicate(cp, "zero", hereditary_constant(cp, "zero", 2)));
}

TEST_CASE("vartheta_inverse is the identity on level 1, bar on level 0") {
  FiniteStructure z2 = make_zn(2);
  IndexFamily fam = uniform_family(1, 2);
  CumulativePower cp = build_level(z2, fam, 1, false);

  auto b0 = HierElement::mk_base(0);
  HierElement f = HierElement::mk_func(0, {b0, HierElement::mk_base(1)});
  CHECK(vartheta_inverse(cp, f) == f);
  CHECK(vartheta_inverse(cp, b0) == bar(b0, 0, 2));
  CHECK_THROWS_AS(vartheta_inverse(cp, bar(bar(b0, 0, 2), 1, 2)), Error);

  // Surjectivity onto the level-1 shapes: every level-1 element is its
  // own image.
  for (const HierElement& e : cp.carrier)
    if (e.level() == 1) CHECK(vartheta_inverse(cp, e) == e);
}

TEST_CASE("satisfies_cumulative separates base elements from their bars") {
  FiniteStructure z8 = make_zn(8);
  IndexFamily fam = uniform_family(1, 2);
  CumulativePower cp = build_level(z8, fam, 1, false);
  Signature sig = z8.sig;

  Formula addeq = parse_formula("add(x,y) = z", sig);
  auto B = [](int k) { return HierElement::mk_base(k); };
  CHECK(satisfies_cumulative(cp, addeq, {{"x", B(2)}, {"y", B(5)}, {"z", B(7)}}));
  CHECK_FALSE(satisfies_cumulative(
      cp, addeq, {{"x", bar(B(2), 0, 2)}, {"y", B(5)}, {"z", B(7)}}));
  CHECK(satisfies_cumulative(
      cp, addeq,
      {{"x", bar(B(2), 0, 2)}, {"y", B(5)}, {"z", bar(B(7), 0, 2)}}));

  // 3bar + 7 = 2bar but not 2.
  CHECK(satisfies_cumulative(
      cp, addeq,
      {{"x", bar(B(3), 0, 2)}, {"y", B(7)}, {"z", bar(B(2), 0, 2)}}));
  CHECK_FALSE(satisfies_cumulative(
      cp, addeq, {{"x", bar(B(3), 0, 2)}, {"y", B(7)}, {"z", B(2)}}));

  // Constant-free sentences on stage 0 agree with plain satisfaction.
  CumulativePower cp0 = build_level(z8, fam, 0, false);
  Formula assoc = parse_formula(
      "forall x. forall y. forall z. add(add(x,y),z) = add(x,add(y,z))", sig);
  CHECK(satisfies_cumulative(cp0, assoc) == satisfies(z8, assoc));

  // Constants require plus mode.
  Formula with_const = parse_formula("exists x. x = zero", sig);
  CHECK_THROWS_WITH_AS(satisfies_cumulative(cp, with_const),
                       doctest::Contains("non-plus"), Error);
  CumulativePower cpp = build_level(z8, fam, 1, true);
  CHECK(satisfies_cumulative(cpp, with_const));
  // In plus mode the constant denotes the hereditary constant 0bar.
  Formula allzero = parse_formula("forall x. add(x, zero) = x", sig);
  CHECK_FALSE(satisfies_cumulative(cpp, allzero));
}

TEST_CASE("invariant: result level is the max argument level (small grid)") {
  Signature sig;
  sig.add_function("f", 2);
  for (const FiniteStructure& S : all_structures(sig, 2, /*total=*/true)) {
    IndexFamily fam = uniform_family(2, 2);
    CumulativePower cp = build_level(S, fam, 2, false);
    for (const HierElement& a : cp.carrier)
      for (const HierElement& b : cp.carrier) {
        auto r = apply_operation(cp, "f", {a, b});
        REQUIRE(r.has_value());
        CHECK(r->level() == std::max(a.level(), b.level()));
      }
  }
}

TEST_CASE("invariant: restriction of stage operations") {
  FiniteStructure z2 = make_zn(2);
  IndexFamily fam = uniform_family(2, 2);
  CumulativePower cp1 = build_level(z2, fam, 1, false);
  CumulativePower cp2 = build_level(z2, fam, 2, false);
  for (const HierElement& a : cp1.carrier)
    for (const HierElement& b : cp1.carrier)
      CHECK(*apply_operation(cp2, "add", {a, b}) ==
            *apply_operation(cp1, "add", {a, b}));
}

TEST_CASE("invariant: value levels drop") {
  FiniteStructure z2 = make_zn(2);
  IndexFamily fam = uniform_family(2, 2);
  CumulativePower cp = build_level(z2, fam, 2, false);
  for (const HierElement& e : cp.carrier) {
    if (e.is_base) continue;
    for (const HierElement& v : e.values) CHECK(v.level() < e.level());
  }
}

TEST_CASE("invariant: vartheta is a homomorphism onto the previous stage") {
  FiniteStructure z2 = make_zn(2);
  IndexFamily fam = uniform_family(2, 2);
  CumulativePower cp = build_level(z2, fam, 2, false);
  for (int s = 1; s <= 2; ++s) {
    const int lo = 0, hi = cp.stage_sizes[s];
    for (int j = 0; j < fam.size(s - 1); ++j)
      for (int ia = lo; ia < hi; ++ia)
        for (int ib = lo; ib < hi; ++ib) {
          const HierElement& a = cp.carrier[ia];
          const HierElement& b = cp.carrier[ib];
          auto r = apply_operation(cp, "add", {a, b});
          auto rhs = apply_operation(
              cp, "add", {vartheta(s, {s - 1, j}, a), vartheta(s, {s - 1, j}, b)});
          CHECK(vartheta(s, {s - 1, j}, *r) == *rhs);
        }
  }
}

TEST_CASE("invariant: total base gives total stages") {
  FiniteStructure z2 = make_zn(2);
  IndexFamily fam = uniform_family(2, 2);
  CHECK(materialize(build_level(z2, fam, 2, false), false).total());

  FiniteStructure gf3 = make_gf3_inv();
  IndexFamily fam1 = uniform_family(1, 2);
  CHECK_FALSE(materialize(build_level(gf3, fam1, 1, false), false).total());
}

TEST_CASE("literal transfer through vartheta_inverse") {
  // Exhaustively for |A| = 2, |I_0| = 2:
  //  - literals whose atom is not an equality transfer in both
  //    directions between the stage and the direct power;
  //  - negative equalities transfer from the power to the stage;
  //  - positive equalities transfer from the stage to the power.
  // The unrestricted both-ways claim is refuted below: the inverse map
  // collapses a base element with its constant function, so a negative
  // equality can hold in the stage (identity distinguishes levels) while
  // failing in the power.
  Signature sig;
  sig.add_function("f", 1);
  sig.add_relation("P", 1);
  sig.add_relation("le", 2);
  sig.add_constant("c");
  for (const FiniteStructure& S : all_structures(sig, 2, /*total=*/true)) {
    if (S.size() != 2) continue;
    IndexFamily fam = uniform_family(1, 2);
    CumulativePower cp = build_level(S, fam, 1, true);
    FiniteStructure P = direct_power(S, 2);
    PowerView pv{2, 2};
    auto to_power = [&](const HierElement& e) {
      HierElement f = vartheta_inverse(cp, e);
      std::vector<Elem> digits;
      for (const HierElement& v : f.values) digits.push_back(v.base);
      return pv.encode(digits);
    };
    std::vector<Formula> non_equality = {
        parse_formula("P(x)", sig),        parse_formula("!P(x)", sig),
        parse_formula("le(x,y)", sig),     parse_formula("!le(x,y)", sig),
        parse_formula("le(f(x), c)", sig), parse_formula("!le(f(x), y)", sig),
    };
    std::vector<Formula> negative_eq = {
        parse_formula("!(x = y)", sig),
        parse_formula("!(f(x) = y)", sig),
        parse_formula("!(x = c)", sig),
    };
    std::vector<Formula> positive_eq = {
        parse_formula("x = y", sig),
        parse_formula("f(x) = y", sig),
        parse_formula("x = c", sig),
    };
    for (const HierElement& a : cp.carrier)
      for (const HierElement& b : cp.carrier) {
        auto assignments = [&](const Formula& lit) {
          HierAssignment ha{{"x", a}};
          Assignment pa{{"x", to_power(a)}};
          if (free_variables(lit).count("y")) {
            ha["y"] = b;
            pa["y"] = to_power(b);
          }
          return std::make_pair(ha, pa);
        };
        for (const Formula& lit : non_equality) {
          auto [ha, pa] = assignments(lit);
          CHECK(satisfies_cumulative(cp, lit, ha) == satisfies(P, lit, pa));
        }
        for (const Formula& lit : negative_eq) {
          auto [ha, pa] = assignments(lit);
          if (satisfies(P, lit, pa)) CHECK(satisfies_cumulative(cp, lit, ha));
        }
        for (const Formula& lit : positive_eq) {
          auto [ha, pa] = assignments(lit);
          if (satisfies_cumulative(cp, lit, ha)) CHECK(satisfies(P, lit, pa));
        }
      }
  }

  // Frozen refutation of the unrestricted both-ways transfer: x = 0bar,
  // y = 0 makes !(x = y) true in the stage but false in the power.
  FiniteStructure z2 = make_zn(2);
  IndexFamily fam = uniform_family(1, 2);
  CumulativePower cp = build_level(z2, fam, 1, true);
  FiniteStructure P = direct_power(z2, 2);
  PowerView pv{2, 2};
  HierElement zero_bar = bar(HierElement::mk_base(0), 0, 2);
  Formula neq = parse_formula("!(x = y)", z2.sig);
  CHECK(satisfies_cumulative(cp, neq,
                             {{"x", zero_bar}, {"y", HierElement::mk_base(0)}}));
  CHECK_FALSE(satisfies(P, neq,
                        {{"x", pv.encode({0, 0})}, {"y", pv.encode({0, 0})}}));
}

TEST_CASE("pointwise truth of a DNF formula lifts to the stage") {
  // Lifting holds for prenex DNF formulas in which equality occurs only
  // negatively: stage-level truth of a relation atom is hereditary, and
  // identity implies pointwise equality. A positive equality breaks the
  // lifting (frozen refutation below): levels can disagree even when
  // every coordinate matches.
  FiniteStructure z2 = make_zn(2);
  IndexFamily fam = uniform_family(1, 2);
  CumulativePower cp = build_level(z2, fam, 1, true);

  Signature osig;
  osig.add_relation("le", 2);
  FiniteStructure order2 = make_structure(osig, 2, "order2");
  order2.rels["le"] = {{0, 0}, {0, 1}, {1, 1}};
  CumulativePower cpo = build_level(order2, fam, 1, true);
  // Single-cube matrices (one conjunction of literals under the prefix).
  std::vector<Formula> dnf_formulas = {
      parse_formula("le(x,y)", osig),
      parse_formula("le(x,y) & !le(y,x)", osig),
      parse_formula("exists u. le(x,u) & le(y,u)", osig),
      parse_formula("forall u. exists v. le(u,v) & !(v = x)", osig),
      parse_formula("exists u. !(u = x) & !(u = y)", osig),
  };
  for (const Formula& phi : dnf_formulas) {
    Formula d = to_pdnf(phi).to_formula();
    for (const HierElement& a : cpo.carrier)
      for (const HierElement& b : cpo.carrier) {
        bool everywhere = true;
        for (int j = 0; j < 2 && everywhere; ++j)
          everywhere = satisfies(order2, d,
                                 {{"x", vartheta(1, {0, j}, a).base},
                                  {"y", vartheta(1, {0, j}, b).base}});
        if (everywhere)
          CHECK(satisfies_cumulative(cpo, d, {{"x", a}, {"y", b}}));
      }
  }

  // Multi-cube lifting in the usable form: when a single cube holds at
  // every hereditary image, the whole disjunction lifts.
  {
    Formula two_cubes = parse_formula("le(x,y) & le(y,y) | le(y,x) & le(x,x)",
                                      osig);
    Formula d = to_pdnf(two_cubes).to_formula();
    std::vector<Formula> cubes = {parse_formula("le(x,y) & le(y,y)", osig),
                                  parse_formula("le(y,x) & le(x,x)", osig)};
    for (const HierElement& a : cpo.carrier)
      for (const HierElement& b : cpo.carrier) {
        bool some_cube_everywhere = false;
        for (const Formula& cube : cubes) {
          bool everywhere = true;
          for (int j = 0; j < 2 && everywhere; ++j)
            everywhere = satisfies(order2, cube,
                                   {{"x", vartheta(1, {0, j}, a).base},
                                    {"y", vartheta(1, {0, j}, b).base}});
          some_cube_everywhere = some_cube_everywhere || everywhere;
        }
        if (some_cube_everywhere)
          CHECK(satisfies_cumulative(cpo, d, {{"x", a}, {"y", b}}));
      }
  }

  // Frozen refutation 1, positive equality: every coordinate of x = 0bar
  // solves add(x,u) = y with y = 0 in the base, yet the hereditary sum
  // of a level-1 element is level-1 and never identical to the level-0
  // target.
  Formula witness = to_pdnf(parse_formula("exists u. add(x,u) = y", z2.sig))
                        .to_formula();
  HierElement zero_bar = bar(HierElement::mk_base(0), 0, 2);
  for (int j = 0; j < 2; ++j)
    CHECK(satisfies(z2, witness, {{"x", 0}, {"y", 0}}));
  CHECK_FALSE(satisfies_cumulative(
      cp, witness, {{"x", zero_bar}, {"y", HierElement::mk_base(0)}}));

  // Frozen refutation 2, two cubes true at different coordinates:
  // pointwise truth of the disjunction does not lift when no single
  // cube is uniformly true.
  {
    Formula d = to_pdnf(parse_formula("le(x,u) | le(u,x)", osig)).to_formula();
    HierElement a = HierElement::mk_func(0, {HierElement::mk_base(0),
                                             HierElement::mk_base(1)});
    HierElement u = HierElement::mk_func(0, {HierElement::mk_base(1),
                                             HierElement::mk_base(0)});
    for (int j = 0; j < 2; ++j)
      CHECK(satisfies(order2, d,
                      {{"x", vartheta(1, {0, j}, a).base},
                       {"u", vartheta(1, {0, j}, u).base}}));
    CHECK_FALSE(satisfies_cumulative(cpo, d, {{"x", a}, {"u", u}}));
  }
}

TEST_CASE("lift_embedding: identity, padding, base clause") {
  FiniteStructure z2 = make_zn(2);
  IndexFamily fam = uniform_family(1, 2);

  // Identity on Z2 with I_0 = J_0 lifts to the identity.
  auto lifted = lift_embedding(z2, z2, {0, 1}, fam, fam, {{0, 1}}, 1);
  CHECK(lifted.verified);
  for (const auto& [a, b] : lifted.map) CHECK(a == b);

  // |I_0| = 2 into |J_0| = 3 with the order injection and least fill:
  // <x,y> -> <e(x), e(y), e(x)>.
  IndexFamily fam3 = uniform_family(1, 3);
  auto lifted3 = lift_embedding(z2, z2, {0, 1}, fam, fam3, {{0, 1}}, 1);
  CHECK(lifted3.verified);
  auto B = [](int k) { return HierElement::mk_base(k); };
  HierElement xy = HierElement::mk_func(0, {B(0), B(1)});
  HierElement want = HierElement::mk_func(0, {B(0), B(1), B(0)});
  CHECK(lifted3.map.at(xy) == want);
  for (Elem a = 0; a < 2; ++a) CHECK(lifted3.map.at(B(a)) == B(a));

  CHECK_THROWS_WITH_AS(lift_embedding(z2, z2, {0, 0}, fam, fam, {{0, 1}}, 1),
                       doctest::Contains("not an embedding"), Error);
}

TEST_CASE("lift_embedding into a larger base structure") {
  FiniteStructure z2 = make_zn(2);
  // Z2 embeds into the 4-element structure with addition defined only on
  // {0,1} pairs (definedness must transfer exactly).
  Signature sig = z2.sig;
  FiniteStructure B4 = make_structure(sig, 4, "B4");
  for (Elem a = 0; a < 2; ++a)
    for (Elem b = 0; b < 2; ++b) B4.funcs["add"][{a, b}] = (a + b) % 2;
  B4.consts["zero"] = 0;
  IndexFamily fam = uniform_family(1, 2);
  auto lifted = lift_embedding(z2, B4, {0, 1}, fam, fam, {{0, 1}}, 1);
  CHECK(lifted.verified);
}
