#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "powlab/io.hpp"
#include "powlab/model.hpp"

using namespace powlab;
using namespace powlab::testutil;

TEST_CASE("eval_term on tables, partiality, composition") {
  FiniteStructure z2 = make_zn(2);
  CHECK(*eval_term(z2, parse_term("add(x,x)", z2.sig), {{"x", 1}}) == 0);

  FiniteStructure gf3 = make_gf3_inv();
  CHECK_FALSE(eval_term(gf3, parse_term("inv(x)", gf3.sig), {{"x", 0}}).has_value());
  CHECK(*eval_term(gf3, parse_term("inv(x)", gf3.sig), {{"x", 2}}) == 2);

  CHECK(*eval_term(z2, parse_term("add(x, add(x,x))", z2.sig), {{"x", 1}}) == 1);
  CHECK_THROWS_AS(eval_term(z2, parse_term("add(x,y)", z2.sig), {{"x", 0}}), Error);
}

TEST_CASE("satisfies: Tarskian truth, undefined atoms are false") {
  FiniteStructure z2 = make_zn(2);
  CHECK(satisfies(z2, parse_formula("forall x. exists z. add(x,z) = zero", z2.sig)));
  CHECK_FALSE(satisfies(z2, parse_formula("exists x. forall y. x = y", z2.sig)));

  FiniteStructure one = make_structure(Signature{}, 1, "one");
  CHECK(satisfies(one, parse_formula("exists x. forall y. x = y", one.sig)));

  FiniteStructure gf3 = make_gf3_inv();
  // inv(0) undefined: the atom is false and its negation true.
  CHECK_FALSE(satisfies(gf3, parse_formula("inv(x) = inv(x)", gf3.sig), {{"x", 0}}));
  CHECK(satisfies(gf3, parse_formula("!(inv(x) = inv(x))", gf3.sig), {{"x", 0}}));
  CHECK_FALSE(satisfies(gf3, parse_formula("forall x. exists y. inv(x) = y", gf3.sig)));
}

TEST_CASE("direct_power: sizes, pointwise tables, Horn transfer") {
  FiniteStructure z2 = make_zn(2);
  FiniteStructure p = direct_power(z2, 2);
  CHECK(p.size() == 4);

  // <0,1> + <1,1> = <1,0> under the value-sequence encoding.
  PowerView pv{2, 2};
  Elem a = pv.encode({0, 1}), b = pv.encode({1, 1});
  CHECK(p.funcs.at("add").at({a, b}) == pv.encode({1, 0}));

  Formula horn = parse_formula("forall x. exists z. add(x,z) = zero", z2.sig);
  for (int isz = 2; isz <= 3; ++isz)
    CHECK(satisfies(direct_power(z2, isz), horn));

  CHECK_THROWS_WITH_AS(direct_power(z2, 30), doctest::Contains("size guard"), Error);
}

TEST_CASE("direct power of a partial structure: definedness is pointwise") {
  FiniteStructure gf3 = make_gf3_inv();
  FiniteStructure p = direct_power(gf3, 2);
  PowerView pv{3, 2};
  CHECK(p.funcs.at("inv").count({pv.encode({1, 2})}) == 1);
  CHECK(p.funcs.at("inv").count({pv.encode({0, 2})}) == 0);
}

TEST_CASE("projection to a coordinate is a surjective homomorphism (total case)") {
  for (const FiniteStructure& S : {make_zn(2), make_zn(3)}) {
    for (int isz = 2; isz <= 3; ++isz) {
      FiniteStructure P = direct_power(S, isz);
      PowerView pv{S.size(), isz};
      for (int coord = 0; coord < isz; ++coord) {
        std::vector<bool> hit(S.size(), false);
        for (Elem x = 0; x < P.size(); ++x) hit[pv.decode(x)[coord]] = true;
        CHECK(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
        for (Elem x = 0; x < P.size(); ++x)
          for (Elem y = 0; y < P.size(); ++y) {
            Elem z = P.funcs.at("add").at({x, y});
            Elem want = S.funcs.at("add").at(
                {pv.decode(x)[coord], pv.decode(y)[coord]});
            CHECK(pv.decode(z)[coord] == want);
          }
      }
    }
  }
}

TEST_CASE("ultrapower with principal ultrafilter is isomorphic to the base") {
  for (int n = 1; n <= 3; ++n) {
    FiniteStructure S = make_zn(n);
    for (int isz = 1; isz <= 3; ++isz) {
      for (const FilterFamily& U : all_ultrafilters(isz)) {
        QuotientStructure Q = ultrapower(S, isz, U);
        CHECK(Q.class_count() == S.size());
        // class-of-f -> f(k) is an isomorphism onto S.
        PowerView pv{S.size(), isz};
        std::vector<Elem> map(Q.class_count());
        for (int cls = 0; cls < Q.class_count(); ++cls)
          map[cls] = pv.decode(Q.rep(cls))[*U.principal_at];
        CHECK(is_isomorphism(Q.quotient, S, map));
      }
    }
  }
}

TEST_CASE("ultrapower examples: principal collapse and |I| = 1") {
  FiniteStructure z2 = make_zn(2);
  FilterFamily U = principal_ultrafilter(2, 0);
  QuotientStructure Q = ultrapower(z2, 2, U);
  CHECK(Q.class_count() == 2);
  PowerView pv{2, 2};
  // Class map is f -> f(i0).
  for (Elem f = 0; f < 4; ++f)
    CHECK(Q.class_of[f] == Q.class_of[pv.encode({pv.decode(f)[0], 0})]);

  QuotientStructure Q1 = ultrapower(z2, 1, principal_ultrafilter(1, 0));
  CHECK(find_isomorphism(Q1.quotient, z2).has_value());
}

TEST_CASE("assignment-level Los transfer on plain ultrapowers") {
  FiniteStructure z2 = make_zn(2);
  Signature sig = z2.sig;
  std::vector<Formula> formulas = {
      parse_formula("exists z. add(x,z) = y", sig),
      parse_formula("forall z. add(x,z) = y | !(add(z,x) = y)", sig),
      parse_formula("add(x,y) = zero", sig),
      parse_formula("exists u. forall v. add(u,v) = x | add(y,v) = v", sig),
  };
  for (int isz = 2; isz <= 3; ++isz) {
    PowerView pv{2, isz};
    for (const FilterFamily& U : all_ultrafilters(isz)) {
      QuotientStructure Q = ultrapower(z2, isz, U);
      for (const Formula& phi : formulas)
        for (Elem f = 0; f < pv.carrier_size(); ++f)
          for (Elem g = 0; g < pv.carrier_size(); ++g) {
            bool lhs = satisfies(Q.quotient, phi,
                                 {{"x", Q.class_of[f]}, {"y", Q.class_of[g]}});
            Mask set = 0;
            for (int j = 0; j < isz; ++j)
              if (satisfies(z2, phi,
                            {{"x", pv.decode(f)[j]}, {"y", pv.decode(g)[j]}}))
                set |= Mask(1) << j;
            CHECK(lhs == U.contains(set));
          }
    }
  }
}

TEST_CASE("enumerate_structures counts") {
  Signature s1;
  s1.add_relation("P", 1);
  CHECK(all_structures(s1, 1, false).size() == 2);

  Signature s2;
  s2.add_constant("c");
  auto v2 = all_structures(s2, 2, false);
  int size2 = 0;
  for (const auto& S : v2) size2 += S.size() == 2;
  CHECK(size2 == 2);

  Signature s3;
  s3.add_function("f", 1);
  auto v3 = all_structures(s3, 2, true);
  int size2t = 0;
  for (const auto& S : v3) size2t += S.size() == 2;
  CHECK(size2t == 4);

  // Determinism: two runs produce identical streams.
  auto a = all_structures(s3, 2, false);
  auto b = all_structures(s3, 2, false);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(render_structure(a[i]) == render_structure(b[i]));
}

TEST_CASE("find_embedding / find_isomorphism") {
  FiniteStructure z2 = make_zn(2);
  auto id = find_isomorphism(z2, z2);
  REQUIRE(id.has_value());
  CHECK(is_isomorphism(z2, z2, *id));

  FiniteStructure one = make_structure(Signature{}, 1, "one");
  FiniteStructure bare2 = make_structure(Signature{}, 2, "bare2");
  CHECK_FALSE(find_embedding(bare2, one).has_value());

  FiniteStructure c2 = make_chain(2), c3 = make_chain(3);
  auto emb = find_embedding(c2, c3);
  REQUIRE(emb.has_value());
  CHECK(is_embedding(c2, c3, *emb));
  CHECK((*emb)[0] < (*emb)[1]);

  CHECK_FALSE(find_isomorphism(c2, c3).has_value());
}

TEST_CASE("embedding respects partial definedness in both directions") {
  Signature sig;
  sig.add_function("f", 1);
  FiniteStructure A = make_structure(sig, 1, "A");  // f undefined at 0
  FiniteStructure B = make_structure(sig, 1, "B");
  B.funcs["f"][{0}] = 0;  // f total
  CHECK_FALSE(find_embedding(A, B).has_value());
  CHECK_FALSE(find_embedding(B, A).has_value());
  CHECK(find_embedding(A, A).has_value());
}

TEST_CASE("bounded_entailment") {
  Signature sig;
  sig.add_relation("P", 1);
  sig.add_constant("c0");
  auto eqxy = parse_formula("x = y", sig);
  auto eqyx = parse_formula("y = x", sig);
  CHECK_FALSE(bounded_entailment(eqxy, eqyx, sig, 3).refuted);

  auto px = parse_formula("P(x)", sig);
  auto r = bounded_entailment(eqxy, px, sig, 3);
  CHECK(r.refuted);
  REQUIRE(r.witness_structure.has_value());
  CHECK(r.witness_structure->size() == 1);
  CHECK(r.witness_structure->rels.at("P").empty());

  auto xc = parse_formula("x = c0", sig);
  auto disj = parse_formula("x = c0 | P(x)", sig);
  CHECK_FALSE(bounded_entailment(xc, disj, sig, 3).refuted);
}

TEST_CASE("bounded_entailment never refutes propositional tautology instances") {
  Signature sig;
  sig.add_relation("P", 1);
  sig.add_function("f", 1);
  std::vector<std::pair<std::string, std::string>> instances = {
      {"P(x)", "P(x)"},
      {"P(f(x)) & !P(f(x))", "f(x) = y"},  // ex falso
      {"P(x)", "P(x) | f(x) = f(y)"},      // weakening
      {"P(x) & P(y)", "P(y) & P(x)"},      // commutation
      {"f(x) = y | !(f(x) = y)", "f(x) = y | !(f(x) = y)"},
  };
  for (const auto& [p, c] : instances)
    CHECK_FALSE(bounded_entailment(parse_formula(p, sig), parse_formula(c, sig),
                                   sig, 3)
                    .refuted);

  // Generator form: random instances of valid propositional skeletons,
  // with random quantifier-free formulas substituted for the letters.
  std::mt19937 rng(991);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto random_atomish = [&]() {
    std::vector<std::string> vars{"x", "y"};
    auto term = [&]() {
      if (pick(2)) return Term::var(vars[pick(2)]);
      return Term::app("f", {Term::var(vars[pick(2)])});
    };
    Formula a =
        pick(2) ? Formula::eq(term(), term()) : Formula::rel("P", {term()});
    return pick(2) ? Formula::lnot(a) : a;
  };
  for (int trial = 0; trial < 40; ++trial) {
    Formula A = random_atomish(), B = random_atomish();
    // A & B |- A; A |- A | B; A -> B, A |- B hold propositionally.
    CHECK_FALSE(bounded_entailment(Formula::land(A, B), A, sig, 2).refuted);
    CHECK_FALSE(bounded_entailment(A, Formula::lor(A, B), sig, 2).refuted);
    CHECK_FALSE(bounded_entailment(Formula::land(Formula::limp(A, B), A), B,
                                   sig, 2)
                    .refuted);
  }
}

TEST_CASE("normal forms preserve satisfaction (bounded-equivalence oracle)") {
  Signature sig;
  sig.add_function("add", 2);
  sig.add_relation("P", 1);
  sig.add_constant("c0");

  std::mt19937 rng(7);
  std::vector<std::string> vars{"x", "y"};
  std::function<Formula(int)> gen = [&](int depth) -> Formula {
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    auto term = [&]() {
      int k = pick(3);
      if (k == 0) return Term::var(vars[pick(2)]);
      if (k == 1) return Term::cons("c0");
      return Term::app("add", {Term::var(vars[pick(2)]), Term::var(vars[pick(2)])});
    };
    if (depth == 0) {
      if (pick(2)) return Formula::eq(term(), term());
      return Formula::rel("P", {term()});
    }
    switch (pick(6)) {
      case 0: return Formula::lnot(gen(depth - 1));
      case 1: return Formula::land(gen(depth - 1), gen(depth - 1));
      case 2: return Formula::lor(gen(depth - 1), gen(depth - 1));
      case 3: return Formula::limp(gen(depth - 1), gen(depth - 1));
      case 4: return Formula::forall(vars[pick(2)], gen(depth - 1));
      default: return Formula::exists(vars[pick(2)], gen(depth - 1));
    }
  };

  auto structures = all_structures(sig, 2, /*total=*/false);
  // Thin the structure grid to keep the sweep brisk but varied.
  std::vector<FiniteStructure> grid;
  for (std::size_t i = 0; i < structures.size(); i += 7)
    grid.push_back(structures[i]);

  for (int trial = 0; trial < 60; ++trial) {
    Formula f = gen(2);
    PrenexForm cnf = to_pcnf(f), dnf = to_pdnf(f);
    Formula fc = cnf.to_formula(), fd = dnf.to_formula();
    auto free = free_variables(f);
    for (const FiniteStructure& S : grid) {
      std::vector<std::string> names(free.begin(), free.end());
      std::vector<Elem> vals(names.size(), 0);
      for (;;) {
        Assignment a;
        for (std::size_t i = 0; i < names.size(); ++i) a[names[i]] = vals[i];
        bool want = satisfies(S, f, a);
        CHECK(want == satisfies(S, fc, a));
        CHECK(want == satisfies(S, fd, a));
        int i = static_cast<int>(vals.size()) - 1;
        while (i >= 0 && vals[i] == S.size() - 1) vals[i--] = 0;
        if (i < 0) break;
        ++vals[i];
      }
    }
  }
}

TEST_CASE("check_preserved reports both sides") {
  FiniteStructure z2 = make_zn(2);
  Formula horn = parse_formula("forall x. exists z. add(x,z) = zero", z2.sig);
  auto rep = check_preserved(z2, horn, direct_power(z2, 2));
  CHECK(rep.holds_in_source);
  CHECK(rep.holds_in_target);
}
