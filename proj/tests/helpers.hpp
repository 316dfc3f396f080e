#pragma once

#include "powlab/model.hpp"

namespace powlab::testutil {

// Cyclic group of order n: binary add, constant zero = 0.
inline FiniteStructure make_zn(int n) {
  Signature sig;
  sig.add_function("add", 2);
  sig.add_constant("zero");
  FiniteStructure S = make_structure(sig, n, "Z" + std::to_string(n));
  auto& table = S.funcs["add"];
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b) table[{a, b}] = (a + b) % n;
  S.consts["zero"] = 0;
  return S;
}

// GF(3) with total add/mul and a partial unary inverse (inv(0) absent).
inline FiniteStructure make_gf3_inv() {
  Signature sig;
  sig.add_function("add", 2);
  sig.add_function("mul", 2);
  sig.add_function("inv", 1);
  FiniteStructure S = make_structure(sig, 3, "GF3");
  for (Elem a = 0; a < 3; ++a)
    for (Elem b = 0; b < 3; ++b) {
      S.funcs["add"][{a, b}] = (a + b) % 3;
      S.funcs["mul"][{a, b}] = (a * b) % 3;
    }
  S.funcs["inv"][{1}] = 1;
  S.funcs["inv"][{2}] = 2;
  return S;
}

// GF(2) field: add and mul, no constants (tau examples).
inline FiniteStructure make_gf2() {
  Signature sig;
  sig.add_function("add", 2);
  sig.add_function("mul", 2);
  FiniteStructure S = make_structure(sig, 2, "GF2");
  for (Elem a = 0; a < 2; ++a)
    for (Elem b = 0; b < 2; ++b) {
      S.funcs["add"][{a, b}] = a ^ b;
      S.funcs["mul"][{a, b}] = a & b;
    }
  return S;
}

// n-chain with reflexive le.
inline FiniteStructure make_chain(int n) {
  Signature sig;
  sig.add_relation("le", 2);
  FiniteStructure S = make_structure(sig, n, "chain" + std::to_string(n));
  for (Elem a = 0; a < n; ++a)
    for (Elem b = a; b < n; ++b) S.rels["le"].insert({a, b});
  return S;
}

// Two-element structure with f constantly 0 (the collapsible pattern).
inline FiniteStructure make_const_f() {
  Signature sig;
  sig.add_function("f", 1);
  FiniteStructure S = make_structure(sig, 2, "constf");
  S.funcs["f"][{0}] = 0;
  S.funcs["f"][{1}] = 0;
  return S;
}

}  // namespace powlab::testutil
