#include "powlab/cumulative.hpp"

#include <algorithm>

namespace powlab {

void IndexFamily::validate() const {
  std::set<std::string> names;
  for (const auto& s : sets) {
    if (s.members.size() < 2)
      throw Error("index set " + s.name + " must have cardinality greater than 1");
    if (!names.insert(s.name).second)
      throw Error("index set name reused: " + s.name);
    std::set<std::string> members(s.members.begin(), s.members.end());
    if (members.size() != s.members.size())
      throw Error("duplicate member in index set " + s.name);
  }
}

IndexFamily uniform_family(int stages, int size) {
  IndexFamily fam;
  for (int m = 0; m < stages; ++m) {
    IndexFamily::Set s;
    s.name = "I" + std::to_string(m);
    for (int j = 0; j < size; ++j)
      s.members.push_back("j" + std::to_string(m) + "_" + std::to_string(j));
    fam.sets.push_back(std::move(s));
  }
  fam.validate();
  return fam;
}

HierElement HierElement::mk_base(Elem a) {
  HierElement e;
  e.is_base = true;
  e.base = a;
  return e;
}

HierElement HierElement::mk_func(int index_set, std::vector<HierElement> values) {
  HierElement e;
  e.is_base = false;
  e.index_set = index_set;
  e.values = std::move(values);
  return e;
}

int compare(const HierElement& a, const HierElement& b) {
  if (a.level() != b.level()) return a.level() < b.level() ? -1 : 1;
  if (a.is_base) return a.base == b.base ? 0 : (a.base < b.base ? -1 : 1);
  if (a.values.size() != b.values.size())
    return a.values.size() < b.values.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (int c = compare(a.values[i], b.values[i])) return c;
  return 0;
}
bool operator==(const HierElement& a, const HierElement& b) { return compare(a, b) == 0; }
bool operator!=(const HierElement& a, const HierElement& b) { return compare(a, b) != 0; }
bool operator<(const HierElement& a, const HierElement& b) { return compare(a, b) < 0; }

std::string to_string(const HierElement& e) {
  if (e.is_base) return std::to_string(e.base);
  std::string s = "[";
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    if (i) s += ",";
    s += to_string(e.values[i]);
  }
  return s + "]";
}

int level(const HierElement& e, const IndexFamily& fam) {
  if (e.is_base) {
    if (e.base < 0) throw Error("malformed hierarchy element: negative base id");
    return 0;
  }
  if (e.index_set < 0 || e.index_set >= fam.stages())
    throw Error("malformed hierarchy element: unknown index set");
  if (static_cast<int>(e.values.size()) != fam.size(e.index_set))
    throw Error("malformed hierarchy element: wrong domain size");
  for (const HierElement& v : e.values)
    if (level(v, fam) > e.index_set)
      throw Error("malformed hierarchy element: value level too high");
  return e.index_set + 1;
}

HierElement vartheta(int alpha, IndexElem j, const HierElement& e) {
  if (alpha < 1) throw Error("vartheta needs alpha >= 1");
  if (e.level() >= alpha && !e.is_base && e.index_set == j.set) {
    if (j.pos < 0 || j.pos >= static_cast<int>(e.values.size()))
      throw Error("index element outside the map's domain");
    return e.values[j.pos];
  }
  return e;
}

int CumulativePower::index_of(const HierElement& e) const {
  auto it = index.find(e);
  if (it == index.end()) throw Error("element not in the stage carrier");
  return it->second;
}

CumulativePower build_level(const FiniteStructure& S, const IndexFamily& fam,
                            int n, bool plus, std::size_t size_guard) {
  fam.validate();
  S.validate();
  if (n < 0 || n > fam.stages())
    throw Error("stage exceeds the declared index family");

  CumulativePower cp;
  cp.base = S;
  cp.fam = fam;
  cp.stage = n;
  cp.plus = plus;

  for (Elem a = 0; a < S.size(); ++a)
    cp.carrier.push_back(HierElement::mk_base(a));
  cp.stage_sizes.push_back(static_cast<int>(cp.carrier.size()));

  for (int m = 0; m < n; ++m) {
    const std::size_t prev = cp.carrier.size();
    const int isz = fam.size(m);
    double projected = 1;
    for (int i = 0; i < isz; ++i) projected *= static_cast<double>(prev);
    if (projected + prev > static_cast<double>(size_guard))
      throw Error("cumulative stage carrier exceeds size guard");
    // New level-(m+1) elements in lexicographic value-sequence order;
    // the previous carrier keeps its positions.
    std::vector<std::size_t> digits(isz, 0);
    for (;;) {
      std::vector<HierElement> vals;
      vals.reserve(isz);
      for (int i = 0; i < isz; ++i) vals.push_back(cp.carrier[digits[i]]);
      cp.carrier.push_back(HierElement::mk_func(m, std::move(vals)));
      int i = isz - 1;
      while (i >= 0 && digits[i] + 1 == prev) digits[i--] = 0;
      if (i < 0) break;
      ++digits[i];
    }
    cp.stage_sizes.push_back(static_cast<int>(cp.carrier.size()));
  }

  for (std::size_t i = 0; i < cp.carrier.size(); ++i)
    cp.index[cp.carrier[i]] = static_cast<int>(i);
  return cp;
}

std::optional<HierElement> apply_operation(const CumulativePower& cp,
                                           const std::string& F,
                                           const std::vector<HierElement>& args) {
  auto ar = cp.base.sig.functions.find(F);
  if (ar == cp.base.sig.functions.end()) throw Error("unknown function " + F);
  if (static_cast<int>(args.size()) != ar->second)
    throw Error("arity mismatch for " + F);

  int delta = 0;
  for (const HierElement& a : args) delta = std::max(delta, a.level());
  if (delta == 0) {
    std::vector<Elem> tuple;
    for (const HierElement& a : args) tuple.push_back(a.base);
    auto ft = cp.base.funcs.find(F);
    if (ft == cp.base.funcs.end()) return std::nullopt;
    auto it = ft->second.find(tuple);
    if (it == ft->second.end()) return std::nullopt;
    return HierElement::mk_base(it->second);
  }
  const int m = delta - 1;  // operate over I_{delta-1}
  std::vector<HierElement> vals;
  vals.reserve(cp.fam.size(m));
  for (int j = 0; j < cp.fam.size(m); ++j) {
    std::vector<HierElement> sub;
    sub.reserve(args.size());
    for (const HierElement& a : args) sub.push_back(vartheta(delta, {m, j}, a));
    auto v = apply_operation(cp, F, sub);
    if (!v) return std::nullopt;  // defined iff every coordinate is
    vals.push_back(std::move(*v));
  }
  return HierElement::mk_func(m, std::move(vals));
}

bool holds_relation(const CumulativePower& cp, const std::string& R,
                    const std::vector<HierElement>& args) {
  auto ar = cp.base.sig.relations.find(R);
  if (ar == cp.base.sig.relations.end()) throw Error("unknown relation " + R);
  if (static_cast<int>(args.size()) != ar->second)
    throw Error("arity mismatch for " + R);

  int delta = 0;
  for (const HierElement& a : args) delta = std::max(delta, a.level());
  if (delta == 0) {
    std::vector<Elem> tuple;
    for (const HierElement& a : args) tuple.push_back(a.base);
    auto it = cp.base.rels.find(R);
    return it != cp.base.rels.end() && it->second.count(tuple) > 0;
  }
  const int m = delta - 1;
  for (int j = 0; j < cp.fam.size(m); ++j) {
    std::vector<HierElement> sub;
    for (const HierElement& a : args) sub.push_back(vartheta(delta, {m, j}, a));
    if (!holds_relation(cp, R, sub)) return false;
  }
  return true;
}

bool constant_predicate(const CumulativePower& cp, const std::string& c,
                        const HierElement& e) {
  auto it = cp.base.consts.find(c);
  if (it == cp.base.consts.end()) throw Error("unknown constant " + c);
  if (e.is_base) return e.base == it->second;
  for (const HierElement& v : e.values)
    if (!constant_predicate(cp, c, v)) return false;
  return true;
}

HierElement hereditary_constant(const CumulativePower& cp, const std::string& c,
                                int n) {
  auto it = cp.base.consts.find(c);
  if (it == cp.base.consts.end()) throw Error("unknown constant " + c);
  if (n > cp.stage) throw Error("hereditary constant beyond the built stage");
  HierElement e = HierElement::mk_base(it->second);
  for (int m = 0; m < n; ++m)
    e = HierElement::mk_func(m, std::vector<HierElement>(cp.fam.size(m), e));
  return e;
}

HierElement vartheta_inverse(const CumulativePower& cp, const HierElement& e) {
  if (e.level() > 1) throw Error("vartheta_inverse expects level <= 1");
  if (cp.fam.stages() < 1) throw Error("no index set I_0 declared");
  if (e.level() == 1) return e;
  return HierElement::mk_func(0, std::vector<HierElement>(cp.fam.size(0), e));
}

FiniteStructure materialize(const CumulativePower& cp, bool with_constants) {
  FiniteStructure T;
  T.sig = cp.base.sig;
  if (!with_constants) T.sig.constants.clear();
  T.name = "F" + std::to_string(cp.stage) + (cp.plus ? "+" : "") + "(" +
           cp.base.name + ")";
  const int n = static_cast<int>(cp.carrier.size());
  for (const HierElement& e : cp.carrier) T.elems.push_back(to_string(e));

  for (const auto& [f, arity] : cp.base.sig.functions) {
    auto& table = T.funcs[f];
    std::vector<int> tuple(arity, 0);
    for (;;) {
      std::vector<HierElement> args;
      for (int i : tuple) args.push_back(cp.carrier[i]);
      if (auto v = apply_operation(cp, f, args))
        table[std::vector<Elem>(tuple.begin(), tuple.end())] = cp.index_of(*v);
      int i = arity - 1;
      while (i >= 0 && tuple[i] == n - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }
  for (const auto& [r, arity] : cp.base.sig.relations) {
    auto& rel = T.rels[r];
    std::vector<int> tuple(arity, 0);
    for (;;) {
      std::vector<HierElement> args;
      for (int i : tuple) args.push_back(cp.carrier[i]);
      if (holds_relation(cp, r, args))
        rel.insert(std::vector<Elem>(tuple.begin(), tuple.end()));
      int i = arity - 1;
      while (i >= 0 && tuple[i] == n - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }
  if (with_constants)
    for (const auto& c : cp.base.sig.constants)
      T.consts[c] = cp.index_of(hereditary_constant(cp, c, cp.stage));
  return T;
}

bool satisfies_cumulative(const CumulativePower& cp, const Formula& f,
                          const HierAssignment& a) {
  if (!cp.plus && mentions_constant(f))
    throw Error("constants are uninterpreted at non-plus stages");
  FiniteStructure T = materialize(cp, cp.plus);
  Assignment b;
  for (const auto& [v, e] : a) b[v] = cp.index_of(e);
  return satisfies(T, f, b);
}

bool satisfies_cumulative(const CumulativePower& cp, const Formula& f) {
  return satisfies_cumulative(cp, f, {});
}

LiftedEmbedding lift_embedding(const FiniteStructure& A, const FiniteStructure& B,
                               const std::vector<Elem>& e, const IndexFamily& famA,
                               const IndexFamily& famB,
                               const std::vector<std::vector<int>>& u, int n,
                               std::size_t size_guard) {
  if (!is_embedding(A, B, e)) throw Error("lift_embedding: e is not an embedding");
  if (static_cast<int>(u.size()) < n)
    throw Error("lift_embedding: missing stage injections");
  for (int m = 0; m < n; ++m) {
    if (static_cast<int>(u[m].size()) != famA.size(m))
      throw Error("lift_embedding: u_" + std::to_string(m) + " has wrong domain");
    std::set<int> image;
    for (int v : u[m]) {
      if (v < 0 || v >= famB.size(m))
        throw Error("lift_embedding: u_" + std::to_string(m) + " out of range");
      if (!image.insert(v).second)
        throw Error("lift_embedding: u_" + std::to_string(m) + " not injective");
    }
  }

  CumulativePower cpA = build_level(A, famA, n, false, size_guard);
  CumulativePower cpB = build_level(B, famB, n, false, size_guard);

  LiftedEmbedding out;
  // e_0 on base elements.
  for (Elem a = 0; a < A.size(); ++a)
    out.map[HierElement::mk_base(a)] = HierElement::mk_base(e[a]);
  // Stage by stage: the lift restricted to a lower stage is the lower
  // lift, so only the new top-level elements need images.
  for (int m = 0; m < n; ++m) {
    const int fill = *std::min_element(u[m].begin(), u[m].end());
    std::vector<int> u_inv(famB.size(m), -1);
    for (int i = 0; i < famA.size(m); ++i) u_inv[u[m][i]] = i;
    const int lo = cpA.stage_sizes[m], hi = cpA.stage_sizes[m + 1];
    for (int idx = lo; idx < hi; ++idx) {
      const HierElement& a = cpA.carrier[idx];
      std::vector<HierElement> vals;
      vals.reserve(famB.size(m));
      for (int j = 0; j < famB.size(m); ++j) {
        int src = u_inv[j] >= 0 ? u_inv[j] : u_inv[fill];
        vals.push_back(out.map.at(a.values[src]));
      }
      out.map[a] = HierElement::mk_func(m, std::move(vals));
    }
  }

  // Exhaustive verification: injectivity, operations (with definedness),
  // relations both ways, and the constant predicates.
  out.verified = true;
  std::set<HierElement> seen;
  for (const auto& [x, y] : out.map)
    if (!seen.insert(y).second) out.verified = false;
  for (const auto& [f, arity] : A.sig.functions) {
    std::vector<int> tuple(arity, 0);
    const int ncar = static_cast<int>(cpA.carrier.size());
    for (;;) {
      std::vector<HierElement> args, imgs;
      for (int i : tuple) {
        args.push_back(cpA.carrier[i]);
        imgs.push_back(out.map.at(cpA.carrier[i]));
      }
      auto va = apply_operation(cpA, f, args);
      auto vb = apply_operation(cpB, f, imgs);
      if (va.has_value() != vb.has_value() ||
          (va && out.map.at(*va) != *vb))
        out.verified = false;
      int i = arity - 1;
      while (i >= 0 && tuple[i] == ncar - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }
  for (const auto& [r, arity] : A.sig.relations) {
    std::vector<int> tuple(arity, 0);
    const int ncar = static_cast<int>(cpA.carrier.size());
    for (;;) {
      std::vector<HierElement> args, imgs;
      for (int i : tuple) {
        args.push_back(cpA.carrier[i]);
        imgs.push_back(out.map.at(cpA.carrier[i]));
      }
      if (holds_relation(cpA, r, args) != holds_relation(cpB, r, imgs))
        out.verified = false;
      int i = arity - 1;
      while (i >= 0 && tuple[i] == ncar - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }
  for (const auto& c : A.sig.constants)
    for (const HierElement& a : cpA.carrier)
      if (constant_predicate(cpA, c, a) !=
          constant_predicate(cpB, c, out.map.at(a)))
        out.verified = false;
  return out;
}

}  // namespace powlab
