#include "powlab/model.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace powlab {

void FiniteStructure::validate() const {
  if (elems.empty()) throw Error("carrier must be nonempty");
  auto in_range = [this](Elem e) { return e >= 0 && e < size(); };
  for (const auto& [f, arity] : sig.functions) {
    auto it = funcs.find(f);
    if (it == funcs.end()) continue;
    for (const auto& [tuple, value] : it->second) {
      if (static_cast<int>(tuple.size()) != arity)
        throw Error("table arity mismatch for " + f);
      for (Elem e : tuple)
        if (!in_range(e)) throw Error("table entry outside carrier in " + f);
      if (!in_range(value)) throw Error("table value outside carrier in " + f);
    }
  }
  for (const auto& [r, arity] : sig.relations) {
    auto it = rels.find(r);
    if (it == rels.end()) continue;
    for (const auto& tuple : it->second) {
      if (static_cast<int>(tuple.size()) != arity)
        throw Error("relation arity mismatch for " + r);
      for (Elem e : tuple)
        if (!in_range(e)) throw Error("relation tuple outside carrier in " + r);
    }
  }
  for (const auto& c : sig.constants) {
    auto it = consts.find(c);
    if (it == consts.end()) throw Error("constant " + c + " uninterpreted");
    if (!in_range(it->second)) throw Error("constant " + c + " outside carrier");
  }
}

bool FiniteStructure::total() const {
  for (const auto& [f, arity] : sig.functions) {
    std::size_t want = 1;
    for (int i = 0; i < arity; ++i) want *= elems.size();
    auto it = funcs.find(f);
    if (it == funcs.end() || it->second.size() != want) return false;
  }
  return true;
}

FiniteStructure make_structure(Signature sig, int n, std::string name) {
  FiniteStructure S;
  S.sig = std::move(sig);
  S.name = std::move(name);
  for (int i = 0; i < n; ++i) S.elems.push_back(std::to_string(i));
  return S;
}

std::optional<Elem> eval_term(const FiniteStructure& S, const Term& t,
                              const Assignment& a) {
  switch (t.kind) {
    case Term::Kind::Var: {
      auto it = a.find(t.name);
      if (it == a.end()) throw Error("unbound variable " + t.name);
      return it->second;
    }
    case Term::Kind::Const: {
      auto it = S.consts.find(t.name);
      if (it == S.consts.end()) throw Error("uninterpreted constant " + t.name);
      return it->second;
    }
    case Term::Kind::App: {
      std::vector<Elem> args;
      args.reserve(t.args.size());
      for (const Term& sub : t.args) {
        auto v = eval_term(S, sub, a);
        if (!v) return std::nullopt;  // UNDEFINED propagates strictly
        args.push_back(*v);
      }
      auto ft = S.funcs.find(t.name);
      if (ft == S.funcs.end()) return std::nullopt;
      auto e = ft->second.find(args);
      if (e == ft->second.end()) return std::nullopt;
      return e->second;
    }
  }
  return std::nullopt;
}

bool satisfies(const FiniteStructure& S, const Formula& f, const Assignment& a) {
  switch (f.kind) {
    case Formula::Kind::Equal: {
      auto l = eval_term(S, f.terms[0], a);
      auto r = eval_term(S, f.terms[1], a);
      return l && r && *l == *r;
    }
    case Formula::Kind::Rel: {
      std::vector<Elem> args;
      for (const Term& t : f.terms) {
        auto v = eval_term(S, t, a);
        if (!v) return false;
        args.push_back(*v);
      }
      auto it = S.rels.find(f.name);
      return it != S.rels.end() && it->second.count(args) > 0;
    }
    case Formula::Kind::Not:
      return !satisfies(S, f.kids[0], a);
    case Formula::Kind::And:
      return satisfies(S, f.kids[0], a) && satisfies(S, f.kids[1], a);
    case Formula::Kind::Or:
      return satisfies(S, f.kids[0], a) || satisfies(S, f.kids[1], a);
    case Formula::Kind::Implies:
      return !satisfies(S, f.kids[0], a) || satisfies(S, f.kids[1], a);
    case Formula::Kind::ForAll: {
      Assignment b = a;
      for (Elem e = 0; e < S.size(); ++e) {
        b[f.name] = e;
        if (!satisfies(S, f.kids[0], b)) return false;
      }
      return true;
    }
    case Formula::Kind::Exists: {
      Assignment b = a;
      for (Elem e = 0; e < S.size(); ++e) {
        b[f.name] = e;
        if (satisfies(S, f.kids[0], b)) return true;
      }
      return false;
    }
  }
  throw Error("internal: bad formula kind");
}

bool satisfies(const FiniteStructure& S, const Formula& f) {
  if (!free_variables(f).empty())
    throw Error("sentence expected; formula has free variables");
  return satisfies(S, f, {});
}

// ---------------------------------------------------------------------------
// Powers and products

std::vector<Elem> PowerView::decode(Elem id) const {
  std::vector<Elem> d(index_size);
  for (int i = index_size - 1; i >= 0; --i) {
    d[i] = id % base_size;
    id /= base_size;
  }
  return d;
}

Elem PowerView::encode(const std::vector<Elem>& digits) const {
  Elem id = 0;
  for (Elem d : digits) id = id * base_size + d;
  return id;
}

Elem PowerView::carrier_size() const {
  Elem n = 1;
  for (int i = 0; i < index_size; ++i) n *= base_size;
  return n;
}

FiniteStructure direct_power(const FiniteStructure& S, int index_size,
                             std::size_t size_guard) {
  if (S.size() < 1 || index_size < 1)
    throw Error("direct power needs nonempty carrier and index set");
  double projected = 1;
  for (int i = 0; i < index_size; ++i) projected *= S.size();
  if (projected > static_cast<double>(size_guard))
    throw Error("direct power carrier exceeds size guard");
  PowerView pv{S.size(), index_size};
  const Elem n = pv.carrier_size();

  FiniteStructure P;
  P.sig = S.sig;
  P.name = S.name + "^" + std::to_string(index_size);
  for (Elem id = 0; id < n; ++id) {
    std::string nm = "<";
    auto d = pv.decode(id);
    for (int i = 0; i < index_size; ++i) {
      if (i) nm += ",";
      nm += S.elems[d[i]];
    }
    P.elems.push_back(nm + ">");
  }

  for (const auto& [f, arity] : S.sig.functions) {
    auto st = S.funcs.find(f);
    auto& table = P.funcs[f];
    std::vector<Elem> tuple(arity, 0);
    for (;;) {
      std::vector<std::vector<Elem>> digits;
      for (Elem t : tuple) digits.push_back(pv.decode(t));
      std::vector<Elem> out(index_size);
      bool defined = st != S.funcs.end();
      for (int j = 0; j < index_size && defined; ++j) {
        std::vector<Elem> args(arity);
        for (int p = 0; p < arity; ++p) args[p] = digits[p][j];
        auto e = st->second.find(args);
        if (e == st->second.end())
          defined = false;  // defined iff defined at every coordinate
        else
          out[j] = e->second;
      }
      if (defined) table[tuple] = pv.encode(out);
      int i = arity - 1;
      while (i >= 0 && tuple[i] == n - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }

  for (const auto& [r, arity] : S.sig.relations) {
    auto sr = S.rels.find(r);
    auto& rel = P.rels[r];
    if (sr == S.rels.end()) continue;
    std::vector<Elem> tuple(arity, 0);
    for (;;) {
      std::vector<std::vector<Elem>> digits;
      for (Elem t : tuple) digits.push_back(pv.decode(t));
      bool holds = true;
      for (int j = 0; j < index_size && holds; ++j) {
        std::vector<Elem> args(arity);
        for (int p = 0; p < arity; ++p) args[p] = digits[p][j];
        holds = sr->second.count(args) > 0;
      }
      if (holds) rel.insert(tuple);
      int i = arity - 1;
      while (i >= 0 && tuple[i] == n - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }

  for (const auto& [c, e] : S.consts) {
    std::vector<Elem> digits(index_size, e);
    P.consts[c] = pv.encode(digits);
  }
  return P;
}

FiniteStructure direct_product(const FiniteStructure& A, const FiniteStructure& B) {
  FiniteStructure P;
  P.sig = A.sig;
  P.name = A.name + "*" + B.name;
  const int nb = B.size();
  auto pair_id = [nb](Elem a, Elem b) { return a * nb + b; };
  for (Elem a = 0; a < A.size(); ++a)
    for (Elem b = 0; b < nb; ++b)
      P.elems.push_back("<" + A.elems[a] + "," + B.elems[b] + ">");

  for (const auto& [f, arity] : A.sig.functions) {
    auto fa = A.funcs.find(f);
    auto fb = B.funcs.find(f);
    if (fa == A.funcs.end() || fb == B.funcs.end()) continue;
    auto& table = P.funcs[f];
    for (const auto& [ta, va] : fa->second)
      for (const auto& [tb, vb] : fb->second) {
        std::vector<Elem> tuple(arity);
        for (int i = 0; i < arity; ++i) tuple[i] = pair_id(ta[i], tb[i]);
        table[tuple] = pair_id(va, vb);
      }
  }
  for (const auto& [r, arity] : A.sig.relations) {
    auto ra = A.rels.find(r);
    auto rb = B.rels.find(r);
    if (ra == A.rels.end() || rb == B.rels.end()) continue;
    auto& rel = P.rels[r];
    for (const auto& ta : ra->second)
      for (const auto& tb : rb->second) {
        std::vector<Elem> tuple(arity);
        for (int i = 0; i < arity; ++i) tuple[i] = pair_id(ta[i], tb[i]);
        rel.insert(tuple);
      }
  }
  for (const auto& [c, ea] : A.consts) P.consts[c] = pair_id(ea, B.consts.at(c));
  return P;
}

// ---------------------------------------------------------------------------
// Quotients

QuotientStructure make_quotient(const FiniteStructure& S,
                                const std::function<bool(Elem, Elem)>& equiv,
                                std::string provenance) {
  const int n = S.size();
  // Materialize the relation once, then verify the equivalence laws
  // exhaustively on the matrix.
  std::vector<char> rel(static_cast<std::size_t>(n) * n);
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b) rel[a * n + b] = equiv(a, b);
  for (Elem a = 0; a < n; ++a) {
    if (!rel[a * n + a]) throw Error("quotient relation is not reflexive");
    for (Elem b = 0; b < n; ++b)
      if (rel[a * n + b] != rel[b * n + a])
        throw Error("quotient relation is not symmetric");
  }
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b) {
      if (!rel[a * n + b]) continue;
      for (Elem c = 0; c < n; ++c)
        if (rel[b * n + c] && !rel[a * n + c])
          throw Error("quotient relation is not transitive");
    }

  QuotientStructure Q;
  Q.provenance = std::move(provenance);
  Q.class_of.assign(n, -1);
  for (Elem a = 0; a < n; ++a) {
    if (Q.class_of[a] != -1) continue;
    int cls = Q.class_count();
    Q.classes.push_back({});
    for (Elem b = a; b < n; ++b)
      if (Q.class_of[b] == -1 && rel[a * n + b]) {
        Q.class_of[b] = cls;
        Q.classes[cls].push_back(b);
      }
  }

  FiniteStructure& T = Q.quotient;
  T.sig = S.sig;
  T.name = S.name + "/~";
  for (int c = 0; c < Q.class_count(); ++c)
    T.elems.push_back("[" + S.elems[Q.rep(c)] + "]");

  const int m = Q.class_count();
  for (const auto& [f, arity] : S.sig.functions) {
    auto st = S.funcs.find(f);
    auto& table = T.funcs[f];
    std::vector<int> tuple(arity, 0);
    for (;;) {
      // Existential clause over representatives; all defined
      // representative combinations must land in one class.
      std::optional<int> result;
      std::vector<std::size_t> pick(arity, 0);
      for (;;) {
        std::vector<Elem> args(arity);
        for (int i = 0; i < arity; ++i) args[i] = Q.classes[tuple[i]][pick[i]];
        if (st != S.funcs.end()) {
          auto e = st->second.find(args);
          if (e != st->second.end()) {
            int cls = Q.class_of[e->second];
            if (result && *result != cls)
              throw Error("quotient function " + f +
                          " is not well-defined (representative disagreement)");
            result = cls;
          }
        }
        int i = arity - 1;
        while (i >= 0 && pick[i] + 1 == Q.classes[tuple[i]].size()) pick[i--] = 0;
        if (i < 0) break;
        ++pick[i];
      }
      if (result) table[std::vector<Elem>(tuple.begin(), tuple.end())] = *result;
      int i = arity - 1;
      while (i >= 0 && tuple[i] == m - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }

  for (const auto& [r, arity] : S.sig.relations) {
    auto sr = S.rels.find(r);
    auto& rel = T.rels[r];
    if (sr == S.rels.end()) continue;
    for (const auto& members : sr->second) {
      std::vector<Elem> tuple(arity);
      for (int i = 0; i < arity; ++i) tuple[i] = Q.class_of[members[i]];
      rel.insert(tuple);
    }
  }

  for (const auto& [c, e] : S.consts) T.consts[c] = Q.class_of[e];
  return Q;
}

QuotientStructure ultrapower(const FiniteStructure& S, int index_size,
                             const FilterFamily& U, std::size_t size_guard) {
  if (!U.ultrafilter) throw Error("ultrapower requires a validated ultrafilter");
  if (U.ground_size != index_size)
    throw Error("ultrafilter ground set does not match the index set");
  FiniteStructure P = direct_power(S, index_size, size_guard);
  PowerView pv{S.size(), index_size};
  auto equiv = [&](Elem a, Elem b) {
    auto da = pv.decode(a), db = pv.decode(b);
    Mask agree = 0;
    for (int j = 0; j < index_size; ++j)
      if (da[j] == db[j]) agree |= Mask(1) << j;
    return U.contains(agree);
  };
  QuotientStructure Q = make_quotient(P, equiv, "plain-ultrapower");
  Q.quotient.name = S.name + "^" + std::to_string(index_size) + "/U";
  return Q;
}

// ---------------------------------------------------------------------------
// Enumeration

StructureStream::StructureStream(Signature sig, int max_size, bool total)
    : sig_(std::move(sig)), max_size_(max_size), total_(total) {
  if (max_size < 1) throw Error("max_size must be at least 1");
  start_size(1);
}

void StructureStream::start_size(int k) {
  k_ = k;
  digits_.clear();
  radices_.clear();
  // Digit layout: per function (name order) one digit per argument
  // tuple, radix k+1 (last value = undefined) or k when total; per
  // relation one binary digit per tuple; per constant one digit of
  // radix k. Tuples run lexicographically.
  for (const auto& [f, arity] : sig_.functions) {
    std::size_t tuples = 1;
    for (int i = 0; i < arity; ++i) tuples *= k;
    for (std::size_t t = 0; t < tuples; ++t)
      radices_.push_back(total_ ? k : k + 1);
  }
  for (const auto& [r, arity] : sig_.relations) {
    std::size_t tuples = 1;
    for (int i = 0; i < arity; ++i) tuples *= k;
    for (std::size_t t = 0; t < tuples; ++t) radices_.push_back(2);
  }
  for (std::size_t c = 0; c < sig_.constants.size(); ++c) radices_.push_back(k);
  digits_.assign(radices_.size(), 0);
}

FiniteStructure StructureStream::materialize() const {
  FiniteStructure S = make_structure(sig_, k_);
  std::size_t d = 0;
  for (const auto& [f, arity] : sig_.functions) {
    auto& table = S.funcs[f];
    std::vector<Elem> tuple(arity, 0);
    for (;;) {
      int v = digits_[d++];
      // In partial mode the extra digit value k_ encodes "undefined".
      if (v < k_) table[tuple] = v;
      int i = arity - 1;
      while (i >= 0 && tuple[i] == k_ - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }
  for (const auto& [r, arity] : sig_.relations) {
    auto& rel = S.rels[r];
    std::vector<Elem> tuple(arity, 0);
    for (;;) {
      if (digits_[d++]) rel.insert(tuple);
      int i = arity - 1;
      while (i >= 0 && tuple[i] == k_ - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }
  for (const auto& c : sig_.constants) S.consts[c] = digits_[d++];
  return S;
}

std::optional<FiniteStructure> StructureStream::next() {
  if (exhausted_) return std::nullopt;
  FiniteStructure S = materialize();
  // Advance the odometer.
  int i = static_cast<int>(digits_.size()) - 1;
  while (i >= 0 && digits_[i] + 1 == radices_[i]) digits_[i--] = 0;
  if (i >= 0) {
    ++digits_[i];
  } else if (k_ < max_size_) {
    start_size(k_ + 1);
  } else {
    exhausted_ = true;
  }
  return S;
}

std::vector<FiniteStructure> all_structures(const Signature& sig, int max_size,
                                            bool total) {
  std::vector<FiniteStructure> out;
  StructureStream stream(sig, max_size, total);
  while (auto s = stream.next()) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------
// Embedding search

namespace {

bool check_partial_map(const FiniteStructure& A, const FiniteStructure& B,
                       const std::vector<Elem>& map) {
  // map[a] == -1 means unassigned; checks every constraint whose
  // participants are all assigned.
  for (const auto& [c, ea] : A.consts) {
    if (map[ea] == -1) continue;
    if (map[ea] != B.consts.at(c)) return false;
  }
  for (const auto& [f, arity] : A.sig.functions) {
    auto fa = A.funcs.find(f);
    auto fb = B.funcs.find(f);
    std::vector<Elem> tuple(arity, 0);
    const int n = A.size();
    for (;;) {
      bool assigned = true;
      std::vector<Elem> image(arity);
      for (int i = 0; i < arity && assigned; ++i) {
        if (map[tuple[i]] == -1)
          assigned = false;
        else
          image[i] = map[tuple[i]];
      }
      if (assigned) {
        std::optional<Elem> va;
        if (fa != A.funcs.end()) {
          auto it = fa->second.find(tuple);
          if (it != fa->second.end()) va = it->second;
        }
        std::optional<Elem> vb;
        if (fb != B.funcs.end()) {
          auto it = fb->second.find(image);
          if (it != fb->second.end()) vb = it->second;
        }
        if (va.has_value() != vb.has_value()) return false;  // definedness
        if (va && map[*va] != -1 && map[*va] != *vb) return false;
      }
      int i = arity - 1;
      while (i >= 0 && tuple[i] == n - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }
  for (const auto& [r, arity] : A.sig.relations) {
    auto ra = A.rels.find(r);
    auto rb = B.rels.find(r);
    std::vector<Elem> tuple(arity, 0);
    const int n = A.size();
    for (;;) {
      bool assigned = true;
      std::vector<Elem> image(arity);
      for (int i = 0; i < arity && assigned; ++i) {
        if (map[tuple[i]] == -1)
          assigned = false;
        else
          image[i] = map[tuple[i]];
      }
      if (assigned) {
        bool ha = ra != A.rels.end() && ra->second.count(tuple) > 0;
        bool hb = rb != B.rels.end() && rb->second.count(image) > 0;
        if (ha != hb) return false;  // both directions
      }
      int i = arity - 1;
      while (i >= 0 && tuple[i] == n - 1) tuple[i--] = 0;
      if (i < 0) break;
      ++tuple[i];
    }
  }
  return true;
}

void search_embeddings(const FiniteStructure& A, const FiniteStructure& B,
                       std::vector<Elem>& map, std::vector<bool>& used,
                       std::size_t next, bool bijective,
                       std::vector<std::vector<Elem>>& found, std::size_t limit) {
  if (!found.empty() && found.size() >= limit) return;
  if (next == map.size()) {
    found.push_back(map);
    return;
  }
  for (Elem b = 0; b < B.size(); ++b) {
    if (used[b]) continue;
    map[next] = b;
    used[b] = true;
    if (check_partial_map(A, B, map))
      search_embeddings(A, B, map, used, next + 1, bijective, found, limit);
    used[b] = false;
    map[next] = -1;
    if (!found.empty() && found.size() >= limit) return;
  }
}

}  // namespace

bool is_embedding(const FiniteStructure& A, const FiniteStructure& B,
                  const std::vector<Elem>& map) {
  if (static_cast<int>(map.size()) != A.size()) return false;
  std::vector<bool> seen(B.size(), false);
  for (Elem b : map) {
    if (b < 0 || b >= B.size() || seen[b]) return false;
    seen[b] = true;
  }
  return check_partial_map(A, B, map);
}

bool is_isomorphism(const FiniteStructure& A, const FiniteStructure& B,
                    const std::vector<Elem>& map) {
  return A.size() == B.size() && is_embedding(A, B, map);
}

std::optional<std::vector<Elem>> find_embedding(const FiniteStructure& A,
                                                const FiniteStructure& B) {
  if (A.size() > B.size()) return std::nullopt;
  std::vector<Elem> map(A.size(), -1);
  std::vector<bool> used(B.size(), false);
  std::vector<std::vector<Elem>> found;
  search_embeddings(A, B, map, used, 0, false, found, 1);
  if (found.empty()) return std::nullopt;
  return found.front();
}

std::optional<std::vector<Elem>> find_isomorphism(const FiniteStructure& A,
                                                  const FiniteStructure& B) {
  if (A.size() != B.size()) return std::nullopt;
  return find_embedding(A, B);
}

std::vector<std::vector<Elem>> all_embeddings(const FiniteStructure& A,
                                              const FiniteStructure& B) {
  std::vector<Elem> map(A.size(), -1);
  std::vector<bool> used(B.size(), false);
  std::vector<std::vector<Elem>> found;
  if (A.size() <= B.size())
    search_embeddings(A, B, map, used, 0, false, found,
                      std::numeric_limits<std::size_t>::max());
  return found;
}

// ---------------------------------------------------------------------------
// Bounded oracle

EntailmentResult bounded_entailment(const Formula& premise,
                                    const Formula& conclusion,
                                    const Signature& sig, int bound) {
  if (bound < 1) throw Error("entailment bound must be at least 1");
  std::set<std::string> vars = free_variables(premise);
  for (const auto& v : free_variables(conclusion)) vars.insert(v);
  StructureStream stream(sig, bound, /*total=*/true);
  while (auto S = stream.next()) {
    std::vector<std::string> names(vars.begin(), vars.end());
    std::vector<Elem> vals(names.size(), 0);
    for (;;) {
      Assignment a;
      for (std::size_t i = 0; i < names.size(); ++i) a[names[i]] = vals[i];
      if (satisfies(*S, premise, a) && !satisfies(*S, conclusion, a)) {
        EntailmentResult r;
        r.refuted = true;
        r.bound = bound;
        r.witness_structure = *S;
        r.witness_assignment = a;
        return r;
      }
      int i = static_cast<int>(vals.size()) - 1;
      while (i >= 0 && vals[i] == S->size() - 1) vals[i--] = 0;
      if (i < 0) break;
      ++vals[i];
    }
  }
  EntailmentResult r;
  r.refuted = false;
  r.bound = bound;
  return r;
}

PreservationReport check_preserved(const FiniteStructure& S, const Formula& sentence,
                                   const FiniteStructure& target) {
  PreservationReport rep;
  rep.holds_in_source = satisfies(S, sentence);
  rep.holds_in_target = satisfies(target, sentence);
  return rep;
}

}  // namespace powlab
