#include "powlab/embedding.hpp"

#include <algorithm>

namespace powlab {

SupportProfile support(const FiniteStructure& S) {
  SupportProfile out;
  const int n = S.size();
  for (Elem a = 0; a < n; ++a) {
    std::string witness;
    for (const auto& [f, arity] : S.sig.functions) {
      auto ft = S.funcs.find(f);
      // Enumerate positions for a and the other arguments.
      for (int pos = 0; pos < arity && witness.empty(); ++pos) {
        std::vector<Elem> args(arity, 0);
        args[pos] = a;
        for (;;) {
          bool defined = false;
          if (ft != S.funcs.end()) defined = ft->second.count(args) > 0;
          if (!defined) {
            witness = f + " undefined at (";
            for (int i = 0; i < arity; ++i)
              witness += (i ? "," : "") + S.elems[args[i]];
            witness += ")";
            break;
          }
          int i = arity - 1;
          while (i >= 0 && (i == pos || args[i] == n - 1)) {
            if (i != pos) args[i] = 0;
            --i;
          }
          if (i < 0) break;
          ++args[i];
        }
      }
      if (!witness.empty()) break;
    }
    if (witness.empty()) {
      out.support.push_back(a);
    } else {
      out.anti_support.push_back(a);
      out.evidence[a] = witness;
    }
  }
  return out;
}

std::vector<Elem> rep_set(const FiniteStructure& S, int index_size,
                          std::size_t size_guard) {
  SupportProfile sp = support(S);
  std::set<Elem> supp(sp.support.begin(), sp.support.end());
  PowerView pv{S.size(), index_size};
  double projected = 1;
  for (int i = 0; i < index_size; ++i) projected *= S.size();
  if (projected > static_cast<double>(size_guard))
    throw Error("rep_set: power exceeds size guard");
  std::vector<Elem> out;
  for (Elem id = 0; id < pv.carrier_size(); ++id) {
    auto d = pv.decode(id);
    bool constant = std::all_of(d.begin(), d.end(),
                                [&](Elem x) { return x == d[0]; });
    bool anti_const = constant && !supp.count(d[0]);
    bool in_support = std::all_of(d.begin(), d.end(),
                                  [&](Elem x) { return supp.count(x) > 0; });
    if (anti_const || in_support) out.push_back(id);
  }
  return out;
}

RepresentativeReport representative_check(const FiniteStructure& S, int index_size,
                                          const FilterFamily& U,
                                          std::size_t size_guard) {
  RepresentativeReport rep;
  QuotientStructure Q = ultrapower(S, index_size, U, size_guard);
  std::vector<Elem> reps = rep_set(S, index_size, size_guard);
  std::set<Elem> repset(reps.begin(), reps.end());

  rep.all_have_rep = true;
  for (int cls = 0; cls < Q.class_count(); ++cls) {
    bool found = false;
    for (Elem member : Q.classes[cls])
      if (repset.count(member)) {
        rep.witnesses[cls] = member;
        found = true;
        break;
      }
    if (!found) rep.all_have_rep = false;
  }

  SupportProfile sp = support(S);
  int kappa = static_cast<int>(sp.anti_support.size());
  rep.complete = is_kappa_complete(U, kappa + 1);

  if (rep.all_have_rep != rep.complete)
    throw Error("representatives biconditional failed (implementation bug)");
  return rep;
}

TauProfile tau_profile(const FiniteStructure& S) {
  TauProfile out;
  const int n = S.size();
  out.per_elem.resize(n);
  for (Elem a = 0; a < n; ++a) {
    auto& pe = out.per_elem[a];
    for (const auto& [f, arity] : S.sig.functions) {
      auto ft = S.funcs.find(f);
      std::set<std::vector<Elem>> down, up;
      if (ft != S.funcs.end()) {
        for (const auto& [tuple, value] : ft->second) {
          if (value == a) down.insert(tuple);
          for (int pos = 0; pos < arity; ++pos) {
            if (tuple[pos] != a) continue;
            // Record the other arguments plus the result, as a set so
            // that different insertion positions with equal residue
            // collapse.
            std::vector<Elem> residue;
            for (int i = 0; i < arity; ++i)
              if (i != pos) residue.push_back(tuple[i]);
            residue.push_back(value);
            up.insert(residue);
          }
        }
      }
      pe.down[f] = down.size();
      pe.up[f] = up.size();
      pe.tau += down.size() + up.size();
    }
    for (const auto& [r, arity] : S.sig.relations) {
      auto rt = S.rels.find(r);
      std::set<std::vector<Elem>> tuples;
      if (rt != S.rels.end()) {
        for (const auto& tuple : rt->second)
          for (int pos = 0; pos < arity; ++pos) {
            if (tuple[pos] != a) continue;
            std::vector<Elem> residue;
            for (int i = 0; i < arity; ++i)
              if (i != pos) residue.push_back(tuple[i]);
            tuples.insert(residue);
          }
      }
      pe.rel[r] = tuples.size();
      pe.tau += tuples.size();
    }
    out.tau_max = std::max(out.tau_max, pe.tau);
  }
  // Witness: the least maximizer.
  for (Elem a = 0; a < n; ++a)
    if (out.per_elem[a].tau == out.tau_max) {
      out.witness = a;
      break;
    }
  return out;
}

bool rk_witnesses(const FilterFamily& U_I, const FilterFamily& U_J,
                  const std::vector<int>& h) {
  if (static_cast<int>(h.size()) != U_J.ground_size)
    throw Error("RK candidate has wrong domain");
  for (int v : h)
    if (v < 0 || v >= U_I.ground_size) throw Error("RK candidate out of range");
  for (Mask X = 0; X <= U_I.full(); ++X) {
    Mask pre = 0;
    for (int j = 0; j < U_J.ground_size; ++j)
      if (X & (Mask(1) << h[j])) pre |= Mask(1) << j;
    if (U_I.contains(X) != U_J.contains(pre)) return false;
  }
  return true;
}

std::optional<std::vector<int>> rk_compare(const FilterFamily& U_I,
                                           const FilterFamily& U_J) {
  if (!U_I.ultrafilter || !U_J.ultrafilter)
    throw Error("rk_compare needs ultrafilters");
  std::vector<int> h(U_J.ground_size, 0);
  for (;;) {
    if (rk_witnesses(U_I, U_J, h)) return h;
    int i = U_J.ground_size - 1;
    while (i >= 0 && h[i] == U_I.ground_size - 1) h[i--] = 0;
    if (i < 0) return std::nullopt;
    ++h[i];
  }
}

SetMapFlags set_map_properties(int I_size, int J_size,
                               const std::function<Mask(Mask)>& H) {
  if (I_size > 12) throw Error("set_map_properties limited to |I| <= 12");
  SetMapFlags flags;
  const Mask fullI = (Mask(1) << I_size) - 1;
  const Mask fullJ = J_size >= 32 ? ~Mask(0) : ((Mask(1) << J_size) - 1);
  flags.multiplicative = flags.additive = flags.subtractive = true;
  flags.covering = H(fullI) == fullJ;
  for (Mask X = 0; X <= fullI; ++X) {
    for (Mask Y = 0; Y <= fullI; ++Y) {
      if ((H(X) & H(Y)) != H(X & Y)) flags.multiplicative = false;
      if ((H(X) | H(Y)) != H(X | Y)) flags.additive = false;
      if (!flags.multiplicative && !flags.additive) break;
    }
    if (H(fullI & ~X) != (H(fullI) & ~H(X))) flags.subtractive = false;
  }
  return flags;
}

std::vector<Elem> w_transport(const std::vector<Elem>& u, int B_size,
                              const std::vector<int>& h, const std::vector<Elem>& f) {
  std::set<Elem> image;
  for (Elem b : u) {
    if (b < 0 || b >= B_size) throw Error("w_transport: u out of range");
    if (!image.insert(b).second) throw Error("w_transport: u is not injective");
  }
  const int I = static_cast<int>(f.size());
  const int J = static_cast<int>(h.size());
  for (int v : h)
    if (v < 0 || v >= I) throw Error("w_transport: h out of range");
  std::vector<Elem> w(J);
  for (int j = 0; j < J; ++j) w[j] = u[f[h[j]]];
  // Assert the closed form against the fiber definition.
  const int A = static_cast<int>(u.size());
  for (Elem a = 0; a < A; ++a) {
    for (int j = 0; j < J; ++j) {
      bool lhs = w[j] == u[a];
      bool rhs = f[h[j]] == a;
      if (lhs != rhs)
        throw Error("w_transport fiber condition violated (internal bug)");
    }
  }
  return w;
}

RkEmbeddingReport rk_embedding(const FiniteStructure& A, const FiniteStructure& B,
                               const std::vector<Elem>& u, const std::vector<int>& h,
                               const FilterFamily& U_I, const FilterFamily& U_J,
                               std::size_t size_guard) {
  QuotientStructure QA = ultrapower(A, U_I.ground_size, U_I, size_guard);
  QuotientStructure QB = ultrapower(B, U_J.ground_size, U_J, size_guard);
  return rk_embedding(A, B, u, h, U_I, U_J, QA, QB);
}

RkEmbeddingReport rk_embedding(const FiniteStructure& A, const FiniteStructure& B,
                               const std::vector<Elem>& u, const std::vector<int>& h,
                               const FilterFamily& U_I, const FilterFamily& U_J,
                               const QuotientStructure& QA,
                               const QuotientStructure& QB) {
  if (!is_embedding(A, B, u))
    throw Error("rk_embedding: u must be a verified embedding");
  RkEmbeddingReport rep;
  PowerView pvA{A.size(), U_I.ground_size};
  PowerView pvB{B.size(), U_J.ground_size};

  auto w_of = [&](Elem fid) {
    std::vector<Elem> f = pvA.decode(fid);
    return pvB.encode(w_transport(u, B.size(), h, f));
  };

  // e on canonical representatives, with well-definedness over all
  // members.
  rep.e_map.resize(QA.class_count());
  rep.well_defined = true;
  for (int cls = 0; cls < QA.class_count(); ++cls) {
    rep.e_map[cls] = QB.class_of[w_of(QA.rep(cls))];
    for (Elem member : QA.classes[cls])
      if (QB.class_of[w_of(member)] != rep.e_map[cls]) {
        rep.well_defined = false;
        rep.detail = "e not well-defined on class " + std::to_string(cls);
      }
  }
  rep.embedding =
      rep.well_defined && is_embedding(QA.quotient, QB.quotient, rep.e_map);
  if (rep.detail.empty() && !rep.embedding) rep.detail = "embedding check failed";

  rep.rk = rk_witnesses(U_I, U_J, h);
  // The biconditional presumes |A| > 1: a singleton carrier has
  // one-class ultrapowers, every map between them is an embedding, and
  // agreement sets cannot be prescribed. Both verdicts are still
  // reported for the degenerate case.
  if (A.size() > 1 && rep.embedding != rep.rk)
    throw Error("RK embedding biconditional failed (implementation bug): " +
                rep.detail);
  return rep;
}

DirectPowerEmbeddingReport embed_into_direct_power(const FiniteStructure& S,
                                                   int index_size,
                                                   const FilterFamily& U,
                                                   bool seed_constants,
                                                   std::size_t size_guard) {
  DirectPowerEmbeddingReport rep;
  FiniteStructure P = direct_power(S, index_size, size_guard);
  QuotientStructure Q = ultrapower(S, index_size, U, size_guard);
  PowerView pv{S.size(), index_size};

  TauProfile tp = tau_profile(Q.quotient);
  rep.tau_value = tp.tau_max;
  rep.tau_complete = is_kappa_complete(U, static_cast<int>(tp.tau_max) + 1);

  // Seed the natural embedding on classes of constant functions.
  if (seed_constants)
    for (Elem x = 0; x < S.size(); ++x) {
      Elem bar = pv.encode(std::vector<Elem>(index_size, x));
      rep.e[Q.class_of[bar]] = bar;
    }

  // Per-class tuple sets in the ultrapower, daggered through the current
  // partial map (canonical representative when unassigned).
  auto dagger = [&](int cls) {
    auto it = rep.e.find(cls);
    return it != rep.e.end() ? it->second : Q.rep(cls);
  };
  const FiniteStructure& T = Q.quotient;
  for (int cls = 0; cls < Q.class_count(); ++cls) {
    if (rep.e.count(cls)) continue;
    Mask X = U.full();
    auto narrow = [&](const std::vector<int>& classes, int result_cls,
                      const std::string& f) {
      // Agreement set of one producing tuple: coordinates where the
      // base operation on daggered arguments yields the daggered result.
      auto ft = S.funcs.find(f);
      Mask m = 0;
      for (int j = 0; j < index_size; ++j) {
        std::vector<Elem> args;
        for (int c : classes) args.push_back(pv.decode(dagger(c))[j]);
        Elem want = pv.decode(dagger(result_cls))[j];
        if (ft != S.funcs.end()) {
          auto it = ft->second.find(args);
          if (it != ft->second.end() && it->second == want) m |= Mask(1) << j;
        }
      }
      X &= m;
    };
    for (const auto& [f, arity] : T.sig.functions) {
      auto ft = T.funcs.find(f);
      if (ft == T.funcs.end()) continue;
      for (const auto& [tuple, value] : ft->second) {
        bool involves = value == cls ||
                        std::find(tuple.begin(), tuple.end(), cls) != tuple.end();
        if (!involves) continue;
        narrow(std::vector<int>(tuple.begin(), tuple.end()), value, f);
      }
    }
    for (const auto& [r, arity] : T.sig.relations) {
      auto rt = T.rels.find(r);
      if (rt == T.rels.end()) continue;
      for (const auto& tuple : rt->second) {
        if (std::find(tuple.begin(), tuple.end(), cls) == tuple.end()) continue;
        Mask m = 0;
        auto st = S.rels.find(r);
        for (int j = 0; j < index_size; ++j) {
          std::vector<Elem> args;
          for (int c : tuple) args.push_back(pv.decode(dagger(c))[j]);
          if (st != S.rels.end() && st->second.count(args)) m |= Mask(1) << j;
        }
        X &= m;
      }
    }
    if (X == 0)
      throw Error("intersection set vanished; ultrafilter not complete enough");
    int k = 0;
    while (!(X & (Mask(1) << k))) ++k;
    std::vector<Elem> theta = pv.decode(Q.rep(cls));
    std::vector<Elem> patched(index_size);
    for (int j = 0; j < index_size; ++j)
      patched[j] = (X & (Mask(1) << j)) ? theta[j] : theta[k];
    rep.e[cls] = pv.encode(patched);
  }

  // Verify: choice function on classes and an embedding into the power.
  bool ok = true;
  for (int cls = 0; cls < Q.class_count(); ++cls)
    if (Q.class_of[rep.e.at(cls)] != cls) ok = false;
  std::vector<Elem> as_map(Q.class_count());
  for (int cls = 0; cls < Q.class_count(); ++cls) as_map[cls] = rep.e.at(cls);
  ok = ok && is_embedding(Q.quotient, P, as_map);
  rep.embedding = ok;

  if (rep.embedding != rep.tau_complete)
    throw Error("direct-power embedding biconditional failed (implementation bug)");
  return rep;
}

bool kappa_concurrent(const FiniteStructure& S, const std::string& R, int kappa) {
  auto ar = S.sig.relations.find(R);
  if (ar == S.sig.relations.end() || ar->second != 2)
    throw Error("kappa_concurrent needs a binary relation");
  auto rt = S.rels.find(R);
  auto holds = [&](Elem a, Elem b) {
    return rt != S.rels.end() && rt->second.count({a, b}) > 0;
  };
  const int n = S.size();
  if (n > 20) throw Error("kappa_concurrent limited to carriers of size <= 20");
  for (Mask X = 0; X < (Mask(1) << n); ++X) {
    if (__builtin_popcount(X) >= kappa) continue;
    bool all_witnessed = true;
    for (Elem a = 0; a < n && all_witnessed; ++a) {
      if (!(X & (Mask(1) << a))) continue;
      bool some = false;
      for (Elem b = 0; b < n; ++b)
        if (holds(a, b)) {
          some = true;
          break;
        }
      all_witnessed = some;
    }
    if (!all_witnessed) continue;
    bool common = false;
    for (Elem c = 0; c < n && !common; ++c) {
      bool works = true;
      for (Elem a = 0; a < n && works; ++a)
        if (X & (Mask(1) << a)) works = holds(a, c);
      common = works;
    }
    if (!common) return false;
  }
  return true;
}

ClassSizeReport class_size_uniformity(const FiniteStructure& S, int index_size,
                                      const FilterFamily& U,
                                      std::size_t size_guard) {
  ClassSizeReport rep;
  QuotientStructure Q = ultrapower(S, index_size, U, size_guard);
  for (const auto& cls : Q.classes) rep.sizes.push_back(cls.size());
  rep.size = rep.sizes.front();
  rep.uniform = std::all_of(rep.sizes.begin(), rep.sizes.end(),
                            [&](std::size_t s) { return s == rep.size; });
  return rep;
}

}  // namespace powlab
