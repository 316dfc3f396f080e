#include "powlab/quotient.hpp"

#include <algorithm>

namespace powlab {

bool hereditary_equal(const CumulativePower& cp, const HierElement& a,
                      const HierElement& b) {
  if (a == b) return true;
  const int delta = std::max(a.level(), b.level());
  if (delta == 0) return false;  // level 0 is identity
  const int m = delta - 1;
  for (int j = 0; j < cp.fam.size(m); ++j)
    if (!hereditary_equal(cp, vartheta(delta, {m, j}, a), vartheta(delta, {m, j}, b)))
      return false;
  return true;
}

bool ultra_equal(const CumulativePower& cp, const HierElement& a,
                 const HierElement& b, const std::vector<FilterFamily>& Us) {
  if (a == b) return true;
  const int delta = std::max(a.level(), b.level());
  if (delta == 0) return false;
  const int m = delta - 1;
  if (m >= static_cast<int>(Us.size()))
    throw Error("missing ultrafilter for index set I" + std::to_string(m));
  const FilterFamily& U = Us[m];
  if (!U.ultrafilter || U.ground_size != cp.fam.size(m))
    throw Error("invalid ultrafilter for index set I" + std::to_string(m));
  Mask agree = 0;
  for (int j = 0; j < cp.fam.size(m); ++j)
    if (ultra_equal(cp, vartheta(delta, {m, j}, a), vartheta(delta, {m, j}, b), Us))
      agree |= Mask(1) << j;
  return U.contains(agree);
}

namespace {

QuotientStructure quotient_by(const CumulativePower& cp,
                              const std::function<bool(const HierElement&,
                                                       const HierElement&)>& rel,
                              const std::string& provenance) {
  FiniteStructure T = materialize(cp, /*with_constants=*/true);
  auto equiv = [&](Elem x, Elem y) { return rel(cp.carrier[x], cp.carrier[y]); };
  QuotientStructure Q = make_quotient(T, equiv, provenance);
  Q.quotient.name = T.name + "/" + provenance;
  return Q;
}

}  // namespace

QuotientStructure quotient_hereditary(const CumulativePower& cp) {
  return quotient_by(
      cp, [&](const HierElement& a, const HierElement& b) {
        return hereditary_equal(cp, a, b);
      },
      "hereditary-identity");
}

QuotientStructure quotient_ultra(const CumulativePower& cp,
                                 const std::vector<FilterFamily>& Us) {
  std::string tag = "ultrafilter(";
  for (int m = 0; m < cp.stage; ++m) {
    if (m >= static_cast<int>(Us.size()))
      throw Error("missing ultrafilter for stage " + std::to_string(m + 1));
    if (!Us[m].ultrafilter || Us[m].ground_size != cp.fam.size(m))
      throw Error("invalid ultrafilter for index set I" + std::to_string(m));
    if (m) tag += ",";
    tag += Us[m].principal_at
               ? "principal@" + (Us[m].ground_names.empty()
                                     ? std::to_string(*Us[m].principal_at)
                                     : Us[m].ground_names[*Us[m].principal_at])
               : "explicit";
  }
  return quotient_by(
      cp, [&](const HierElement& a, const HierElement& b) {
        return ultra_equal(cp, a, b, Us);
      },
      tag + ")");
}

FiniteStructure direct_power_level(const FiniteStructure& S, const IndexFamily& fam,
                                   int n, std::size_t size_guard) {
  fam.validate();
  if (n > fam.stages()) throw Error("stage exceeds the declared index family");
  FiniteStructure P = S;
  for (int m = 0; m < n; ++m) P = direct_power(P, fam.size(m), size_guard);
  return P;
}

QuotientStructure ultrapower_level(const FiniteStructure& S, const IndexFamily& fam,
                                   const std::vector<FilterFamily>& Us, int n,
                                   std::size_t size_guard) {
  fam.validate();
  if (n > fam.stages()) throw Error("stage exceeds the declared index family");
  if (n == 0) {
    // Degenerate: single-class-per-element quotient of S itself.
    QuotientStructure Q = make_quotient(
        S, [](Elem a, Elem b) { return a == b; }, "iterated-ultrapower");
    return Q;
  }
  FiniteStructure cur = S;
  QuotientStructure Q;
  for (int m = 0; m < n; ++m) {
    if (m >= static_cast<int>(Us.size()))
      throw Error("missing ultrafilter for stage " + std::to_string(m + 1));
    Q = ultrapower(cur, fam.size(m), Us[m], size_guard);
    Q.provenance = "iterated-ultrapower";
    cur = Q.quotient;
  }
  return Q;
}

namespace {

// Decodes an iterated-direct-power carrier id into the corresponding
// pure-function hierarchy element (every value a full map at every
// level below).
HierElement pure_element(const FiniteStructure& S, const IndexFamily& fam, int m,
                         Elem id) {
  if (m == 0) return HierElement::mk_base(id);
  // Carrier of stage m is (carrier of stage m-1)^{I_{m-1}}.
  int prev = S.size();
  for (int i = 0; i < m - 1; ++i) {
    int p = 1;
    for (int j = 0; j < fam.size(i); ++j) p *= prev;
    prev = p;
  }
  PowerView pv{prev, fam.size(m - 1)};
  std::vector<HierElement> vals;
  for (Elem d : pv.decode(id)) vals.push_back(pure_element(S, fam, m - 1, d));
  return HierElement::mk_func(m - 1, std::move(vals));
}

bool verify_structure_map(const FiniteStructure& A, const FiniteStructure& B,
                          const std::vector<int>& map, bool require_bijection,
                          std::string& detail) {
  std::vector<bool> hit(B.size(), false);
  for (Elem a = 0; a < A.size(); ++a) {
    if (map[a] < 0 || map[a] >= B.size()) {
      detail = "map out of range";
      return false;
    }
    if (hit[map[a]]) {
      detail = "map not injective";
      return false;
    }
    hit[map[a]] = true;
  }
  if (require_bijection &&
      (A.size() != B.size() ||
       !std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }))) {
    detail = "map not surjective";
    return false;
  }
  if (!is_embedding(A, B, map)) {
    detail = "interpretation mismatch";
    return false;
  }
  return true;
}

}  // namespace

IsoReport canonical_iso_direct(const FiniteStructure& S, const IndexFamily& fam,
                               int n, std::size_t size_guard) {
  IsoReport rep;
  FiniteStructure P = direct_power_level(S, fam, n, size_guard);
  if (n == 0) {
    rep.map.resize(S.size());
    for (Elem i = 0; i < S.size(); ++i) rep.map[i] = i;
    rep.verified = verify_structure_map(P, S, rep.map, true, rep.detail);
    return rep;
  }
  CumulativePower cp = build_level(S, fam, n, false, size_guard);
  QuotientStructure F = quotient_hereditary(cp);
  rep.map.resize(P.size());
  for (Elem x = 0; x < P.size(); ++x) {
    HierElement h = pure_element(S, fam, n, x);
    rep.map[x] = F.class_of[cp.index_of(h)];
  }
  rep.verified = verify_structure_map(P, F.quotient, rep.map, true, rep.detail);
  if (!rep.verified)
    throw Error("canonical direct-power isomorphism failed verification: " +
                rep.detail);
  return rep;
}

IsoReport canonical_iso_ultra(const FiniteStructure& S, const IndexFamily& fam,
                              const std::vector<FilterFamily>& Us, int n,
                              std::size_t size_guard) {
  IsoReport rep;
  QuotientStructure Y = ultrapower_level(S, fam, Us, n, size_guard);
  if (n == 0) {
    rep.map.resize(S.size());
    for (Elem i = 0; i < S.size(); ++i) rep.map[i] = i;
    rep.verified = verify_structure_map(Y.quotient, S, rep.map, true, rep.detail);
    return rep;
  }
  CumulativePower cp = build_level(S, fam, n, false, size_guard);
  QuotientStructure F = quotient_ultra(cp, Us);

  // An iterated-ultrapower class maps to the ~-class of the hierarchy
  // element read off any representative, resolving inner classes through
  // their canonical representatives. Representative independence is part
  // of the verification.
  std::vector<QuotientStructure> levels;  // quotients per stage 1..n
  {
    FiniteStructure cur = S;
    for (int m = 0; m < n; ++m) {
      levels.push_back(ultrapower(cur, fam.size(m), Us[m], size_guard));
      cur = levels.back().quotient;
    }
  }
  // size of the unquotiented power at stage m (over the stage m-1 quotient)
  std::function<HierElement(int, Elem)> lift = [&](int m, Elem cls) -> HierElement {
    // cls is a class id of levels[m-1]; pick its canonical representative
    // in the power over the previous quotient and expand digits.
    const QuotientStructure& L = levels[m - 1];
    Elem repid = L.rep(cls);
    int base = m == 1 ? S.size() : levels[m - 2].class_count();
    PowerView pv{base, fam.size(m - 1)};
    std::vector<HierElement> vals;
    for (Elem d : pv.decode(repid))
      vals.push_back(m == 1 ? HierElement::mk_base(d) : lift(m - 1, d));
    return HierElement::mk_func(m - 1, std::move(vals));
  };

  rep.map.resize(Y.class_count());
  for (int cls = 0; cls < Y.class_count(); ++cls)
    rep.map[cls] = F.class_of[cp.index_of(lift(n, cls))];

  // Representative independence: every member of an iterated class must
  // land in the same ~-class. Members of the top class are power
  // elements over the previous quotient; expanding through *any* inner
  // representative must agree.
  bool rep_independent = true;
  {
    const QuotientStructure& top = levels[n - 1];
    int base = n == 1 ? S.size() : levels[n - 2].class_count();
    PowerView pv{base, fam.size(n - 1)};
    for (int cls = 0; cls < Y.class_count() && rep_independent; ++cls)
      for (Elem member : top.classes[cls]) {
        std::vector<HierElement> vals;
        for (Elem d : pv.decode(member))
          vals.push_back(n == 1 ? HierElement::mk_base(d) : lift(n - 1, d));
        HierElement h = HierElement::mk_func(n - 1, std::move(vals));
        if (F.class_of[cp.index_of(h)] != rep.map[cls]) {
          rep_independent = false;
          rep.detail = "representative dependence";
          break;
        }
      }
  }

  rep.verified = rep_independent &&
                 verify_structure_map(Y.quotient, F.quotient, rep.map, true,
                                      rep.detail);
  if (!rep.verified)
    throw Error("canonical ultrapower isomorphism failed verification: " +
                rep.detail);
  return rep;
}

InducedUltrafilter induced_ultrafilter_on_quotient(
    const FilterFamily& U, const std::vector<std::vector<int>>& partition) {
  if (!U.ultrafilter) throw Error("induced ultrafilter needs an ultrafilter");
  const int classes = static_cast<int>(partition.size());
  std::vector<int> class_of(U.ground_size, -1);
  for (int c = 0; c < classes; ++c)
    for (int x : partition[c]) {
      if (x < 0 || x >= U.ground_size || class_of[x] != -1)
        throw Error("not a partition of the ground set");
      class_of[x] = c;
    }
  for (int x = 0; x < U.ground_size; ++x)
    if (class_of[x] == -1) throw Error("partition misses an element");

  std::vector<Mask> sets;
  for (Mask m : U.sets) {
    Mask img = 0;
    for (int x = 0; x < U.ground_size; ++x)
      if (m & (Mask(1) << x)) img |= Mask(1) << class_of[x];
    sets.push_back(img);
  }
  InducedUltrafilter out;
  out.on_classes = validate_filter(classes, std::move(sets));
  if (!out.on_classes.ultrafilter)
    throw Error("induced family failed ultrafilter validation (internal bug)");
  out.rk_witness = class_of;
  // Verify the Rudin-Keisler condition X in U' iff h^{-1}[X] in U.
  Mask full_classes = out.on_classes.full();
  for (Mask X = 0; X <= full_classes; ++X) {
    Mask pre = 0;
    for (int x = 0; x < U.ground_size; ++x)
      if (X & (Mask(1) << class_of[x])) pre |= Mask(1) << x;
    if (out.on_classes.contains(X) != U.contains(pre))
      throw Error("RK witness verification failed (internal bug)");
  }
  return out;
}

InducedFilterBase induced_filterbase_on_carrier(
    const FilterFamily& U_classes, const std::vector<std::vector<int>>& partition) {
  if (!U_classes.ultrafilter)
    throw Error("induced filter base needs an ultrafilter on classes");
  if (static_cast<int>(partition.size()) != U_classes.ground_size)
    throw Error("partition size does not match the class ground set");
  int carrier = 0;
  for (const auto& block : partition) carrier += static_cast<int>(block.size());

  InducedFilterBase out;
  for (Mask X : U_classes.sets) {
    Mask pre = 0;
    for (int c = 0; c < U_classes.ground_size; ++c)
      if (X & (Mask(1) << c))
        for (int x : partition[c]) pre |= Mask(1) << x;
    out.base_sets.push_back(pre);
  }
  std::sort(out.base_sets.begin(), out.base_sets.end());
  out.base_sets.erase(std::unique(out.base_sets.begin(), out.base_sets.end()),
                      out.base_sets.end());

  // Minimal member of the base; its least point generates the principal
  // extension.
  Mask minimal = out.base_sets.front();
  for (Mask m : out.base_sets)
    if (__builtin_popcount(m) < __builtin_popcount(minimal)) minimal = m;
  int point = 0;
  while (!(minimal & (Mask(1) << point))) ++point;
  out.chosen_point = point;
  out.extension = principal_ultrafilter(carrier, point);

  // The extension must contain the base and its image must recover U.
  for (Mask m : out.base_sets)
    if (!out.extension.contains(m))
      throw Error("principal extension does not extend the base (internal bug)");
  std::vector<int> class_of(carrier, -1);
  for (int c = 0; c < U_classes.ground_size; ++c)
    for (int x : partition[c]) class_of[x] = c;
  for (Mask X = 0; X <= U_classes.full(); ++X) {
    Mask pre = 0;
    for (int x = 0; x < carrier; ++x)
      if (X & (Mask(1) << class_of[x])) pre |= Mask(1) << x;
    if (U_classes.contains(X) != out.extension.contains(pre))
      throw Error("filter base round-trip failed (internal bug)");
  }
  return out;
}

LosReport los_check(const FiniteStructure& S, int index_size, const FilterFamily& U,
                    const std::vector<Formula>& sentences, std::size_t size_guard) {
  if (!U.ultrafilter) throw Error("los_check needs an ultrafilter");
  if (U.ground_size != index_size)
    throw Error("ultrafilter ground set does not match the index size");
  IndexFamily fam;
  {
    IndexFamily::Set s;
    s.name = "I0";
    if (!U.ground_names.empty())
      s.members = U.ground_names;
    else
      for (int j = 0; j < index_size; ++j)
        s.members.push_back("j" + std::to_string(j));
    fam.sets.push_back(std::move(s));
  }
  CumulativePower cp = build_level(S, fam, 1, /*plus=*/true, size_guard);
  QuotientStructure F1 = quotient_ultra(cp, {U});

  LosReport rep;
  for (const Formula& phi : sentences) {
    LosReport::Row row;
    row.formula = to_string(phi);
    row.in_quotient = satisfies(F1.quotient, phi);
    // Independent side: the index set of the sentence lies in U. For a
    // closed formula that set is the whole index set or empty.
    bool base_truth = satisfies(S, phi);
    Mask idx = base_truth ? U.full() : 0;
    row.los_side = U.contains(idx);
    row.agree = row.in_quotient == row.los_side;
    rep.all_agree = rep.all_agree && row.agree;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace powlab
