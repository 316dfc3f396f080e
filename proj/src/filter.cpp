#include "powlab/filter.hpp"

#include <algorithm>

namespace powlab {

bool FilterFamily::contains(Mask m) const {
  return std::binary_search(sets.begin(), sets.end(), m);
}

FilterFamily validate_filter(int ground_size, std::vector<Mask> sets,
                             std::vector<std::string> ground_names) {
  if (ground_size < 1 || ground_size > 20)
    throw Error("filter ground set must have 1..20 elements");
  if (!ground_names.empty() &&
      static_cast<int>(ground_names.size()) != ground_size)
    throw Error("ground name count does not match ground size");
  FilterFamily F;
  F.ground_size = ground_size;
  F.ground_names = std::move(ground_names);
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  F.sets = std::move(sets);

  const Mask full = F.full();
  for (Mask m : F.sets)
    if (m & ~full) throw Error("filter axiom violated: member not a subset of the ground set");
  if (!F.contains(full)) throw Error("filter axiom violated: ground set missing");
  if (F.contains(0)) throw Error("filter axiom violated: empty set present");
  for (Mask a : F.sets)
    for (Mask b : F.sets)
      if (!F.contains(a & b))
        throw Error("filter axiom violated: not closed under intersection");
  for (Mask a : F.sets)
    for (Mask sup = a;; sup = (sup + 1) | a) {
      if ((sup & ~full) == 0 && !F.contains(sup))
        throw Error("filter axiom violated: not closed under superset");
      if (sup == full) break;
    }

  F.ultrafilter = true;
  for (Mask m = 0; m <= full; ++m) {
    bool in = F.contains(m), co = F.contains(full & ~m);
    if (in == co) {
      F.ultrafilter = false;
      break;
    }
  }

  if (F.ultrafilter) {
    Mask core = full;
    for (Mask m : F.sets) core &= m;
    // Over a finite set an ultrafilter is principal at a single element.
    if (core != 0 && (core & (core - 1)) == 0) {
      int e = 0;
      while (!(core & (Mask(1) << e))) ++e;
      F.principal_at = e;
    }
  }

  F.tails_for_declared_order = true;
  for (int k = 0; k < ground_size; ++k) {
    Mask tail = 0;
    for (int j = k; j < ground_size; ++j) tail |= Mask(1) << j;
    if (!F.contains(tail)) {
      F.tails_for_declared_order = false;
      break;
    }
  }
  return F;
}

FilterFamily principal_ultrafilter(int ground_size, int elem,
                                   std::vector<std::string> ground_names) {
  if (elem < 0 || elem >= ground_size)
    throw Error("principal generator outside the ground set");
  std::vector<Mask> sets;
  Mask full = ground_size >= 32 ? ~Mask(0) : ((Mask(1) << ground_size) - 1);
  for (Mask m = 0; m <= full; ++m)
    if (m & (Mask(1) << elem)) sets.push_back(m);
  return validate_filter(ground_size, std::move(sets), std::move(ground_names));
}

std::vector<FilterFamily> all_ultrafilters(int ground_size) {
  std::vector<FilterFamily> out;
  for (int e = 0; e < ground_size; ++e)
    out.push_back(principal_ultrafilter(ground_size, e));
  return out;
}

std::vector<std::vector<std::vector<int>>> all_partitions(int n) {
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<int> block_of(n, 0);
  // Restricted growth strings enumerate set partitions canonically.
  auto emit = [&] {
    int blocks = 0;
    for (int b : block_of) blocks = std::max(blocks, b + 1);
    std::vector<std::vector<int>> part(blocks);
    for (int i = 0; i < n; ++i) part[block_of[i]].push_back(i);
    out.push_back(std::move(part));
  };
  // Enumerate all restricted growth strings: s[0]=0, s[i] <= max(s[0..i-1])+1.
  std::vector<int> s(n, 0);
  for (;;) {
    block_of = s;
    emit();
    int i = n - 1;
    for (; i >= 1; --i) {
      int mx = 0;
      for (int j = 0; j < i; ++j) mx = std::max(mx, s[j]);
      if (s[i] <= mx) {
        ++s[i];
        for (int j = i + 1; j < n; ++j) s[j] = 0;
        break;
      }
      s[i] = 0;
    }
    if (i == 0) break;
  }
  return out;
}

bool is_kappa_complete(const FilterFamily& U, int kappa) {
  if (!U.ultrafilter) throw Error("kappa-completeness is defined for ultrafilters");
  if (kappa < 1) throw Error("kappa must be positive");

  // Intersection form: every subfamily of fewer than kappa members has
  // its intersection in U. Intersections shrink as subfamilies grow and
  // U is upward closed, so it suffices to look at subfamilies of size
  // exactly min(kappa-1, |U|), and the total intersection settles the
  // question outright when it lies in U.
  bool by_intersections;
  const std::size_t n = U.sets.size();
  const std::size_t k = std::min<std::size_t>(kappa - 1, n);
  Mask total = U.full();
  for (Mask m : U.sets) total &= m;
  if (U.contains(total)) {
    by_intersections = true;
  } else if (k == n) {
    by_intersections = false;
  } else {
    by_intersections = true;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::uint64_t work = 0;
    for (;;) {
      if (++work > 2000000)
        throw Error("completeness check exceeds the exhaustive-work guard");
      Mask inter = U.full();
      for (std::size_t i : idx) inter &= U.sets[i];
      if (!U.contains(inter)) {
        by_intersections = false;
        break;
      }
      // next combination
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }

  // Partition form: every partition into fewer than kappa parts has a
  // part in U.
  if (U.ground_size > 9)
    throw Error("partition characterization limited to ground sets of size <= 9");
  bool by_partitions = true;
  for (const auto& part : all_partitions(U.ground_size)) {
    if (static_cast<int>(part.size()) >= kappa) continue;
    bool some_part_in = false;
    for (const auto& block : part) {
      Mask m = 0;
      for (int e : block) m |= Mask(1) << e;
      if (U.contains(m)) {
        some_part_in = true;
        break;
      }
    }
    if (!some_part_in) {
      by_partitions = false;
      break;
    }
  }

  if (by_intersections != by_partitions)
    throw Error("kappa-completeness characterizations disagree (internal bug)");
  return by_intersections;
}

std::string to_string_mask(Mask m, const FilterFamily& U) {
  std::string s = "{";
  bool first = true;
  for (int e = 0; e < U.ground_size; ++e) {
    if (!(m & (Mask(1) << e))) continue;
    if (!first) s += ",";
    first = false;
    s += U.ground_names.empty() ? std::to_string(e) : U.ground_names[e];
  }
  return s + "}";
}

}  // namespace powlab
