#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "powlab/syntax.hpp"

namespace powlab {

using Mask = std::uint32_t;

/// Explicit family of subsets of a finite ground set, validated as a
/// filter. Classification flags are recomputed from the family, never
/// trusted from input. Ground sets are capped at 20 elements so that
/// subsets fit in a Mask.
struct FilterFamily {
  int ground_size = 0;
  std::vector<std::string> ground_names;  // may be empty (unnamed ground set)
  std::vector<Mask> sets;                 // sorted, deduplicated
  bool ultrafilter = false;
  std::optional<int> principal_at;         // generator element, if principal ultrafilter
  bool tails_for_declared_order = false;   // contains every tail k..n-1

  bool contains(Mask m) const;
  Mask full() const { return ground_size >= 32 ? ~Mask(0) : ((Mask(1) << ground_size) - 1); }
};

/// Validates the family as a filter and computes the flags. Throws with
/// the name of the first violated axiom otherwise.
FilterFamily validate_filter(int ground_size, std::vector<Mask> sets,
                             std::vector<std::string> ground_names = {});

FilterFamily principal_ultrafilter(int ground_size, int elem,
                                   std::vector<std::string> ground_names = {});

/// Every ultrafilter over a finite ground set (all principal), in
/// element order.
std::vector<FilterFamily> all_ultrafilters(int ground_size);

/// All partitions of {0..n-1} into blocks; blocks and block lists are in
/// canonical (least-member) order.
std::vector<std::vector<std::vector<int>>> all_partitions(int n);

/// kappa-completeness of an ultrafilter: closed under intersections of
/// fewer than kappa members. Also evaluates the partition
/// characterization (every partition of the ground set into fewer than
/// kappa parts has a part in U) and throws if the two disagree.
bool is_kappa_complete(const FilterFamily& U, int kappa);

std::string to_string_mask(Mask m, const FilterFamily& U);

}  // namespace powlab
