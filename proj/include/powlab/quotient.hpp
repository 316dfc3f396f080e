#pragma once

#include "powlab/cumulative.hpp"

namespace powlab {

/// Hereditary identity: identity at level 0, then agreement of all
/// hereditary images over the index set of the higher level.
bool hereditary_equal(const CumulativePower& cp, const HierElement& a,
                      const HierElement& b);

/// The ultrafilter relation: identity at level 0, then hereditary
/// agreement on an ultrafilter-large set of indices. Us[m] must be an
/// ultrafilter over I_m.
bool ultra_equal(const CumulativePower& cp, const HierElement& a,
                 const HierElement& b, const std::vector<FilterFamily>& Us);

/// Quotient of a stage by hereditary identity (isomorphic to the
/// iterated direct power) or by the ultrafilter relation (isomorphic to
/// the iterated ultrapower). Constants of the signature are interpreted
/// as the classes of the hereditary constants.
QuotientStructure quotient_hereditary(const CumulativePower& cp);
QuotientStructure quotient_ultra(const CumulativePower& cp,
                                 const std::vector<FilterFamily>& Us);

/// Iterated direct power over the family prefix I_0 .. I_{n-1}.
FiniteStructure direct_power_level(const FiniteStructure& S, const IndexFamily& fam,
                                   int n, std::size_t size_guard = 200000);

/// Iterated ultrapower over the same parameters.
QuotientStructure ultrapower_level(const FiniteStructure& S, const IndexFamily& fam,
                                   const std::vector<FilterFamily>& Us, int n,
                                   std::size_t size_guard = 200000);

struct IsoReport {
  bool verified = false;
  std::vector<int> map;  // source carrier -> target carrier
  std::string detail;
};

/// The canonical map x -> [x] from the stage-n iterated direct power
/// onto the hereditary-identity quotient, verified exhaustively.
IsoReport canonical_iso_direct(const FiniteStructure& S, const IndexFamily& fam,
                               int n, std::size_t size_guard = 200000);

/// The analogous map between the stage-n iterated ultrapower and the
/// ultrafilter-relation quotient, matched through representatives.
IsoReport canonical_iso_ultra(const FiniteStructure& S, const IndexFamily& fam,
                              const std::vector<FilterFamily>& Us, int n,
                              std::size_t size_guard = 200000);

struct InducedUltrafilter {
  FilterFamily on_classes;
  std::vector<int> rk_witness;  // h : ground -> classes, the class-of map
};

/// Pushes an ultrafilter through a partition: U' = images of members.
/// Validates the result and returns the class-of map as the verified
/// Rudin-Keisler witness.
InducedUltrafilter induced_ultrafilter_on_quotient(
    const FilterFamily& U, const std::vector<std::vector<int>>& partition);

struct InducedFilterBase {
  std::vector<Mask> base_sets;    // over the carrier
  FilterFamily extension;          // principal ultrafilter extending the base
  int chosen_point = -1;
};

/// Pulls an ultrafilter on classes back to a filter base on the carrier
/// ({x | [x] in X} for X in U), extended to the principal ultrafilter at
/// the least point of the minimal member. The extension's image through
/// the partition recovers U.
InducedFilterBase induced_filterbase_on_carrier(
    const FilterFamily& U_classes, const std::vector<std::vector<int>>& partition);

struct LosReport {
  struct Row {
    std::string formula;
    bool in_quotient = false;
    bool los_side = false;
    bool agree = false;
  };
  std::vector<Row> rows;
  bool all_agree = true;
};

/// For each closed sentence, evaluates truth in the stage-1 ultrafilter
/// quotient and, independently, membership of its index set in U.
LosReport los_check(const FiniteStructure& S, int index_size, const FilterFamily& U,
                    const std::vector<Formula>& sentences,
                    std::size_t size_guard = 200000);

}  // namespace powlab
