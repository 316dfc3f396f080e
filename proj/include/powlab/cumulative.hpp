#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "powlab/model.hpp"

namespace powlab {

/// Ordered family of named finite index sets I_0, I_1, ... Every set
/// must have at least two members and names may not repeat across
/// stages.
struct IndexFamily {
  struct Set {
    std::string name;
    std::vector<std::string> members;
  };
  std::vector<Set> sets;

  void validate() const;
  int stages() const { return static_cast<int>(sets.size()); }
  int size(int m) const { return static_cast<int>(sets[m].members.size()); }
};

IndexFamily uniform_family(int stages, int size);

/// Position of an index element: member `pos` of index set I_{set}.
struct IndexElem {
  int set = 0;
  int pos = 0;
};

/// Element of the function hierarchy: either a base element or a total
/// map from a named index set into lower-level elements. Equality is
/// structural identity. The level is the tag depth: Base elements live
/// at level 0 and a map over I_m at level m+1 (index-set names never
/// repeat, so minimality degenerates to depth).
struct HierElement {
  bool is_base = true;
  Elem base = 0;
  int index_set = -1;               // family position m, for maps over I_m
  std::vector<HierElement> values;  // one per member of I_m

  static HierElement mk_base(Elem a);
  static HierElement mk_func(int index_set, std::vector<HierElement> values);
  int level() const { return is_base ? 0 : index_set + 1; }
};

int compare(const HierElement& a, const HierElement& b);
bool operator==(const HierElement& a, const HierElement& b);
bool operator!=(const HierElement& a, const HierElement& b);
bool operator<(const HierElement& a, const HierElement& b);
std::string to_string(const HierElement& e);

/// Least stage containing the element; throws on malformed elements
/// (wrong domain size or value levels).
int level(const HierElement& e, const IndexFamily& fam);

/// The hereditary function: value at j when the element's level reaches
/// alpha and j lies in its domain, the element itself otherwise.
HierElement vartheta(int alpha, IndexElem j, const HierElement& e);

/// Finite stage of the cumulative power hierarchy: materialized carrier
/// of all elements of level <= stage over the base structure, with
/// hereditarily defined operations and relations. In plus mode the
/// sigma-constants are interpreted as the stage-th hereditary constants.
struct CumulativePower {
  FiniteStructure base;
  IndexFamily fam;
  int stage = 0;
  bool plus = false;
  std::vector<HierElement> carrier;   // canonical order; stage-m prefix is F_m
  std::vector<int> stage_sizes;       // carrier size of each stage 0..stage

  int index_of(const HierElement& e) const;
  const HierElement& at(int i) const { return carrier[i]; }

  std::map<HierElement, int> index;  // filled by build_level
};

CumulativePower build_level(const FiniteStructure& S, const IndexFamily& fam,
                            int n, bool plus, std::size_t size_guard = 200000);

std::optional<HierElement> apply_operation(const CumulativePower& cp,
                                           const std::string& F,
                                           const std::vector<HierElement>& args);
bool holds_relation(const CumulativePower& cp, const std::string& R,
                    const std::vector<HierElement>& args);

/// Membership in the recursively generated constant set c_{stage}.
bool constant_predicate(const CumulativePower& cp, const std::string& c,
                        const HierElement& e);

/// The n-th hereditary constant: the base interpretation at n = 0, then
/// the constant function over I_{m} valued at the previous one.
HierElement hereditary_constant(const CumulativePower& cp, const std::string& c,
                                int n);

/// Identity on level-1 elements; base elements map to their constant
/// function over I_0. Total and surjective onto the level-1 shapes.
HierElement vartheta_inverse(const CumulativePower& cp, const HierElement& e);

/// Renders the stage as a FiniteStructure over carrier positions.
/// Constants are interpreted (as hereditary constants) only when
/// with_constants is set; otherwise the constant slots are dropped from
/// the signature.
FiniteStructure materialize(const CumulativePower& cp, bool with_constants);

using HierAssignment = std::map<std::string, HierElement>;

/// Satisfaction on the stage; in non-plus mode the formula must be
/// constant-free.
bool satisfies_cumulative(const CumulativePower& cp, const Formula& f,
                          const HierAssignment& a);
bool satisfies_cumulative(const CumulativePower& cp, const Formula& f);

/// Lifts an embedding e : A -> B through the hierarchies, coordinate-wise
/// along the injections u_m : I_m -> J_m with off-image coordinates
/// filled from the designated image index (least by default). Returns
/// the stage-n map on carriers; verified as an embedding.
struct LiftedEmbedding {
  std::map<HierElement, HierElement> map;
  bool verified = false;
};

LiftedEmbedding lift_embedding(const FiniteStructure& A, const FiniteStructure& B,
                               const std::vector<Elem>& e, const IndexFamily& famA,
                               const IndexFamily& famB,
                               const std::vector<std::vector<int>>& u, int n,
                               std::size_t size_guard = 200000);

}  // namespace powlab
