#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "powlab/filter.hpp"
#include "powlab/syntax.hpp"

namespace powlab {

using Elem = int;

/// Finite sigma-structure with partial function tables. The carrier is
/// {0..n-1}; `elems` carries display names. Absent table entries mean
/// the function is undefined there.
struct FiniteStructure {
  Signature sig;
  std::string name;
  std::vector<std::string> elems;
  std::map<std::string, std::map<std::vector<Elem>, Elem>> funcs;
  std::map<std::string, std::set<std::vector<Elem>>> rels;
  std::map<std::string, Elem> consts;

  int size() const { return static_cast<int>(elems.size()); }
  void validate() const;
  bool total() const;
};

/// Carrier {0..n-1} with default element names.
FiniteStructure make_structure(Signature sig, int n, std::string name = "S");

using Assignment = std::map<std::string, Elem>;

std::optional<Elem> eval_term(const FiniteStructure& S, const Term& t,
                              const Assignment& a);

/// Tarskian satisfaction by exhaustive quantification. An atom whose
/// term evaluates UNDEFINED is false; its negation is true.
bool satisfies(const FiniteStructure& S, const Formula& f, const Assignment& a);
bool satisfies(const FiniteStructure& S, const Formula& f);

// --- powers and products ----------------------------------------------------

/// Value-sequence view of a direct power carrier: element k of S^I has
/// digits decode(k), listed in index order; encode is its inverse.
/// Elements are ordered lexicographically by value sequence.
struct PowerView {
  int base_size = 0;
  int index_size = 0;
  std::vector<Elem> decode(Elem id) const;
  Elem encode(const std::vector<Elem>& digits) const;
  Elem carrier_size() const;
};

FiniteStructure direct_power(const FiniteStructure& S, int index_size,
                             std::size_t size_guard = 200000);
FiniteStructure direct_product(const FiniteStructure& A, const FiniteStructure& B);

// --- quotients --------------------------------------------------------------

/// Partition of a carrier into classes with induced interpretations.
/// Classes are listed by least member; the canonical representative of
/// a class is its least member. Induced functions and relations use the
/// existential clause over representatives; well-definedness of the
/// functions is verified exhaustively at build time.
struct QuotientStructure {
  FiniteStructure quotient;                // classes as elements
  std::vector<std::vector<Elem>> classes;  // class -> ascending members
  std::vector<int> class_of;               // source element -> class
  std::string provenance;

  int class_count() const { return static_cast<int>(classes.size()); }
  Elem rep(int cls) const { return classes[cls].front(); }
};

QuotientStructure make_quotient(const FiniteStructure& S,
                                const std::function<bool(Elem, Elem)>& equiv,
                                std::string provenance);

/// Plain ultrapower S^I / U with classes of pointwise agreement on an
/// ultrafilter-large set.
QuotientStructure ultrapower(const FiniteStructure& S, int index_size,
                             const FilterFamily& U,
                             std::size_t size_guard = 200000);

// --- enumeration ------------------------------------------------------------

/// Lazily enumerates every labeled structure with carrier {0..k-1} for
/// k = 1..max_size in a fixed deterministic order. The totality flag
/// restricts function tables to total ones.
class StructureStream {
 public:
  StructureStream(Signature sig, int max_size, bool total);
  std::optional<FiniteStructure> next();

 private:
  void start_size(int k);
  FiniteStructure materialize() const;

  Signature sig_;
  int max_size_;
  bool total_;
  int k_ = 0;
  bool exhausted_ = false;
  std::vector<int> digits_;
  std::vector<int> radices_;
};

std::vector<FiniteStructure> all_structures(const Signature& sig, int max_size,
                                            bool total);

// --- embeddings and isomorphisms --------------------------------------------

/// Strong embedding: injective, preserves constants, function tables
/// including definedness, and relations in both directions.
bool is_embedding(const FiniteStructure& A, const FiniteStructure& B,
                  const std::vector<Elem>& map);
bool is_isomorphism(const FiniteStructure& A, const FiniteStructure& B,
                    const std::vector<Elem>& map);

std::optional<std::vector<Elem>> find_embedding(const FiniteStructure& A,
                                                const FiniteStructure& B);
std::optional<std::vector<Elem>> find_isomorphism(const FiniteStructure& A,
                                                  const FiniteStructure& B);
std::vector<std::vector<Elem>> all_embeddings(const FiniteStructure& A,
                                              const FiniteStructure& B);

// --- bounded semantic oracle ------------------------------------------------

struct EntailmentResult {
  bool refuted = false;
  int bound = 0;
  std::optional<FiniteStructure> witness_structure;
  Assignment witness_assignment;
};

/// Bounded refutation oracle for `premise |- conclusion`: searches total
/// structures of carrier size <= bound and all assignments for a
/// counterexample. Sound for refutation; incomplete for validity.
EntailmentResult bounded_entailment(const Formula& premise,
                                    const Formula& conclusion,
                                    const Signature& sig, int bound);

struct PreservationReport {
  bool holds_in_source = false;
  bool holds_in_target = false;
};

PreservationReport check_preserved(const FiniteStructure& S, const Formula& sentence,
                                   const FiniteStructure& target);

}  // namespace powlab
