#pragma once

#include "powlab/model.hpp"

namespace powlab {

/// Support of a structure: elements at which every function is defined
/// in every argument position against every choice of the other
/// arguments. Anti-support is the rest.
struct SupportProfile {
  std::vector<Elem> support;
  std::vector<Elem> anti_support;
  std::map<Elem, std::string> evidence;  // anti-support witness per element
};

SupportProfile support(const FiniteStructure& S);

/// rep(A^I): constant functions at anti-support elements plus functions
/// ranging inside the support. Returned as carrier ids of the direct
/// power.
std::vector<Elem> rep_set(const FiniteStructure& S, int index_size,
                          std::size_t size_guard = 200000);

struct RepresentativeReport {
  bool all_have_rep = false;
  bool complete = false;  // kappa^+-completeness, kappa = |anti-support|
  std::map<int, Elem> witnesses;  // class -> representative in rep(A^I)
};

/// Both sides of the representatives theorem, asserted to agree.
RepresentativeReport representative_check(const FiniteStructure& S, int index_size,
                                          const FilterFamily& U,
                                          std::size_t size_guard = 200000);

/// Tuple counts per element: producing tuples, consuming tuples (other
/// arguments plus result, the distinguished element inserted at any
/// position), and relating tuples; tau is their total, tau_max the
/// structure invariant.
struct TauProfile {
  struct PerElem {
    std::map<std::string, std::size_t> down;  // per function
    std::map<std::string, std::size_t> up;    // per function
    std::map<std::string, std::size_t> rel;   // per relation
    std::size_t tau = 0;
  };
  std::vector<PerElem> per_elem;
  std::size_t tau_max = 0;
  Elem witness = 0;
};

TauProfile tau_profile(const FiniteStructure& S);

/// First h : J -> I (in canonical order) with X in U_I iff h^{-1}[X] in
/// U_J, or nothing.
std::optional<std::vector<int>> rk_compare(const FilterFamily& U_I,
                                           const FilterFamily& U_J);
bool rk_witnesses(const FilterFamily& U_I, const FilterFamily& U_J,
                  const std::vector<int>& h);

struct SetMapFlags {
  bool multiplicative = false;
  bool additive = false;
  bool subtractive = false;
  bool covering = false;
  bool all() const { return multiplicative && additive && subtractive && covering; }
};

/// Exhaustive property check of a powerset map H : P(I) -> P(J).
SetMapFlags set_map_properties(int I_size, int J_size,
                               const std::function<Mask(Mask)>& H);

/// w(f) = u o f o h, asserted against the defining fiber condition
/// { j | w(f)(j) = u(a) } = h^{-1}[{ i | f(i) = a }].
std::vector<Elem> w_transport(const std::vector<Elem>& u, int B_size,
                              const std::vector<int>& h, const std::vector<Elem>& f);

struct RkEmbeddingReport {
  bool well_defined = false;
  bool embedding = false;   // well-defined, injective, preserving
  bool rk = false;          // the supplied h witnesses U_I <=_RK U_J
  std::vector<int> e_map;   // ultrapower class -> ultrapower class
  std::string detail;
};

/// Builds e : A^I/U_I -> B^J/U_J, [f] -> [w(f)], verifies the embedding
/// properties exhaustively and independently evaluates whether h is an
/// RK witness; throws if the two verdicts differ. The biconditional is
/// asserted only for |A| > 1 (singleton carriers make every map an
/// embedding regardless of h).
RkEmbeddingReport rk_embedding(const FiniteStructure& A, const FiniteStructure& B,
                               const std::vector<Elem>& u, const std::vector<int>& h,
                               const FilterFamily& U_I, const FilterFamily& U_J,
                               std::size_t size_guard = 200000);

/// Grid-sweep variant over prebuilt ultrapowers of A and B.
RkEmbeddingReport rk_embedding(const FiniteStructure& A, const FiniteStructure& B,
                               const std::vector<Elem>& u, const std::vector<int>& h,
                               const FilterFamily& U_I, const FilterFamily& U_J,
                               const QuotientStructure& QA,
                               const QuotientStructure& QB);

struct DirectPowerEmbeddingReport {
  bool embedding = false;     // constructed map verified
  bool tau_complete = false;  // U is tau^+-complete for tau of the ultrapower
  std::size_t tau_value = 0;
  std::map<int, Elem> e;      // class -> direct power element
};

/// Constructive direction of the choice-function embedding of an
/// ultrapower into its direct power: seeds the natural embedding on
/// classes of constant functions, then extends class by class through
/// the intersection sets, patching representatives. The result is
/// verified and compared against tau^+-completeness; disagreement
/// throws.
DirectPowerEmbeddingReport embed_into_direct_power(const FiniteStructure& S,
                                                   int index_size,
                                                   const FilterFamily& U,
                                                   bool seed_constants = true,
                                                   std::size_t size_guard = 200000);

/// Binary relation saturation: every small enough set of left elements
/// with individual right witnesses has a common right witness.
bool kappa_concurrent(const FiniteStructure& S, const std::string& R, int kappa);

struct ClassSizeReport {
  bool uniform = false;
  std::size_t size = 0;
  std::vector<std::size_t> sizes;
};

ClassSizeReport class_size_uniformity(const FiniteStructure& S, int index_size,
                                      const FilterFamily& U,
                                      std::size_t size_guard = 200000);

}  // namespace powlab
