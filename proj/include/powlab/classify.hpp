#pragma once

#include "powlab/cumulative.hpp"
#include "powlab/model.hpp"

namespace powlab {

/// Horn test on a CNF-mode prenex form: at most one positive literal
/// per clause.
bool is_horn(const PrenexForm& p);

/// All equality atoms of positive polarity, with matrix locators.
std::vector<AtomOccurrence> positive_equalities(const PrenexForm& p);

enum class EqCond { I, II, III, None };

struct EqualityClassification {
  std::size_t clause = 0;
  std::size_t index = 0;
  bool noncollapsible = false;
  EqCond via = EqCond::None;
  std::string evidence;
};

/// Classifies one positive equality occurrence of a closed CNF form.
/// Condition (i): one side has no variables. Condition (ii), strict
/// reading: every universally-quantified or free variable on either side
/// occurs on the other side as well. Condition (iii): each side has an
/// existentially bound variable or a constant.
EqualityClassification classify_equality(const PrenexForm& p,
                                         const AtomOccurrence& occ);

std::vector<EqualityClassification> noncoll_set(const PrenexForm& p);

struct FormulaVerdict {
  bool noncollapsible = false;
  EqCond via = EqCond::None;
  std::vector<EqualityClassification> equalities;
  std::vector<std::size_t> noncoll;  // indices into `equalities`
  bool constant_free = false;
  bool horn = false;
  bool disjunction_of_horn = false;
  int oracle_bound = 0;
  // Trace of condition (iii): the paper-literal evaluation quantifies
  // only over the non-collapsible equalities of each conjunct, which is
  // vacuously true when all equalities are collapsible. The verdict
  // instead quantifies over every positive equality of the conjunct
  // (the reading the preservation argument actually uses); both values
  // are recorded.
  bool literal_iii = false;
  bool literal_iii_vacuous = false;
  std::vector<std::string> trace;
};

FormulaVerdict classify_formula(const PrenexForm& p, const Signature& sig,
                                int oracle_bound);

// --- ladders and the product predicate ---------------------------------------

struct LadderConfig {
  int cap = 3;
  int consistency_bound = 3;
};

struct PhiMembership {
  bool member = false;
  bool bounded_consistency_used = false;
};

/// Structural membership in the ladder layer over the given atoms, with
/// the fixed variable enumeration x0, x1, ... (layer n+1 quantifies
/// x_n; existential when n is even, universal when n is odd). The
/// starred variant also requires each conjunction to be consistent,
/// checked by bounded model search.
PhiMembership phi_member(const std::vector<Formula>& atoms, int n, bool starred,
                         const Formula& candidate, const Signature& sig,
                         const LadderConfig& cfg = {});

struct ProductCheck {
  bool holds = false;
  std::string counterexample;
};

/// Bounded product implication for quantifier-free formulas over a
/// shared variable list: whenever the first structure satisfies phi and
/// the second psi at matching tuples, the direct product satisfies gamma
/// at the paired tuple. Exhaustive over total structures of carrier
/// size <= bound.
ProductCheck product_implies_base(const Formula& phi, const Formula& psi,
                                  const Formula& gamma, const Signature& sig,
                                  int bound);

struct WeinsteinConfig {
  int cap = 3;
  int product_bound = 3;
};

/// Weinstein's recursive predicate over a common ladder layer; the base
/// layer delegates to product_implies_base. The cache overload shares
/// base-oracle results across calls (keyed on base-layer triples).
using WeinsteinCache = std::map<std::tuple<Formula, Formula, Formula>, bool>;

bool weinstein_R(const Formula& phi, const Formula& psi, const Formula& gamma,
                 const Signature& sig, const WeinsteinConfig& cfg = {});
bool weinstein_R(const Formula& phi, const Formula& psi, const Formula& gamma,
                 const Signature& sig, const WeinsteinConfig& cfg,
                 WeinsteinCache& cache);

// --- direct power sentences ---------------------------------------------------

struct DpsConfig {
  int cap = 4;          // ladder cap
  int bound = 3;        // structure search bound
  int index_bound = 3;  // power index sizes 2..index_bound
  int product_bound = 2;  // base product check; 2 keeps function-rich
                          // signatures enumerable
  std::size_t size_guard = 200000;
};

enum class Tri { Yes, No, Unknown };

struct DpsVerdict {
  // Syntactic side: R on the canonical ladder form, when one exists
  // under the cap.
  Tri syntactic = Tri::Unknown;
  std::string ladder_note;
  std::optional<Formula> ladder_form;
  // Empirical side: brute-force preservation searches, reported
  // independently for direct powers and for the stage-1 cumulative
  // power.
  bool preserved_by_direct_powers = false;
  std::string direct_witness;
  bool preserved_by_cumulative = false;
  std::string cumulative_witness;
};

DpsVerdict is_direct_power_sentence(const Formula& sentence, const Signature& sig,
                                    const DpsConfig& cfg = {});

/// Sub-signature of exactly the symbols occurring in the formula.
Signature restrict_signature(const Formula& f, const Signature& sig);

/// Canonical ladder form of a closed formula: prenex DNF with the
/// quantifier prefix padded to the strict existential/universal
/// alternation and renamed to the ladder variable enumeration. Empty
/// when the required layer exceeds the cap.
std::optional<Formula> ladderize(const Formula& sentence, int cap,
                                 int* layer_out = nullptr);

}  // namespace powlab
