#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace powlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// First-order signature: function and relation symbols with positive
/// arity, plus constant symbols. Symbol names are unique across all
/// three categories.
struct Signature {
  std::map<std::string, int> functions;
  std::map<std::string, int> relations;
  std::set<std::string> constants;

  void add_function(const std::string& name, int arity);
  void add_relation(const std::string& name, int arity);
  void add_constant(const std::string& name);
  bool knows(const std::string& name) const;
};

struct Term {
  enum class Kind { Var, Const, App };
  Kind kind = Kind::Var;
  std::string name;
  std::vector<Term> args;  // only for App

  static Term var(std::string n);
  static Term cons(std::string n);
  static Term app(std::string f, std::vector<Term> as);
};

int compare(const Term& a, const Term& b);
bool operator==(const Term& a, const Term& b);
bool operator!=(const Term& a, const Term& b);
bool operator<(const Term& a, const Term& b);

struct Formula {
  enum class Kind { Equal, Rel, Not, And, Or, Implies, ForAll, Exists };
  Kind kind = Kind::Equal;
  std::string name;            // relation symbol or bound variable
  std::vector<Term> terms;     // Equal: exactly 2; Rel: arity many
  std::vector<Formula> kids;   // Not: 1; And/Or/Implies: 2; quantifier: 1

  static Formula eq(Term l, Term r);
  static Formula rel(std::string r, std::vector<Term> as);
  static Formula lnot(Formula f);
  static Formula land(Formula l, Formula r);
  static Formula lor(Formula l, Formula r);
  static Formula limp(Formula l, Formula r);
  static Formula forall(std::string v, Formula body);
  static Formula exists(std::string v, Formula body);

  bool is_atom() const { return kind == Kind::Equal || kind == Kind::Rel; }
};

int compare(const Formula& a, const Formula& b);
bool operator==(const Formula& a, const Formula& b);
bool operator!=(const Formula& a, const Formula& b);
bool operator<(const Formula& a, const Formula& b);

/// Parses the textual formula grammar: variables [a-z][a-zA-Z0-9_]*,
/// connectives ! & | ->, quantifiers `forall v.` / `exists v.`,
/// equality =, application f(t1,...,tk). `&` binds tighter than `|`
/// binds tighter than `->`; quantifiers extend maximally right.
Formula parse_formula(const std::string& text, const Signature& sig);
Term parse_term(const std::string& text, const Signature& sig);

std::string to_string(const Term& t);
std::string to_string(const Formula& f);

std::set<std::string> variables(const Term& t);
std::set<std::string> free_variables(const Formula& f);
bool mentions_constant(const Term& t);
bool mentions_constant(const Formula& f);
int quantifier_rank(const Formula& f);

enum class Quant { ForAll, Exists };

struct Literal {
  bool positive = true;
  Formula atom;  // kind Equal or Rel
};

int compare(const Literal& a, const Literal& b);
bool operator==(const Literal& a, const Literal& b);
bool operator<(const Literal& a, const Literal& b);

/// Prenex normal form with a clause matrix. In CNF mode the matrix is a
/// conjunction of clauses, each clause a disjunction of literals; DNF
/// mode dualizes (cubes of conjoined literals). Bound variables are
/// renamed apart to x0, x1, ... in first-occurrence order, skipping any
/// name already free in the input.
struct PrenexForm {
  enum class Mode { CNF, DNF };
  Mode mode = Mode::CNF;
  std::vector<std::pair<Quant, std::string>> prefix;
  std::vector<std::vector<Literal>> matrix;

  Formula to_formula() const;
  bool closed() const;
};

PrenexForm to_pcnf(const Formula& f, std::size_t max_literals = 10000);
PrenexForm to_pdnf(const Formula& f, std::size_t max_literals = 10000);

struct AtomOccurrence {
  std::size_t clause = 0;
  std::size_t index = 0;
  Formula atom;
  bool positive = true;
};

/// Lists every literal of a CNF-mode matrix exactly once with its
/// polarity (positive = preceded by an even number of negations after
/// normalization).
std::vector<AtomOccurrence> atom_occurrences(const PrenexForm& p);

}  // namespace powlab
