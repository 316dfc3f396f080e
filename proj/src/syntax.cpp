#include "powlab/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace powlab {

void Signature::add_function(const std::string& name, int arity) {
  if (arity < 1) throw Error("function arity must be positive: " + name);
  if (knows(name)) throw Error("duplicate symbol: " + name);
  functions[name] = arity;
}

void Signature::add_relation(const std::string& name, int arity) {
  if (arity < 1) throw Error("relation arity must be positive: " + name);
  if (knows(name)) throw Error("duplicate symbol: " + name);
  relations[name] = arity;
}

void Signature::add_constant(const std::string& name) {
  if (knows(name)) throw Error("duplicate symbol: " + name);
  constants.insert(name);
}

bool Signature::knows(const std::string& name) const {
  return functions.count(name) || relations.count(name) || constants.count(name);
}

Term Term::var(std::string n) { return Term{Kind::Var, std::move(n), {}}; }
Term Term::cons(std::string n) { return Term{Kind::Const, std::move(n), {}}; }
Term Term::app(std::string f, std::vector<Term> as) {
  return Term{Kind::App, std::move(f), std::move(as)};
}

int compare(const Term& a, const Term& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (int c = a.name.compare(b.name)) return c < 0 ? -1 : 1;
  if (a.args.size() != b.args.size())
    return a.args.size() < b.args.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (int c = compare(a.args[i], b.args[i])) return c;
  return 0;
}
bool operator==(const Term& a, const Term& b) { return compare(a, b) == 0; }
bool operator!=(const Term& a, const Term& b) { return compare(a, b) != 0; }
bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }

Formula Formula::eq(Term l, Term r) {
  Formula f;
  f.kind = Kind::Equal;
  f.terms = {std::move(l), std::move(r)};
  return f;
}
Formula Formula::rel(std::string r, std::vector<Term> as) {
  Formula f;
  f.kind = Kind::Rel;
  f.name = std::move(r);
  f.terms = std::move(as);
  return f;
}
Formula Formula::lnot(Formula g) {
  Formula f;
  f.kind = Kind::Not;
  f.kids = {std::move(g)};
  return f;
}
static Formula binary(Formula::Kind k, Formula l, Formula r) {
  Formula f;
  f.kind = k;
  f.kids = {std::move(l), std::move(r)};
  return f;
}
Formula Formula::land(Formula l, Formula r) {
  return binary(Kind::And, std::move(l), std::move(r));
}
Formula Formula::lor(Formula l, Formula r) {
  return binary(Kind::Or, std::move(l), std::move(r));
}
Formula Formula::limp(Formula l, Formula r) {
  return binary(Kind::Implies, std::move(l), std::move(r));
}
Formula Formula::forall(std::string v, Formula body) {
  Formula f;
  f.kind = Kind::ForAll;
  f.name = std::move(v);
  f.kids = {std::move(body)};
  return f;
}
Formula Formula::exists(std::string v, Formula body) {
  Formula f;
  f.kind = Kind::Exists;
  f.name = std::move(v);
  f.kids = {std::move(body)};
  return f;
}

int compare(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (int c = a.name.compare(b.name)) return c < 0 ? -1 : 1;
  if (a.terms.size() != b.terms.size())
    return a.terms.size() < b.terms.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.terms.size(); ++i)
    if (int c = compare(a.terms[i], b.terms[i])) return c;
  if (a.kids.size() != b.kids.size())
    return a.kids.size() < b.kids.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (int c = compare(a.kids[i], b.kids[i])) return c;
  return 0;
}
bool operator==(const Formula& a, const Formula& b) { return compare(a, b) == 0; }
bool operator!=(const Formula& a, const Formula& b) { return compare(a, b) != 0; }
bool operator<(const Formula& a, const Formula& b) { return compare(a, b) < 0; }

int compare(const Literal& a, const Literal& b) {
  if (a.positive != b.positive) return a.positive ? -1 : 1;
  return compare(a.atom, b.atom);
}
bool operator==(const Literal& a, const Literal& b) { return compare(a, b) == 0; }
bool operator<(const Literal& a, const Literal& b) { return compare(a, b) < 0; }

// ---------------------------------------------------------------------------
// Lexer / parser

namespace {

struct Token {
  enum class Kind { Ident, LParen, RParen, Comma, Dot, Eq, Not, And, Or, Arrow, End };
  Kind kind;
  std::string text;
  std::size_t pos;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (ident_char(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      out.push_back({Token::Kind::Ident, s.substr(i, j - i), start});
      i = j;
      continue;
    }
    switch (c) {
      case '(': out.push_back({Token::Kind::LParen, "(", start}); ++i; break;
      case ')': out.push_back({Token::Kind::RParen, ")", start}); ++i; break;
      case ',': out.push_back({Token::Kind::Comma, ",", start}); ++i; break;
      case '.': out.push_back({Token::Kind::Dot, ".", start}); ++i; break;
      case '=': out.push_back({Token::Kind::Eq, "=", start}); ++i; break;
      case '!': out.push_back({Token::Kind::Not, "!", start}); ++i; break;
      case '&': out.push_back({Token::Kind::And, "&", start}); ++i; break;
      case '|': out.push_back({Token::Kind::Or, "|", start}); ++i; break;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          out.push_back({Token::Kind::Arrow, "->", start});
          i += 2;
          break;
        }
        [[fallthrough]];
      default:
        throw Error("syntax error at position " + std::to_string(start) +
                    ": unexpected character '" + std::string(1, c) + "'");
    }
  }
  out.push_back({Token::Kind::End, "", s.size()});
  return out;
}

bool valid_variable(const std::string& n) {
  if (n.empty() || n[0] < 'a' || n[0] > 'z') return false;
  return std::all_of(n.begin(), n.end(), ident_char);
}

class Parser {
 public:
  Parser(const std::string& text, const Signature& sig)
      : toks_(lex(text)), sig_(sig) {}

  Formula formula() {
    Formula f = implies();
    expect(Token::Kind::End, "end of input");
    return f;
  }

  Term term_only() {
    Term t = term();
    expect(Token::Kind::End, "end of input");
    return t;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  Token take() { return toks_[i_++]; }

  [[noreturn]] void fail(const std::string& what) {
    throw Error("syntax error at position " + std::to_string(peek().pos) +
                ": expected " + what);
  }

  void expect(Token::Kind k, const std::string& what) {
    if (peek().kind != k) fail(what);
    ++i_;
  }

  Formula implies() {
    Formula l = disj();
    if (peek().kind == Token::Kind::Arrow) {
      take();
      return Formula::limp(std::move(l), implies());
    }
    return l;
  }

  Formula disj() {
    Formula l = conj();
    while (peek().kind == Token::Kind::Or) {
      take();
      l = Formula::lor(std::move(l), conj());
    }
    return l;
  }

  Formula conj() {
    Formula l = unary();
    while (peek().kind == Token::Kind::And) {
      take();
      l = Formula::land(std::move(l), unary());
    }
    return l;
  }

  Formula unary() {
    if (peek().kind == Token::Kind::Not) {
      take();
      return Formula::lnot(unary());
    }
    if (peek().kind == Token::Kind::Ident &&
        (peek().text == "forall" || peek().text == "exists")) {
      bool uni = take().text == "forall";
      if (peek().kind != Token::Kind::Ident) fail("a variable");
      std::string v = take().text;
      if (sig_.knows(v) || !valid_variable(v))
        throw Error("invalid bound variable '" + v + "'");
      expect(Token::Kind::Dot, "'.'");
      Formula body = implies();  // quantifier extends maximally right
      return uni ? Formula::forall(v, std::move(body))
                 : Formula::exists(v, std::move(body));
    }
    if (peek().kind == Token::Kind::LParen) {
      // Could open a grouped formula or a term; terms only arise inside
      // atoms, which never start with '('.
      take();
      Formula f = implies();
      expect(Token::Kind::RParen, "')'");
      return f;
    }
    return atom();
  }

  Formula atom() {
    if (peek().kind != Token::Kind::Ident) fail("an atom");
    // Relation atom?
    auto r = sig_.relations.find(peek().text);
    if (r != sig_.relations.end()) {
      std::string name = take().text;
      expect(Token::Kind::LParen, "'('");
      std::vector<Term> args = term_list();
      expect(Token::Kind::RParen, "')'");
      if (static_cast<int>(args.size()) != r->second)
        throw Error("arity mismatch for relation " + name);
      return Formula::rel(name, std::move(args));
    }
    Term l = term();
    expect(Token::Kind::Eq, "'='");
    Term rhs = term();
    return Formula::eq(std::move(l), std::move(rhs));
  }

  std::vector<Term> term_list() {
    std::vector<Term> out;
    out.push_back(term());
    while (peek().kind == Token::Kind::Comma) {
      take();
      out.push_back(term());
    }
    return out;
  }

  Term term() {
    if (peek().kind != Token::Kind::Ident) fail("a term");
    Token t = take();
    auto f = sig_.functions.find(t.text);
    if (f != sig_.functions.end()) {
      expect(Token::Kind::LParen, "'('");
      std::vector<Term> args = term_list();
      expect(Token::Kind::RParen, "')'");
      if (static_cast<int>(args.size()) != f->second)
        throw Error("arity mismatch for function " + t.text);
      return Term::app(t.text, std::move(args));
    }
    if (sig_.constants.count(t.text)) return Term::cons(t.text);
    if (sig_.relations.count(t.text))
      throw Error("relation symbol '" + t.text + "' used as a term");
    if (!valid_variable(t.text))
      throw Error("unknown symbol '" + t.text + "' at position " +
                  std::to_string(t.pos));
    return Term::var(t.text);
  }

  std::vector<Token> toks_;
  const Signature& sig_;
  std::size_t i_ = 0;
};

}  // namespace

Formula parse_formula(const std::string& text, const Signature& sig) {
  return Parser(text, sig).formula();
}

Term parse_term(const std::string& text, const Signature& sig) {
  return Parser(text, sig).term_only();
}

// ---------------------------------------------------------------------------
// Printing

std::string to_string(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var:
    case Term::Kind::Const:
      return t.name;
    case Term::Kind::App: {
      std::string s = t.name + "(";
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ",";
        s += to_string(t.args[i]);
      }
      return s + ")";
    }
  }
  return {};
}

namespace {

// Precedence levels: quantifier/atom = 4, not = 3, and = 2, or = 1, -> = 0.
int prec(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Implies: return 0;
    case Formula::Kind::Or: return 1;
    case Formula::Kind::And: return 2;
    case Formula::Kind::Not: return 3;
    default: return 4;
  }
}

void print(const Formula& f, std::string& out, int parent_prec) {
  bool need = prec(f) < parent_prec;
  // Quantifiers extend maximally right, so any enclosing operator must
  // parenthesize them.
  if ((f.kind == Formula::Kind::ForAll || f.kind == Formula::Kind::Exists) &&
      parent_prec > 0)
    need = true;
  if (need) out += "(";
  switch (f.kind) {
    case Formula::Kind::Equal:
      out += to_string(f.terms[0]) + " = " + to_string(f.terms[1]);
      break;
    case Formula::Kind::Rel: {
      out += f.name + "(";
      for (std::size_t i = 0; i < f.terms.size(); ++i) {
        if (i) out += ",";
        out += to_string(f.terms[i]);
      }
      out += ")";
      break;
    }
    case Formula::Kind::Not:
      out += "!";
      if (f.kids[0].kind == Formula::Kind::Equal) {
        out += "(";
        print(f.kids[0], out, 0);
        out += ")";
      } else {
        print(f.kids[0], out, 4);
      }
      break;
    case Formula::Kind::And:
      print(f.kids[0], out, 2);
      out += " & ";
      print(f.kids[1], out, 3);
      break;
    case Formula::Kind::Or:
      print(f.kids[0], out, 1);
      out += " | ";
      print(f.kids[1], out, 2);
      break;
    case Formula::Kind::Implies:
      print(f.kids[0], out, 1);
      out += " -> ";
      print(f.kids[1], out, 0);
      break;
    case Formula::Kind::ForAll:
      out += "forall " + f.name + ". ";
      print(f.kids[0], out, 0);
      break;
    case Formula::Kind::Exists:
      out += "exists " + f.name + ". ";
      print(f.kids[0], out, 0);
      break;
  }
  if (need) out += ")";
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Variable bookkeeping

static void collect_vars(const Term& t, std::set<std::string>& out) {
  if (t.kind == Term::Kind::Var) out.insert(t.name);
  for (const Term& a : t.args) collect_vars(a, out);
}

std::set<std::string> variables(const Term& t) {
  std::set<std::string> out;
  collect_vars(t, out);
  return out;
}

static void collect_free(const Formula& f, std::set<std::string>& bound,
                         std::set<std::string>& out) {
  switch (f.kind) {
    case Formula::Kind::Equal:
    case Formula::Kind::Rel:
      for (const Term& t : f.terms) {
        std::set<std::string> vs = variables(t);
        for (const auto& v : vs)
          if (!bound.count(v)) out.insert(v);
      }
      break;
    case Formula::Kind::ForAll:
    case Formula::Kind::Exists: {
      bool fresh = bound.insert(f.name).second;
      collect_free(f.kids[0], bound, out);
      if (fresh) bound.erase(f.name);
      break;
    }
    default:
      for (const Formula& k : f.kids) collect_free(k, bound, out);
  }
}

std::set<std::string> free_variables(const Formula& f) {
  std::set<std::string> bound, out;
  collect_free(f, bound, out);
  return out;
}

bool mentions_constant(const Term& t) {
  if (t.kind == Term::Kind::Const) return true;
  for (const Term& a : t.args)
    if (mentions_constant(a)) return true;
  return false;
}

bool mentions_constant(const Formula& f) {
  for (const Term& t : f.terms)
    if (mentions_constant(t)) return true;
  for (const Formula& k : f.kids)
    if (mentions_constant(k)) return true;
  return false;
}

int quantifier_rank(const Formula& f) {
  int m = 0;
  for (const Formula& k : f.kids) m = std::max(m, quantifier_rank(k));
  if (f.kind == Formula::Kind::ForAll || f.kind == Formula::Kind::Exists)
    return m + 1;
  return m;
}

// ---------------------------------------------------------------------------
// Prenex clause forms

namespace {

Formula elim_implies(const Formula& f) {
  if (f.kind == Formula::Kind::Implies)
    return Formula::lor(Formula::lnot(elim_implies(f.kids[0])),
                        elim_implies(f.kids[1]));
  Formula g = f;
  for (Formula& k : g.kids) k = elim_implies(k);
  return g;
}

// Negation normal form; input free of ->.
Formula nnf(const Formula& f, bool neg) {
  switch (f.kind) {
    case Formula::Kind::Equal:
    case Formula::Kind::Rel:
      return neg ? Formula::lnot(f) : f;
    case Formula::Kind::Not:
      return nnf(f.kids[0], !neg);
    case Formula::Kind::And:
      return neg ? Formula::lor(nnf(f.kids[0], true), nnf(f.kids[1], true))
                 : Formula::land(nnf(f.kids[0], false), nnf(f.kids[1], false));
    case Formula::Kind::Or:
      return neg ? Formula::land(nnf(f.kids[0], true), nnf(f.kids[1], true))
                 : Formula::lor(nnf(f.kids[0], false), nnf(f.kids[1], false));
    case Formula::Kind::ForAll:
      return neg ? Formula::exists(f.name, nnf(f.kids[0], true))
                 : Formula::forall(f.name, nnf(f.kids[0], false));
    case Formula::Kind::Exists:
      return neg ? Formula::forall(f.name, nnf(f.kids[0], true))
                 : Formula::exists(f.name, nnf(f.kids[0], false));
    case Formula::Kind::Implies:
      throw Error("internal: implication survived elimination");
  }
  throw Error("internal: bad formula kind");
}

Term rename_term(const Term& t, const std::string& from, const std::string& to) {
  if (t.kind == Term::Kind::Var)
    return t.name == from ? Term::var(to) : t;
  Term g = t;
  for (Term& a : g.args) a = rename_term(a, from, to);
  return g;
}

// Renames free occurrences of `from`; stops below a re-binding of `from`.
Formula rename_free(const Formula& f, const std::string& from,
                    const std::string& to) {
  if ((f.kind == Formula::Kind::ForAll || f.kind == Formula::Kind::Exists) &&
      f.name == from)
    return f;
  Formula g = f;
  for (Term& t : g.terms) t = rename_term(t, from, to);
  for (Formula& k : g.kids) k = rename_free(k, from, to);
  return g;
}

struct Renamer {
  std::set<std::string> taken;  // free variables of the original formula
  int counter = 0;

  std::string fresh() {
    for (;;) {
      std::string n = "x" + std::to_string(counter++);
      if (!taken.count(n)) return n;
    }
  }

  Formula apart(const Formula& f) {
    if (f.kind == Formula::Kind::ForAll || f.kind == Formula::Kind::Exists) {
      std::string v = fresh();
      Formula body = apart(rename_free(f.kids[0], f.name, v));
      return f.kind == Formula::Kind::ForAll ? Formula::forall(v, std::move(body))
                                             : Formula::exists(v, std::move(body));
    }
    Formula g = f;
    for (Formula& k : g.kids) k = apart(k);
    return g;
  }
};

// Pulls quantifiers of an NNF, renamed-apart formula to the front,
// depth-first left to right.
void pull_prefix(const Formula& f,
                 std::vector<std::pair<Quant, std::string>>& prefix,
                 Formula& body) {
  switch (f.kind) {
    case Formula::Kind::ForAll:
    case Formula::Kind::Exists: {
      prefix.emplace_back(
          f.kind == Formula::Kind::ForAll ? Quant::ForAll : Quant::Exists,
          f.name);
      pull_prefix(f.kids[0], prefix, body);
      break;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      Formula l, r;
      pull_prefix(f.kids[0], prefix, l);
      pull_prefix(f.kids[1], prefix, r);
      body = f.kind == Formula::Kind::And ? Formula::land(std::move(l), std::move(r))
                                          : Formula::lor(std::move(l), std::move(r));
      break;
    }
    default:
      body = f;
  }
}

using Clause = std::vector<Literal>;
using Matrix = std::vector<Clause>;

void append_dedup(Clause& c, const Literal& l) {
  for (const Literal& x : c)
    if (x == l) return;
  c.push_back(l);
}

Clause merge_clauses(const Clause& a, const Clause& b) {
  Clause out = a;
  for (const Literal& l : b) append_dedup(out, l);
  return out;
}

void append_clause_dedup(Matrix& m, const Clause& c) {
  for (const Clause& x : m)
    if (x.size() == c.size() && std::equal(x.begin(), x.end(), c.begin()))
      return;
  m.push_back(c);
}

std::size_t literal_count(const Matrix& m) {
  std::size_t n = 0;
  for (const Clause& c : m) n += c.size();
  return n;
}

// CNF when conjunctive=true; the quantifier-free body is NNF.
Matrix distribute(const Formula& f, bool conjunctive, std::size_t cap) {
  auto guard = [cap](const Matrix& m) {
    if (literal_count(m) > cap)
      throw Error("normal-form matrix exceeds size cap of " + std::to_string(cap));
    return m;
  };
  if (f.is_atom()) return {{Literal{true, f}}};
  if (f.kind == Formula::Kind::Not) {
    if (!f.kids[0].is_atom()) throw Error("internal: NNF violated");
    return {{Literal{false, f.kids[0]}}};
  }
  bool joins = (f.kind == Formula::Kind::And) == conjunctive;
  Matrix l = distribute(f.kids[0], conjunctive, cap);
  Matrix r = distribute(f.kids[1], conjunctive, cap);
  Matrix out;
  if (joins) {
    // The outer connective matches the matrix connective: concatenate.
    for (const Clause& c : l) append_clause_dedup(out, c);
    for (const Clause& c : r) append_clause_dedup(out, c);
  } else {
    for (const Clause& a : l)
      for (const Clause& b : r) append_clause_dedup(out, merge_clauses(a, b));
  }
  return guard(out);
}

PrenexForm normal_form(const Formula& f, bool cnf, std::size_t cap) {
  Formula g = nnf(elim_implies(f), false);
  Renamer ren;
  ren.taken = free_variables(f);
  g = ren.apart(g);
  PrenexForm p;
  p.mode = cnf ? PrenexForm::Mode::CNF : PrenexForm::Mode::DNF;
  Formula body;
  pull_prefix(g, p.prefix, body);
  p.matrix = distribute(body, cnf, cap);
  return p;
}

}  // namespace

PrenexForm to_pcnf(const Formula& f, std::size_t max_literals) {
  return normal_form(f, true, max_literals);
}

PrenexForm to_pdnf(const Formula& f, std::size_t max_literals) {
  return normal_form(f, false, max_literals);
}

Formula PrenexForm::to_formula() const {
  if (matrix.empty()) throw Error("empty matrix has no formula rendering");
  bool cnf = mode == Mode::CNF;
  auto lit = [](const Literal& l) {
    return l.positive ? l.atom : Formula::lnot(l.atom);
  };
  std::optional<Formula> whole;
  for (const auto& clause : matrix) {
    if (clause.empty()) throw Error("empty clause has no formula rendering");
    std::optional<Formula> cf;
    for (const Literal& l : clause) {
      Formula lf = lit(l);
      cf = cf ? (cnf ? Formula::lor(std::move(*cf), std::move(lf))
                     : Formula::land(std::move(*cf), std::move(lf)))
              : std::optional<Formula>(std::move(lf));
    }
    whole = whole ? (cnf ? Formula::land(std::move(*whole), std::move(*cf))
                         : Formula::lor(std::move(*whole), std::move(*cf)))
                  : cf;
  }
  Formula out = *whole;
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
    out = it->first == Quant::ForAll ? Formula::forall(it->second, std::move(out))
                                     : Formula::exists(it->second, std::move(out));
  return out;
}

bool PrenexForm::closed() const { return free_variables(to_formula()).empty(); }

std::vector<AtomOccurrence> atom_occurrences(const PrenexForm& p) {
  if (p.mode != PrenexForm::Mode::CNF)
    throw Error("atom_occurrences expects a CNF-mode form");
  std::vector<AtomOccurrence> out;
  for (std::size_t c = 0; c < p.matrix.size(); ++c)
    for (std::size_t i = 0; i < p.matrix[c].size(); ++i)
      out.push_back({c, i, p.matrix[c][i].atom, p.matrix[c][i].positive});
  return out;
}

}  // namespace powlab
