#include "powlab/classify.hpp"

#include <algorithm>

namespace powlab {

bool is_horn(const PrenexForm& p) {
  if (p.mode != PrenexForm::Mode::CNF) throw Error("is_horn expects CNF mode");
  for (const auto& clause : p.matrix) {
    int positive = 0;
    for (const Literal& l : clause)
      if (l.positive) ++positive;
    if (positive > 1) return false;
  }
  return true;
}

std::vector<AtomOccurrence> positive_equalities(const PrenexForm& p) {
  std::vector<AtomOccurrence> out;
  for (const AtomOccurrence& occ : atom_occurrences(p))
    if (occ.positive && occ.atom.kind == Formula::Kind::Equal) out.push_back(occ);
  return out;
}

namespace {

enum class Binding { Universal, Existential, Free };

std::map<std::string, Binding> binding_of(const PrenexForm& p) {
  std::map<std::string, Binding> out;
  for (const auto& [q, v] : p.prefix)
    out[v] = q == Quant::ForAll ? Binding::Universal : Binding::Existential;
  // Matrix variables not in the prefix are free.
  for (const auto& clause : p.matrix)
    for (const Literal& l : clause)
      for (const Term& t : l.atom.terms)
        for (const auto& v : variables(t))
          out.emplace(v, Binding::Free);
  return out;
}

std::string join(const std::set<std::string>& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& x : s) {
    if (!first) out += ",";
    first = false;
    out += x;
  }
  return out + "}";
}

}  // namespace

EqualityClassification classify_equality(const PrenexForm& p,
                                         const AtomOccurrence& occ) {
  if (p.mode != PrenexForm::Mode::CNF)
    throw Error("classify_equality expects CNF mode");
  if (occ.clause >= p.matrix.size() || occ.index >= p.matrix[occ.clause].size())
    throw Error("occurrence locator out of range");
  const Literal& lit = p.matrix[occ.clause][occ.index];
  if (!lit.positive || lit.atom.kind != Formula::Kind::Equal)
    throw Error("locator does not name a positive equality");

  EqualityClassification out;
  out.clause = occ.clause;
  out.index = occ.index;

  const Term& lhs = lit.atom.terms[0];
  const Term& rhs = lit.atom.terms[1];
  auto binds = binding_of(p);
  std::set<std::string> lv = variables(lhs), rv = variables(rhs);
  auto univ_or_free = [&](const std::set<std::string>& vs) {
    std::set<std::string> out_set;
    for (const auto& v : vs)
      if (binds.at(v) != Binding::Existential) out_set.insert(v);
    return out_set;
  };
  auto has_existential = [&](const std::set<std::string>& vs) {
    return std::any_of(vs.begin(), vs.end(), [&](const std::string& v) {
      return binds.at(v) == Binding::Existential;
    });
  };

  if (lv.empty() || rv.empty()) {
    out.noncollapsible = true;
    out.via = EqCond::I;
    out.evidence = (lv.empty() ? "left" : "right") +
                   std::string(" side has no variables");
    return out;
  }
  std::set<std::string> luf = univ_or_free(lv), ruf = univ_or_free(rv);
  bool left_shared = std::all_of(luf.begin(), luf.end(), [&](const std::string& v) {
    return rv.count(v) > 0;
  });
  bool right_shared = std::all_of(ruf.begin(), ruf.end(), [&](const std::string& v) {
    return lv.count(v) > 0;
  });
  if (left_shared && right_shared) {
    out.noncollapsible = true;
    out.via = EqCond::II;
    out.evidence = "universal/free vars left=" + join(luf) + " right=" + join(ruf) +
                   "; all shared (strict reading)";
    return out;
  }
  bool left_ok = has_existential(lv) || mentions_constant(lhs);
  bool right_ok = has_existential(rv) || mentions_constant(rhs);
  if (left_ok && right_ok) {
    out.noncollapsible = true;
    out.via = EqCond::III;
    out.evidence = "both sides existentially bound or constant-anchored";
    return out;
  }
  out.noncollapsible = false;
  out.via = EqCond::None;
  out.evidence = "universal/free vars left=" + join(luf) + " right=" + join(ruf) +
                 "; unshared, and no existential/constant anchor on " +
                 (left_ok ? "right" : "left");
  return out;
}

std::vector<EqualityClassification> noncoll_set(const PrenexForm& p) {
  std::vector<EqualityClassification> out;
  for (const AtomOccurrence& occ : positive_equalities(p)) {
    EqualityClassification c = classify_equality(p, occ);
    if (c.noncollapsible) out.push_back(c);
  }
  return out;
}

namespace {

// Single-conjunct prenex form: the given clause under the full prefix.
PrenexForm single_clause(const PrenexForm& p, std::size_t clause) {
  PrenexForm q;
  q.mode = PrenexForm::Mode::CNF;
  q.prefix = p.prefix;
  q.matrix = {p.matrix[clause]};
  return q;
}

Formula disjunction_of(const std::vector<Literal>& lits) {
  std::optional<Formula> out;
  for (const Literal& l : lits) {
    Formula f = l.positive ? l.atom : Formula::lnot(l.atom);
    out = out ? Formula::lor(std::move(*out), std::move(f))
              : std::optional<Formula>(std::move(f));
  }
  return *out;
}

std::vector<Formula> flatten_or(const Formula& f) {
  if (f.kind == Formula::Kind::Or) {
    auto l = flatten_or(f.kids[0]);
    auto r = flatten_or(f.kids[1]);
    l.insert(l.end(), r.begin(), r.end());
    return l;
  }
  return {f};
}

std::vector<Formula> flatten_and(const Formula& f) {
  if (f.kind == Formula::Kind::And) {
    auto l = flatten_and(f.kids[0]);
    auto r = flatten_and(f.kids[1]);
    l.insert(l.end(), r.begin(), r.end());
    return l;
  }
  return {f};
}

}  // namespace

FormulaVerdict classify_formula(const PrenexForm& p, const Signature& sig,
                                int oracle_bound) {
  if (p.mode != PrenexForm::Mode::CNF)
    throw Error("classify_formula expects CNF mode");
  if (!p.closed()) throw Error("classify_formula expects a closed formula");

  FormulaVerdict v;
  v.oracle_bound = oracle_bound;
  v.horn = is_horn(p);
  Formula whole = p.to_formula();
  v.constant_free = !mentions_constant(whole);
  {
    auto disjuncts = flatten_or(whole);
    v.disjunction_of_horn = std::all_of(
        disjuncts.begin(), disjuncts.end(), [&](const Formula& d) {
          return free_variables(d).empty() && is_horn(to_pcnf(d));
        });
  }

  auto occs = positive_equalities(p);
  for (const auto& occ : occs) {
    v.equalities.push_back(classify_equality(p, occ));
    if (v.equalities.back().noncollapsible)
      v.noncoll.push_back(v.equalities.size() - 1);
  }

  if (occs.empty()) {
    v.noncollapsible = true;
    v.via = EqCond::I;
    v.trace.push_back("(i) no positive equalities");
    return v;
  }
  if (v.noncoll.size() == v.equalities.size()) {
    v.noncollapsible = true;
    v.via = EqCond::II;
    v.trace.push_back("(ii) every positive equality non-collapsible");
    return v;
  }

  // Condition (iii). For each conjunct and distinguished positive
  // equality t = s, look for a nonempty subdisjunction gamma of the
  // conjunct's literals, free of positive equalities, with t = s -> gamma
  // under the bounded oracle.
  auto entailed_subdisjunction = [&](std::size_t clause, const Formula& eq,
                                     std::string& note) {
    std::vector<Literal> pool;
    for (const Literal& l : p.matrix[clause])
      if (!(l.positive && l.atom.kind == Formula::Kind::Equal)) pool.push_back(l);
    const std::size_t k = pool.size();
    for (std::uint32_t pick = 1; pick < (1u << k); ++pick) {
      std::vector<Literal> chosen;
      for (std::size_t i = 0; i < k; ++i)
        if (pick & (1u << i)) chosen.push_back(pool[i]);
      Formula gamma = disjunction_of(chosen);
      // The oracle runs over the implication's own symbols; countermodels
      // expand to the full signature and validity restricts.
      Signature osig = restrict_signature(Formula::land(eq, gamma), sig);
      if (!bounded_entailment(eq, gamma, osig, oracle_bound).refuted) {
        note = "gamma = " + to_string(gamma);
        return true;
      }
    }
    note = k == 0 ? "no equality-free literals in the conjunct"
                  : "no entailed subdisjunction up to bound";
    return false;
  };

  bool strengthened = true;
  v.literal_iii = true;
  v.literal_iii_vacuous = true;
  for (std::size_t c = 0; c < p.matrix.size(); ++c) {
    PrenexForm clause_form = single_clause(p, c);
    auto clause_noncoll = noncoll_set(clause_form);
    for (const AtomOccurrence& occ : positive_equalities(clause_form)) {
      Formula eq = occ.atom;
      bool in_noncoll = std::any_of(
          clause_noncoll.begin(), clause_noncoll.end(),
          [&](const EqualityClassification& e) { return e.index == occ.index; });
      std::string note;
      bool ok = entailed_subdisjunction(c, eq, note);
      if (in_noncoll) {
        v.literal_iii_vacuous = false;
        if (!ok) v.literal_iii = false;
      }
      if (!ok) strengthened = false;
      v.trace.push_back("(iii) conjunct " + std::to_string(c) + ", " +
                        to_string(eq) + (in_noncoll ? " [noncoll]" : " [coll]") +
                        ": " + (ok ? "entailed " + note : note));
    }
  }
  if (v.literal_iii_vacuous)
    v.trace.push_back(
        "(iii) literal reading vacuous: no conjunct has a non-collapsible "
        "equality; verdict uses the all-equalities reading");

  v.noncollapsible = strengthened;
  v.via = strengthened ? EqCond::III : EqCond::None;
  if (!strengthened)
    v.trace.push_back("collapsible: some positive equality lacks an entailed "
                      "equality-free subdisjunction");
  return v;
}

// ---------------------------------------------------------------------------
// Ladders

namespace {

Formula canonical_atom(const Formula& atom) {
  if (atom.kind == Formula::Kind::Equal && atom.terms[1] < atom.terms[0])
    return Formula::eq(atom.terms[1], atom.terms[0]);
  return atom;
}

bool atom_in(const std::vector<Formula>& atoms, const Formula& a) {
  Formula c = canonical_atom(a);
  return std::any_of(atoms.begin(), atoms.end(), [&](const Formula& x) {
    return canonical_atom(x) == c;
  });
}

bool consistent_up_to(const Formula& f, const Signature& sig, int bound) {
  std::set<std::string> vars = free_variables(f);
  StructureStream stream(sig, bound, /*total=*/true);
  while (auto S = stream.next()) {
    std::vector<std::string> names(vars.begin(), vars.end());
    std::vector<Elem> vals(names.size(), 0);
    for (;;) {
      Assignment a;
      for (std::size_t i = 0; i < names.size(); ++i) a[names[i]] = vals[i];
      if (satisfies(*S, f, a)) return true;
      int i = static_cast<int>(vals.size()) - 1;
      while (i >= 0 && vals[i] == S->size() - 1) vals[i--] = 0;
      if (i < 0) break;
      ++vals[i];
    }
  }
  return false;
}

bool phi_member_rec(const std::vector<Formula>& atoms, int n, bool starred,
                    const Formula& cand, const Signature& sig,
                    const LadderConfig& cfg, bool& used_bounded) {
  for (const Formula& disjunct : flatten_or(cand)) {
    auto conjuncts = flatten_and(disjunct);
    for (const Formula& con : conjuncts) {
      if (n == 0) {
        const Formula* atom = &con;
        if (con.kind == Formula::Kind::Not) atom = &con.kids[0];
        if (!atom->is_atom() || !atom_in(atoms, *atom)) return false;
      } else {
        bool even = (n - 1) % 2 == 0;
        Formula::Kind want = even ? Formula::Kind::Exists : Formula::Kind::ForAll;
        if (con.kind != want) return false;
        if (con.name != "x" + std::to_string(n - 1)) return false;
        if (!phi_member_rec(atoms, n - 1, starred, con.kids[0], sig, cfg,
                            used_bounded))
          return false;
      }
    }
    if (starred) {
      used_bounded = true;
      std::optional<Formula> conj;
      for (const Formula& con : conjuncts)
        conj = conj ? Formula::land(std::move(*conj), con)
                    : std::optional<Formula>(con);
      if (!consistent_up_to(*conj, sig, cfg.consistency_bound)) return false;
    }
  }
  return true;
}

}  // namespace

PhiMembership phi_member(const std::vector<Formula>& atoms, int n, bool starred,
                         const Formula& candidate, const Signature& sig,
                         const LadderConfig& cfg) {
  if (n > cfg.cap) throw Error("ladder layer exceeds the configured cap");
  PhiMembership out;
  out.member = phi_member_rec(atoms, n, starred, candidate, sig, cfg,
                              out.bounded_consistency_used);
  return out;
}

ProductCheck product_implies_base(const Formula& phi, const Formula& psi,
                                  const Formula& gamma, const Signature& sig,
                                  int bound) {
  if (quantifier_rank(phi) || quantifier_rank(psi) || quantifier_rank(gamma))
    throw Error("product_implies_base expects quantifier-free formulas");
  std::set<std::string> vars = free_variables(phi);
  for (const auto& v : free_variables(psi)) vars.insert(v);
  for (const auto& v : free_variables(gamma)) vars.insert(v);
  std::vector<std::string> names(vars.begin(), vars.end());

  std::vector<FiniteStructure> structures = all_structures(sig, bound, true);
  if (structures.size() > 5000)
    throw Error("product check bound enumerates too many structures over this "
                "signature; lower the bound");
  for (const FiniteStructure& A : structures)
    for (const FiniteStructure& B : structures) {
      FiniteStructure P = direct_product(A, B);
      std::vector<Elem> va(names.size(), 0), vb(names.size(), 0);
      for (;;) {  // over assignments into A
        Assignment aA;
        for (std::size_t i = 0; i < names.size(); ++i) aA[names[i]] = va[i];
        if (satisfies(A, phi, aA)) {
          std::fill(vb.begin(), vb.end(), 0);
          for (;;) {  // over assignments into B
            Assignment aB, aP;
            for (std::size_t i = 0; i < names.size(); ++i) {
              aB[names[i]] = vb[i];
              aP[names[i]] = va[i] * B.size() + vb[i];
            }
            if (satisfies(B, psi, aB) && !satisfies(P, gamma, aP)) {
              ProductCheck out;
              out.holds = false;
              out.counterexample = "|A|=" + std::to_string(A.size()) +
                                   " |B|=" + std::to_string(B.size());
              return out;
            }
            int i = static_cast<int>(vb.size()) - 1;
            while (i >= 0 && vb[i] == B.size() - 1) vb[i--] = 0;
            if (i < 0) break;
            ++vb[i];
          }
        }
        int i = static_cast<int>(va.size()) - 1;
        while (i >= 0 && va[i] == A.size() - 1) va[i--] = 0;
        if (i < 0) break;
        ++va[i];
      }
    }
  return {true, ""};
}

namespace {

std::vector<Formula> atoms_of(const Formula& f) {
  std::vector<Formula> out;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (g.is_atom()) {
      Formula c = canonical_atom(g);
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
      return;
    }
    for (const Formula& k : g.kids) walk(k);
  };
  walk(f);
  std::sort(out.begin(), out.end());
  return out;
}

bool weinstein_rec(const Formula& phi, const Formula& psi, const Formula& gamma,
                   int n, const Signature& sig, const WeinsteinConfig& cfg,
                   std::map<std::tuple<Formula, Formula, Formula>, bool>& memo) {
  if (n == 0) {
    auto key = std::make_tuple(phi, psi, gamma);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bool r = product_implies_base(phi, psi, gamma, sig, cfg.product_bound).holds;
    memo[key] = r;
    return r;
  }
  for (const Formula& dphi : flatten_or(phi))
    for (const Formula& dpsi : flatten_or(psi)) {
      bool some_gamma = false;
      for (const Formula& dgamma : flatten_or(gamma)) {
        bool all_conj = true;
        for (const Formula& cg : flatten_and(dgamma)) {
          bool found = false;
          for (const Formula& cp : flatten_and(dphi)) {
            for (const Formula& cq : flatten_and(dpsi))
              if (weinstein_rec(cp.kids[0], cq.kids[0], cg.kids[0], n - 1, sig,
                                cfg, memo)) {
                found = true;
                break;
              }
            if (found) break;
          }
          if (!found) {
            all_conj = false;
            break;
          }
        }
        if (all_conj) {
          some_gamma = true;
          break;
        }
      }
      if (!some_gamma) return false;
    }
  return true;
}

}  // namespace

bool weinstein_R(const Formula& phi, const Formula& psi, const Formula& gamma,
                 const Signature& sig, const WeinsteinConfig& cfg,
                 WeinsteinCache& cache) {
  int n = quantifier_rank(phi);
  if (quantifier_rank(psi) != n || quantifier_rank(gamma) != n)
    throw Error("formulas are not in a common ladder layer");
  if (n > cfg.cap) throw Error("ladder layer exceeds the configured cap");
  std::vector<Formula> atoms = atoms_of(phi);
  for (const Formula& a : atoms_of(psi))
    if (!atom_in(atoms, a)) atoms.push_back(a);
  for (const Formula& a : atoms_of(gamma))
    if (!atom_in(atoms, a)) atoms.push_back(a);
  LadderConfig lc{cfg.cap, cfg.product_bound};
  for (const Formula* f : {&phi, &psi, &gamma})
    if (!phi_member(atoms, n, false, *f, sig, lc).member)
      throw Error("formulas are not in a common ladder layer");
  return weinstein_rec(phi, psi, gamma, n, sig, cfg, cache);
}

bool weinstein_R(const Formula& phi, const Formula& psi, const Formula& gamma,
                 const Signature& sig, const WeinsteinConfig& cfg) {
  WeinsteinCache cache;
  return weinstein_R(phi, psi, gamma, sig, cfg, cache);
}

// ---------------------------------------------------------------------------
// Direct power sentences

namespace {

Formula rename_matrix_var(const Formula& f, const std::string& from,
                          const std::string& to) {
  Formula g = f;
  std::function<Term(const Term&)> rt = [&](const Term& t) -> Term {
    if (t.kind == Term::Kind::Var && t.name == from) return Term::var(to);
    Term s = t;
    for (Term& a : s.args) a = rt(a);
    return s;
  };
  std::function<void(Formula&)> walk = [&](Formula& h) {
    for (Term& t : h.terms) t = rt(t);
    for (Formula& k : h.kids) walk(k);
  };
  walk(g);
  return g;
}

}  // namespace

std::optional<Formula> ladderize(const Formula& sentence, int cap, int* layer_out) {
  if (!free_variables(sentence).empty())
    throw Error("ladderize expects a closed formula");
  PrenexForm p = to_pdnf(sentence);

  // Assign ladder positions from the innermost quantifier outward:
  // existential quantifiers sit at even positions, universal at odd.
  const int q = static_cast<int>(p.prefix.size());
  std::vector<int> position(q, -1);
  int pos = -1;
  for (int i = q - 1; i >= 0; --i) {
    bool existential = p.prefix[i].first == Quant::Exists;
    int next = pos + 1;
    bool even = next % 2 == 0;
    if (even != existential) ++next;
    position[i] = next;
    pos = next;
  }
  int n = q == 0 ? 0 : pos + 1;
  if (layer_out) *layer_out = n;
  if (n > cap) return std::nullopt;

  // Rebuild the matrix with ladder variable names (two passes, through
  // temporaries, since both name families overlap).
  PrenexForm matrix_only;
  matrix_only.mode = PrenexForm::Mode::DNF;
  matrix_only.matrix = p.matrix;
  Formula matrix = matrix_only.to_formula();
  for (int i = 0; i < q; ++i)
    matrix = rename_matrix_var(matrix, p.prefix[i].second,
                               "tmp" + std::to_string(i));
  for (int i = 0; i < q; ++i)
    matrix = rename_matrix_var(matrix, "tmp" + std::to_string(i),
                               "x" + std::to_string(position[i]));

  // Wrap quantifiers innermost first; unassigned positions become
  // vacuous quantifiers of the forced parity.
  Formula out = std::move(matrix);
  for (int level = 0; level < n; ++level) {
    bool even = level % 2 == 0;
    std::string v = "x" + std::to_string(level);
    out = even ? Formula::exists(v, std::move(out))
               : Formula::forall(v, std::move(out));
  }
  return out;
}

namespace {

void collect_symbols(const Term& t, const Signature& sig, Signature& out) {
  if (t.kind == Term::Kind::Const && !out.constants.count(t.name))
    out.add_constant(t.name);
  if (t.kind == Term::Kind::App && !out.functions.count(t.name))
    out.add_function(t.name, sig.functions.at(t.name));
  for (const Term& a : t.args) collect_symbols(a, sig, out);
}

}  // namespace

Signature restrict_signature(const Formula& f, const Signature& sig) {
  Signature out;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (g.kind == Formula::Kind::Rel && !out.relations.count(g.name))
      out.add_relation(g.name, sig.relations.at(g.name));
    for (const Term& t : g.terms) collect_symbols(t, sig, out);
    for (const Formula& k : g.kids) walk(k);
  };
  walk(f);
  return out;
}

DpsVerdict is_direct_power_sentence(const Formula& sentence, const Signature& full_sig,
                                    const DpsConfig& cfg) {
  if (!free_variables(sentence).empty())
    throw Error("is_direct_power_sentence expects a sentence");
  // Preservation depends only on the sentence's own symbols; the search
  // grids enumerate structures over that restriction.
  Signature sig = restrict_signature(sentence, full_sig);
  DpsVerdict v;

  int layer = 0;
  auto ladder = ladderize(sentence, cfg.cap, &layer);
  if (!ladder) {
    v.syntactic = Tri::Unknown;
    v.ladder_note = "ladder layer " + std::to_string(layer) +
                    " exceeds cap " + std::to_string(cfg.cap);
  } else {
    v.ladder_form = *ladder;
    WeinsteinConfig wc{cfg.cap, cfg.product_bound};
    if (weinstein_R(*ladder, *ladder, *ladder, sig, wc)) {
      v.syntactic = Tri::Yes;
      v.ladder_note = "R holds on the canonical ladder form";
    } else {
      // R is conclusive in the negative only on starred layers.
      LadderConfig lc{cfg.cap, cfg.product_bound};
      std::vector<Formula> atoms = atoms_of(*ladder);
      PhiMembership starred = phi_member(atoms, layer, true, *ladder, sig, lc);
      if (starred.member) {
        v.syntactic = Tri::No;
        v.ladder_note =
            "R fails on a starred-layer form (consistency bounded at " +
            std::to_string(cfg.product_bound) + ")";
      } else {
        v.syntactic = Tri::Unknown;
        v.ladder_note = "R fails but the canonical form is not in the starred layer";
      }
    }
  }

  v.preserved_by_direct_powers = true;
  v.preserved_by_cumulative = true;
  bool with_constants = mentions_constant(sentence);
  StructureStream stream(sig, cfg.bound, /*total=*/true);
  while (auto S = stream.next()) {
    if (!satisfies(*S, sentence)) continue;
    for (int isz = 2; isz <= cfg.index_bound; ++isz) {
      double projected = 1;
      for (int i = 0; i < isz; ++i) projected *= S->size();
      if (projected > static_cast<double>(cfg.size_guard)) break;
      if (v.preserved_by_direct_powers &&
          !satisfies(direct_power(*S, isz, cfg.size_guard), sentence)) {
        v.preserved_by_direct_powers = false;
        v.direct_witness = "|A|=" + std::to_string(S->size()) +
                           ", |I|=" + std::to_string(isz);
      }
      if (v.preserved_by_cumulative) {
        IndexFamily fam = uniform_family(1, isz);
        CumulativePower cp =
            build_level(*S, fam, 1, with_constants, cfg.size_guard);
        if (!satisfies_cumulative(cp, sentence)) {
          v.preserved_by_cumulative = false;
          v.cumulative_witness = "|A|=" + std::to_string(S->size()) +
                                 ", |I_0|=" + std::to_string(isz);
        }
      }
      if (!v.preserved_by_direct_powers && !v.preserved_by_cumulative) break;
    }
    if (!v.preserved_by_direct_powers && !v.preserved_by_cumulative) break;
  }
  return v;
}

}  // namespace powlab
