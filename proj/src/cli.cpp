#include "powlab/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "powlab/classify.hpp"
#include "powlab/embedding.hpp"
#include "powlab/io.hpp"
#include "powlab/quotient.hpp"

namespace powlab {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string structure;
  std::string structure_b;
  std::string indexfam;
  std::vector<std::string> ultrafilters;
  std::string corpus;
  int stage = 1;
  bool plus = false;
  int bound = 3;
  int rank = 2;
  std::size_t guard = 200000;
  std::string out = "out";
  std::string suite = "all";
};

void emit(const Options& opt, const std::string& name, const std::string& body) {
  fs::create_directories(opt.out);
  write_file((fs::path(opt.out) / name).string(), body);
  std::cout << "wrote " << (fs::path(opt.out) / name).string() << "\n";
}

FiniteStructure need_structure(const Options& opt) {
  if (opt.structure.empty()) throw Error("--structure is required");
  return load_structure(opt.structure);
}

IndexFamily need_family(const Options& opt) {
  if (opt.indexfam.empty()) throw Error("--indexfam is required");
  return load_index_family(opt.indexfam);
}

std::vector<FilterFamily> load_ultras(const Options& opt, const IndexFamily& fam) {
  // Ultrafilters are matched to stages by their declared index set.
  std::vector<FilterFamily> out(fam.stages());
  std::vector<bool> seen(fam.stages(), false);
  for (const auto& path : opt.ultrafilters) {
    UltrafilterSpec spec = load_ultrafilter(path, fam);
    for (int m = 0; m < fam.stages(); ++m)
      if (fam.sets[m].name == spec.over) {
        out[m] = spec.family;
        seen[m] = true;
      }
  }
  for (int m = 0; m < opt.stage && m < fam.stages(); ++m)
    if (!seen[m])
      throw Error("no ultrafilter declared over " + fam.sets[m].name);
  return out;
}

std::string render_quotient(const QuotientStructure& Q) {
  std::ostringstream os;
  os << "# provenance: " << Q.provenance << "\n";
  os << "# classes: " << Q.class_count() << "\n";
  for (int c = 0; c < Q.class_count(); ++c) {
    os << "# class " << c << " rep=" << Q.rep(c) << " members=";
    for (std::size_t i = 0; i < Q.classes[c].size(); ++i)
      os << (i ? "," : "") << Q.classes[c][i];
    os << "\n";
  }
  os << render_structure(Q.quotient);
  return os.str();
}

int cmd_classify(const Options& opt) {
  FiniteStructure S = need_structure(opt);
  auto lines = load_corpus_lines(opt.corpus);
  std::ostringstream os;
  os << "formula\thorn\tconstant_free\tequality_verdicts\tformula_verdict\t"
        "empirical_direct\tempirical_cumulative\tbounds\n";
  for (const auto& line : lines) {
    Formula f = parse_formula(line, S.sig);
    PrenexForm p = to_pcnf(f);
    FormulaVerdict v = classify_formula(p, S.sig, opt.bound);
    DpsConfig cfg;
    cfg.bound = 2;
    cfg.product_bound = 2;
    cfg.cap = 2 * opt.rank;  // a rank-r prefix ladderizes within 2r layers
    DpsVerdict d = is_direct_power_sentence(f, S.sig, cfg);
    auto cond = [](EqCond c) {
      switch (c) {
        case EqCond::I: return "i";
        case EqCond::II: return "ii";
        case EqCond::III: return "iii";
        default: return "-";
      }
    };
    os << line << "\t" << (v.horn ? "horn" : "not-horn") << "\t"
       << (v.constant_free ? "yes" : "no") << "\t";
    for (std::size_t i = 0; i < v.equalities.size(); ++i)
      os << (i ? ";" : "")
         << (v.equalities[i].noncollapsible ? "noncoll(" : "coll(")
         << cond(v.equalities[i].via) << ")";
    if (v.equalities.empty()) os << "-";
    os << "\t" << (v.noncollapsible ? "noncollapsible(" : "collapsible(")
       << cond(v.via) << ")"
       << (v.literal_iii_vacuous ? "[literal-iii-vacuous]" : "") << "\t"
       << (d.preserved_by_direct_powers ? "preserved" : "refuted:" + d.direct_witness)
       << "\t"
       << (d.preserved_by_cumulative ? "preserved"
                                     : "refuted:" + d.cumulative_witness)
       << "\toracle=" << opt.bound << ",search=" << cfg.bound
       << ",index<=" << cfg.index_bound << "\n";
  }
  emit(opt, "classify_report.tsv", os.str());
  return 0;
}

int cmd_build(const Options& opt, const std::string& what) {
  FiniteStructure S = need_structure(opt);
  IndexFamily fam = need_family(opt);
  if (what == "direct") {
    FiniteStructure P = direct_power_level(S, fam, opt.stage, opt.guard);
    emit(opt, "direct_power.struct", render_structure(P));
    return 0;
  }
  if (what == "ultra") {
    auto Us = load_ultras(opt, fam);
    QuotientStructure Q = ultrapower_level(S, fam, Us, opt.stage, opt.guard);
    emit(opt, "ultrapower.struct", render_quotient(Q));
    return 0;
  }
  if (what == "cumulative") {
    CumulativePower cp = build_level(S, fam, opt.stage, opt.plus, opt.guard);
    std::ostringstream os;
    os << "# carrier of stage " << opt.stage << " (" << cp.carrier.size()
       << " elements, level order)\n";
    for (std::size_t i = 0; i < cp.carrier.size(); ++i)
      os << "# " << i << ": " << to_string(cp.carrier[i]) << " level "
         << cp.carrier[i].level() << "\n";
    os << render_structure(materialize(cp, opt.plus));
    emit(opt, "cumulative.struct", os.str());
    return 0;
  }
  throw Error("unknown build target " + what);
}

int cmd_quotient(const Options& opt, const std::string& what) {
  FiniteStructure S = need_structure(opt);
  IndexFamily fam = need_family(opt);
  CumulativePower cp = build_level(S, fam, opt.stage, opt.plus, opt.guard);
  QuotientStructure Q = what == "hereditary"
                            ? quotient_hereditary(cp)
                            : quotient_ultra(cp, load_ultras(opt, fam));
  emit(opt, "quotient.struct", render_quotient(Q));
  return 0;
}

int cmd_eval(const Options& opt) {
  FiniteStructure S = need_structure(opt);
  auto formulas = load_corpus(opt.corpus, S.sig);
  std::ostringstream os;
  os << "formula\ttruth\n";
  if (opt.indexfam.empty() || opt.stage == 0) {
    for (const Formula& f : formulas)
      os << to_string(f) << "\t" << (satisfies(S, f) ? "true" : "false") << "\n";
  } else {
    IndexFamily fam = need_family(opt);
    CumulativePower cp = build_level(S, fam, opt.stage, opt.plus, opt.guard);
    for (const Formula& f : formulas)
      os << to_string(f) << "\t"
         << (satisfies_cumulative(cp, f) ? "true" : "false") << "\n";
  }
  emit(opt, "eval.tsv", os.str());
  return 0;
}

int cmd_iso(const Options& opt) {
  FiniteStructure S = need_structure(opt);
  IndexFamily fam = need_family(opt);
  std::ostringstream os;
  bool ok = true;
  // Verification failures are theorem violations (exit 1), not usage
  // errors, so they are caught and recorded per stage.
  auto attempt = [&](const char* kind, int n, auto&& run) {
    std::string verdict = "verified";
    try {
      if (!run().verified) verdict = "FAILED";
    } catch (const Error& e) {
      verdict = std::string("FAILED: ") + e.what();
    }
    os << kind << "\tstage=" << n << "\t" << verdict << "\n";
    ok = ok && verdict == "verified";
  };
  for (int n = 0; n <= opt.stage; ++n)
    attempt("direct", n,
            [&] { return canonical_iso_direct(S, fam, n, opt.guard); });
  if (!opt.ultrafilters.empty()) {
    auto Us = load_ultras(opt, fam);
    for (int n = 0; n <= opt.stage; ++n)
      attempt("ultra", n,
              [&] { return canonical_iso_ultra(S, fam, Us, n, opt.guard); });
  }
  emit(opt, "iso_report.tsv", os.str());
  return ok ? 0 : 1;
}

int cmd_tau(const Options& opt) {
  FiniteStructure S = need_structure(opt);
  TauProfile tp = tau_profile(S);
  std::ostringstream os;
  os << "element\tper_symbol\ttau\n";
  for (Elem a = 0; a < S.size(); ++a) {
    os << S.elems[a] << "\t";
    bool first = true;
    for (const auto& [f, n] : tp.per_elem[a].down) {
      os << (first ? "" : ";") << f << "v=" << n;
      first = false;
    }
    for (const auto& [f, n] : tp.per_elem[a].up) os << ";" << f << "^=" << n;
    for (const auto& [r, n] : tp.per_elem[a].rel) os << ";" << r << "=" << n;
    os << "\t" << tp.per_elem[a].tau << "\n";
  }
  os << "max\twitness=" << S.elems[tp.witness] << "\t" << tp.tau_max << "\n";
  emit(opt, "tau_report.tsv", os.str());
  return 0;
}

int cmd_embed(const Options& opt, const std::string& what) {
  FiniteStructure A = need_structure(opt);
  IndexFamily fam = need_family(opt);
  std::ostringstream os;
  if (what == "direct-power") {
    auto Us = load_ultras(opt, fam);
    const int isz = fam.size(0);
    auto rep = embed_into_direct_power(A, isz, Us[0], true, opt.guard);
    os << "construction\ttau\ttau_complete\tembedding\n";
    os << "choice-function\t" << rep.tau_value << "\t"
       << (rep.tau_complete ? "yes" : "no") << "\t"
       << (rep.embedding ? "verified" : "none") << "\n";
    emit(opt, "embed_report.tsv", os.str());
    return 0;
  }
  if (what == "rk") {
    if (opt.structure_b.empty()) throw Error("--structure-b is required for rk");
    if (fam.stages() < 2)
      throw Error("rk needs a two-set index family (I for A, J for B)");
    FiniteStructure B = load_structure(opt.structure_b);
    auto u = find_embedding(A, B);
    if (!u) throw Error("no embedding from A into B exists");
    auto Us = load_ultras(opt, fam);
    FilterFamily UI = Us[0], UJ = Us[1];
    auto h = rk_compare(UI, UJ);
    os << "u\th\trk\tembedding\n";
    if (!h) {
      os << "found\tnone\tno\tnot-attempted\n";
    } else {
      auto rep = rk_embedding(A, B, *u, *h, UI, UJ, opt.guard);
      os << "found\tfound\t" << (rep.rk ? "yes" : "no") << "\t"
         << (rep.embedding ? "verified" : "none") << "\n";
    }
    emit(opt, "embed_report.tsv", os.str());
    return 0;
  }
  throw Error("unknown embed target " + what);
}

// Theorem grids at desk scale; exit code 1 on any violation.
int cmd_grid(const Options& opt) {
  std::ostringstream os, summary;
  os << "construction\ttheorem\tcell\tverdict\twitness\n";
  int pass = 0, fail = 0;
  auto record = [&](const std::string& cons, const std::string& thm,
                    const std::string& cell, bool ok, const std::string& wit) {
    os << cons << "\t" << thm << "\t" << cell << "\t" << (ok ? "pass" : "FAIL")
       << "\t" << wit << "\n";
    (ok ? pass : fail) += 1;
  };

  bool want = opt.suite == "all";
  if (want || opt.suite == "iso") {
    Signature sig;
    sig.add_function("F", 2);
    IndexFamily fam = uniform_family(2, 2);
    int cellno = 0;
    for (const FiniteStructure& S : all_structures(sig, 2, /*total=*/false)) {
      for (int n = 1; n <= 2; ++n) {
        bool ok = canonical_iso_direct(S, fam, n, opt.guard).verified;
        record("quotient", "direct-power-iso",
               "S#" + std::to_string(cellno) + ",n=" + std::to_string(n), ok, "");
      }
      ++cellno;
    }
  }
  if (want || opt.suite == "rk") {
    // Fixed two-element cell: the swap structure embeds identically into
    // itself, keeping the grid deterministic regardless of flags.
    Signature sig;
    sig.add_function("s", 1);
    FiniteStructure z2 = make_structure(sig, 2, "s2");
    z2.funcs["s"][{0}] = 1;
    z2.funcs["s"][{1}] = 0;
    for (int isz = 1; isz <= 2; ++isz)
      for (int jsz = 1; jsz <= 3; ++jsz)
        for (const auto& UI : all_ultrafilters(isz))
          for (const auto& UJ : all_ultrafilters(jsz)) {
            std::vector<int> h(jsz, 0);
            for (;;) {
              bool threw = false;
              RkEmbeddingReport rep;
              try {
                rep = rk_embedding(z2, z2, {0, 1}, h, UI, UJ, opt.guard);
              } catch (const Error&) {
                threw = true;
              }
              record("embedding", "rk-biconditional",
                     "|I|=" + std::to_string(isz) + ",|J|=" + std::to_string(jsz),
                     !threw && rep.embedding == rep.rk, "");
              int i = jsz - 1;
              while (i >= 0 && h[i] == isz - 1) h[i--] = 0;
              if (i < 0) break;
              ++h[i];
            }
          }
  }
  if (want || opt.suite == "representatives") {
    Signature sig;
    sig.add_function("f", 1);
    int cellno = 0;
    for (const FiniteStructure& S : all_structures(sig, 3, /*total=*/false)) {
      for (int isz = 1; isz <= 3; ++isz)
        for (const auto& U : all_ultrafilters(isz)) {
          bool ok = true;
          std::string wit;
          try {
            representative_check(S, isz, U, opt.guard);
            embed_into_direct_power(S, isz, U, true, opt.guard);
            ok = class_size_uniformity(S, isz, U, opt.guard).uniform;
          } catch (const Error& e) {
            ok = false;
            wit = e.what();
          }
          record("embedding", "representatives+tau+uniformity",
                 "S#" + std::to_string(cellno) + ",|I|=" + std::to_string(isz),
                 ok, wit);
        }
      ++cellno;
    }
  }
  if (want || opt.suite == "transport") {
    for (int n = 1; n <= 4; ++n)
      for (const auto& part : all_partitions(n))
        for (const auto& U : all_ultrafilters(n)) {
          bool ok = true;
          std::string wit;
          try {
            auto ind = induced_ultrafilter_on_quotient(U, part);
            auto back = induced_filterbase_on_carrier(ind.on_classes, part);
            auto again = induced_ultrafilter_on_quotient(back.extension, part);
            ok = again.on_classes.sets == ind.on_classes.sets;
          } catch (const Error& e) {
            ok = false;
            wit = e.what();
          }
          record("quotient", "ultrafilter-transport",
                 "n=" + std::to_string(n) + ",blocks=" +
                     std::to_string(part.size()),
                 ok, wit);
        }
  }

  summary << "pass\t" << pass << "\nfail\t" << fail << "\n";
  emit(opt, "grid_report.tsv", os.str());
  emit(opt, "grid_summary.tsv", summary.str());
  return fail == 0 ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, char** argv) {
  // POWLAB_SEEDLESS=1 disables worker parallelism; evaluation here is
  // single-threaded throughout, so the flag is accepted as a no-op.
  if (const char* seedless = std::getenv("POWLAB_SEEDLESS"); seedless)
    (void)seedless;

  CLI::App app{"finite stages of power hierarchies over finite structures"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--structure", opt.structure, "structure file");
    cmd->add_option("--structure-b", opt.structure_b, "second structure file");
    cmd->add_option("--indexfam", opt.indexfam, "index family file");
    cmd->add_option("--ultrafilter", opt.ultrafilters, "ultrafilter file(s)");
    cmd->add_option("--corpus", opt.corpus, "formula corpus file");
    cmd->add_option("--stage", opt.stage, "hierarchy stage");
    cmd->add_flag("--plus", opt.plus, "interpret constants (plus mode)");
    cmd->add_option("--bound", opt.bound, "oracle/search carrier bound");
    cmd->add_option("--rank", opt.rank, "quantifier rank cap");
    cmd->add_option("--guard", opt.guard, "materialized carrier size guard");
    cmd->add_option("--out", opt.out, "output directory");
  };

  CLI::App* c_classify = app.add_subcommand("classify", "classify a corpus");
  CLI::App* c_build = app.add_subcommand("build", "build a construction");
  CLI::App* b_direct = c_build->add_subcommand("direct", "iterated direct power");
  CLI::App* b_ultra = c_build->add_subcommand("ultra", "iterated ultrapower");
  CLI::App* b_cumul = c_build->add_subcommand("cumulative", "cumulative stage");
  CLI::App* c_quot = app.add_subcommand("quotient", "quotient a cumulative stage");
  CLI::App* q_her = c_quot->add_subcommand("hereditary", "hereditary identity");
  CLI::App* q_ultra = c_quot->add_subcommand("ultra", "ultrafilter relation");
  CLI::App* c_eval = app.add_subcommand("eval", "evaluate formulas");
  CLI::App* c_iso = app.add_subcommand("iso", "canonical isomorphism checks");
  CLI::App* c_tau = app.add_subcommand("tau", "tau profile");
  CLI::App* c_embed = app.add_subcommand("embed", "embedding constructions");
  CLI::App* e_rk = c_embed->add_subcommand("rk", "between ultrapowers");
  CLI::App* e_dp = c_embed->add_subcommand("direct-power",
                                           "ultrapower into direct power");
  CLI::App* c_grid = app.add_subcommand("grid", "theorem grids");
  c_grid->add_option("--suite", opt.suite,
                     "iso | rk | representatives | transport | all");

  for (CLI::App* cmd : {c_classify, b_direct, b_ultra, b_cumul, q_her, q_ultra,
                        c_eval, c_iso, c_tau, e_rk, e_dp, c_grid})
    add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c_classify)) return cmd_classify(opt);
    if (app.got_subcommand(c_build)) {
      if (c_build->got_subcommand(b_direct)) return cmd_build(opt, "direct");
      if (c_build->got_subcommand(b_ultra)) return cmd_build(opt, "ultra");
      if (c_build->got_subcommand(b_cumul)) return cmd_build(opt, "cumulative");
      throw Error("build needs a target: direct | ultra | cumulative");
    }
    if (app.got_subcommand(c_quot)) {
      if (c_quot->got_subcommand(q_her)) return cmd_quotient(opt, "hereditary");
      if (c_quot->got_subcommand(q_ultra)) return cmd_quotient(opt, "ultra");
      throw Error("quotient needs a relation: hereditary | ultra");
    }
    if (app.got_subcommand(c_eval)) return cmd_eval(opt);
    if (app.got_subcommand(c_iso)) return cmd_iso(opt);
    if (app.got_subcommand(c_tau)) return cmd_tau(opt);
    if (app.got_subcommand(c_embed)) {
      if (c_embed->got_subcommand(e_rk)) return cmd_embed(opt, "rk");
      if (c_embed->got_subcommand(e_dp)) return cmd_embed(opt, "direct-power");
      throw Error("embed needs a target: rk | direct-power");
    }
    if (app.got_subcommand(c_grid)) return cmd_grid(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace powlab
