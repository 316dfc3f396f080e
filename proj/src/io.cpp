#include "powlab/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace powlab {

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw Error(origin + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> tokens_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

// Splits "(a,b)->c" into {a,b} and c, or "(a,b)" into {a,b}.
std::vector<std::string> parse_tuple(const std::string& tok,
                                     const std::string& origin, int line,
                                     std::string* value_out) {
  std::string t = tok;
  if (value_out) {
    auto arrow = t.find("->");
    if (arrow == std::string::npos) fail(origin, line, "expected (tuple)->value");
    *value_out = t.substr(arrow + 2);
    t = t.substr(0, arrow);
  }
  if (t.size() < 2 || t.front() != '(' || t.back() != ')')
    fail(origin, line, "expected a parenthesized tuple: " + tok);
  std::vector<std::string> parts;
  std::string cur;
  for (char c : t.substr(1, t.size() - 2)) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

FiniteStructure parse_structure(std::istream& in, const std::string& origin) {
  FiniteStructure S;
  std::map<std::string, Elem> elem_id;
  std::string raw;
  int lineno = 0;
  bool have_domain = false;
  auto resolve = [&](const std::string& e, int line) {
    auto it = elem_id.find(e);
    if (it == elem_id.end()) fail(origin, line, "unknown element '" + e + "'");
    return it->second;
  };
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    auto toks = tokens_of(raw);
    if (toks.empty()) continue;
    const std::string& kw = toks[0];
    if (kw == "structure") {
      if (toks.size() != 2) fail(origin, lineno, "usage: structure <name>");
      S.name = toks[1];
    } else if (kw == "domain") {
      if (toks.size() < 2) fail(origin, lineno, "empty domain");
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (elem_id.count(toks[i])) fail(origin, lineno, "duplicate element");
        elem_id[toks[i]] = static_cast<Elem>(S.elems.size());
        S.elems.push_back(toks[i]);
      }
      have_domain = true;
    } else if (kw == "fun" || kw == "rel") {
      if (!have_domain) fail(origin, lineno, "domain must come first");
      if (toks.size() < 2) fail(origin, lineno, "missing symbol declaration");
      std::string decl = toks[1];
      if (!decl.empty() && decl.back() == ':') decl.pop_back();
      auto slash = decl.find('/');
      if (slash == std::string::npos) fail(origin, lineno, "expected name/arity");
      std::string name = decl.substr(0, slash);
      int arity = std::stoi(decl.substr(slash + 1));
      std::size_t first = 2;
      if (toks.size() > 2 && toks[2] == ":") first = 3;
      if (kw == "fun") {
        if (!S.sig.functions.count(name)) S.sig.add_function(name, arity);
        auto& table = S.funcs[name];
        for (std::size_t i = first; i < toks.size(); ++i) {
          std::string value;
          auto parts = parse_tuple(toks[i], origin, lineno, &value);
          if (static_cast<int>(parts.size()) != arity)
            fail(origin, lineno, "tuple arity mismatch");
          std::vector<Elem> tuple;
          for (const auto& p : parts) tuple.push_back(resolve(p, lineno));
          Elem v = resolve(value, lineno);
          auto [it, fresh] = table.emplace(tuple, v);
          if (!fresh && it->second != v)
            fail(origin, lineno, "conflicting value for a function tuple");
        }
      } else {
        if (!S.sig.relations.count(name)) S.sig.add_relation(name, arity);
        auto& rel = S.rels[name];
        for (std::size_t i = first; i < toks.size(); ++i) {
          auto parts = parse_tuple(toks[i], origin, lineno, nullptr);
          if (static_cast<int>(parts.size()) != arity)
            fail(origin, lineno, "tuple arity mismatch");
          std::vector<Elem> tuple;
          for (const auto& p : parts) tuple.push_back(resolve(p, lineno));
          rel.insert(tuple);
        }
      }
    } else if (kw == "const") {
      if (!have_domain) fail(origin, lineno, "domain must come first");
      if (toks.size() != 4 || toks[2] != "=")
        fail(origin, lineno, "usage: const <name> = <element>");
      if (!S.sig.constants.count(toks[1])) S.sig.add_constant(toks[1]);
      S.consts[toks[1]] = resolve(toks[3], lineno);
    } else {
      fail(origin, lineno, "unknown directive '" + kw + "'");
    }
  }
  if (!have_domain) throw Error(origin + ": no domain declared");
  S.validate();
  return S;
}

FiniteStructure load_structure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_structure(in, path);
}

std::string render_structure(const FiniteStructure& S) {
  std::ostringstream out;
  out << "structure " << (S.name.empty() ? "S" : S.name) << "\n";
  out << "domain";
  for (const auto& e : S.elems) out << " " << e;
  out << "\n";
  for (const auto& [f, arity] : S.sig.functions) {
    out << "fun " << f << "/" << arity << ":";
    auto it = S.funcs.find(f);
    if (it != S.funcs.end())
      for (const auto& [tuple, value] : it->second) {
        out << " (";
        for (std::size_t i = 0; i < tuple.size(); ++i)
          out << (i ? "," : "") << S.elems[tuple[i]];
        out << ")->" << S.elems[value];
      }
    out << "\n";
  }
  for (const auto& [r, arity] : S.sig.relations) {
    out << "rel " << r << "/" << arity << ":";
    auto it = S.rels.find(r);
    if (it != S.rels.end())
      for (const auto& tuple : it->second) {
        out << " (";
        for (std::size_t i = 0; i < tuple.size(); ++i)
          out << (i ? "," : "") << S.elems[tuple[i]];
        out << ")";
      }
    out << "\n";
  }
  for (const auto& [c, e] : S.consts)
    out << "const " << c << " = " << S.elems[e] << "\n";
  return out.str();
}

IndexFamily parse_index_family(std::istream& in, const std::string& origin) {
  IndexFamily fam;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    auto toks = tokens_of(raw);
    if (toks.empty()) continue;
    if (toks[0] != "indexset")
      fail(origin, lineno, "expected 'indexset <name>: members...'");
    if (toks.size() < 2) fail(origin, lineno, "missing index set name");
    IndexFamily::Set s;
    s.name = toks[1];
    if (!s.name.empty() && s.name.back() == ':') s.name.pop_back();
    std::size_t first = 2;
    if (toks.size() > 2 && toks[2] == ":") first = 3;
    for (std::size_t i = first; i < toks.size(); ++i) s.members.push_back(toks[i]);
    fam.sets.push_back(std::move(s));
  }
  fam.validate();
  return fam;
}

IndexFamily load_index_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_index_family(in, path);
}

UltrafilterSpec parse_ultrafilter(std::istream& in, const std::string& origin,
                                  const IndexFamily& fam) {
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    auto toks = tokens_of(raw);
    if (toks.empty()) continue;
    if (toks.size() < 4 || toks[0] != "ultrafilter" || toks[1] != "over")
      fail(origin, lineno, "expected 'ultrafilter over <I>: ...'");
    std::string over = toks[2];
    if (!over.empty() && over.back() == ':') over.pop_back();
    const IndexFamily::Set* target = nullptr;
    for (const auto& s : fam.sets)
      if (s.name == over) target = &s;
    if (!target) fail(origin, lineno, "unknown index set '" + over + "'");
    auto member_pos = [&](const std::string& m) -> int {
      for (std::size_t i = 0; i < target->members.size(); ++i)
        if (target->members[i] == m) return static_cast<int>(i);
      fail(origin, lineno, "unknown index element '" + m + "'");
    };
    std::size_t first = 3;
    if (toks[3] == ":") first = 4;
    if (first < toks.size() && toks[first] == "principal") {
      if (first + 1 >= toks.size()) fail(origin, lineno, "missing generator");
      int g = member_pos(toks[first + 1]);
      UltrafilterSpec spec;
      spec.over = over;
      spec.family = principal_ultrafilter(
          static_cast<int>(target->members.size()), g, target->members);
      return spec;
    }
    std::vector<Mask> sets;
    for (std::size_t i = first; i < toks.size(); ++i) {
      const std::string& t = toks[i];
      if (t.size() < 2 || t.front() != '{' || t.back() != '}')
        fail(origin, lineno, "expected {m1,m2,...} sets");
      Mask m = 0;
      std::string cur;
      for (char c : t.substr(1, t.size() - 2)) {
        if (c == ',') {
          if (!cur.empty()) m |= Mask(1) << member_pos(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      if (!cur.empty()) m |= Mask(1) << member_pos(cur);
      sets.push_back(m);
    }
    UltrafilterSpec spec;
    spec.over = over;
    spec.family = validate_filter(static_cast<int>(target->members.size()),
                                  std::move(sets), target->members);
    if (!spec.family.ultrafilter)
      fail(origin, lineno, "family validates as a filter but not an ultrafilter");
    return spec;
  }
  throw Error(origin + ": no ultrafilter declaration found");
}

UltrafilterSpec load_ultrafilter(const std::string& path, const IndexFamily& fam) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_ultrafilter(in, path, fam);
}

std::vector<std::string> load_corpus_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> out;
  std::string raw;
  while (std::getline(in, raw)) {
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    auto first = raw.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) continue;
    auto last = raw.find_last_not_of(" \t\r\n");
    out.push_back(raw.substr(first, last - first + 1));
  }
  return out;
}

std::vector<Formula> load_corpus(const std::string& path, const Signature& sig) {
  std::vector<Formula> out;
  for (const auto& line : load_corpus_lines(path))
    out.push_back(parse_formula(line, sig));
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace powlab
