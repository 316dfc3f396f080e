#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "powlab/cumulative.hpp"
#include "powlab/filter.hpp"
#include "powlab/model.hpp"

namespace powlab {

/// Structure file (UTF-8, line-oriented):
///   structure <name>
///   domain e1 e2 ...
///   fun add/2: (0,0)->0 (0,1)->1 ...
///   rel le/2: (0,0) (0,1) ...
///   const zero = 0
/// Absent function tuples are undefined. The signature is implied by
/// the declarations.
FiniteStructure load_structure(const std::string& path);
FiniteStructure parse_structure(std::istream& in, const std::string& origin);
std::string render_structure(const FiniteStructure& S);

/// Index family file: `indexset I0: j1 j2` lines in stage order.
IndexFamily load_index_family(const std::string& path);
IndexFamily parse_index_family(std::istream& in, const std::string& origin);

/// Ultrafilter file: `ultrafilter over I0: principal j1` or
/// `ultrafilter over I0: {j1} {j1,j2} ...`. Returns the target index
/// set name with the validated family.
struct UltrafilterSpec {
  std::string over;
  FilterFamily family;  // ground names resolved against the index set
};

UltrafilterSpec load_ultrafilter(const std::string& path, const IndexFamily& fam);
UltrafilterSpec parse_ultrafilter(std::istream& in, const std::string& origin,
                                  const IndexFamily& fam);

/// Corpus file: one formula per line, `#` comments and blank lines
/// skipped.
std::vector<std::string> load_corpus_lines(const std::string& path);
std::vector<Formula> load_corpus(const std::string& path, const Signature& sig);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace powlab
