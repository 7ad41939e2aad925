// JSON (de)serialization for the library's value types, shared by the CLI
// and by golden files. Matrices travel as {rows, cols, re, im} with row-major
// entry arrays; algebras either carry an explicit basis or the three factor
// dimensions of their structured form; every top-level report written by the
// CLI carries a schema-version field.
#pragma once

#include "ncg/algebra.hpp"
#include "ncg/connections.hpp"
#include "ncg/triple.hpp"

#include "json.hpp"

#include <string>

namespace ncg {

// Ordered maps keep key order stable, so identical inputs serialize to
// byte-identical reports.
using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "ncg/1";

Json matrix_to_json(const Mat& m);
Mat json_to_matrix(const Json& j);

Json algebra_to_json(const MatrixAlgebra& a);
MatrixAlgebra json_to_algebra(const Json& j);

Json state_to_json(const State& s);
State json_to_state(const Json& j);

Json triple_to_json(const SpectralTriple& t);
SpectralTriple json_to_triple(const Json& j);

Json validation_to_json(const ValidationReport& r);

// Snapshot of a correspondence: the module realization, the realized
// connection correction at the source Dirac (alpha = op - free part), the
// intertwining unitary, both endpoint triples, and the original assembly
// residual. The sigma-substitution closure is runtime-only: the rebuilt
// closure is exact at the stored source Dirac (where it reports the stored
// residual); substituting any other operator reassembles only the free part
// plus the frozen alpha and reports that reassembly's own inconsistency.
Json correspondence_to_json(const Correspondence& c);
Correspondence json_to_correspondence(const Json& j);

// File helpers: read throws nlohmann parse_error (position-annotated) on
// malformed input; write is atomic-enough for CLI purposes (truncate+write).
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ncg
