#pragma once

// Instance-file parsing and report serialization for the command-line tool.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "subcompat/classical.hpp"
#include "subcompat/quantum_compat.hpp"
#include "subcompat/spectra.hpp"

namespace subcompat::cli {

using Json = nlohmann::json;
using Report = nlohmann::ordered_json;

/// Parsed file plus the SHA-256 of its canonical serialization (sorted keys,
/// no whitespace).
struct LoadedFile {
  Json document;
  std::string digest;
};

LoadedFile load_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

/// Throws InputError unless document["kind"] equals `kind`.
void expect_kind(const Json& document, const std::string& kind);

MarginalFamily parse_classical_family(const Json& document);
ReducedFamily3 parse_quantum_family3(const Json& document);

struct QuantumFamilyN {
  int n = 0;
  QuantumFamily family;
};
QuantumFamilyN parse_quantum_family_n(const Json& document);

ComplexMatrix parse_matrix(const Json& data);

struct SpectraFile {
  std::string criterion;  // empty when the file does not name one
  std::vector<std::vector<double>> spectra;
};
SpectraFile parse_spectra(const Json& document);

/// Ascending 1-based member list.
Report subset_json(SubsetMask s);
Report matrix_json(const ComplexMatrix& m);
Report vector_json(const ComplexVector& v);
Report witness_json(const InequalityWitness& w);
Report joint_json(const JointTable& joint);

void write_json(const std::filesystem::path& path, const Report& report);

}  // namespace subcompat::cli
