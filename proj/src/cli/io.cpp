#include "cli/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace subcompat::cli {
namespace {

const Json& field(const Json& object, const char* name) {
  if (!object.is_object() || !object.contains(name)) {
    throw InputError(std::string("missing field \"") + name + "\"");
  }
  return object.at(name);
}

int int_field(const Json& object, const char* name) {
  const Json& v = field(object, name);
  if (!v.is_number_integer()) throw InputError(std::string("field \"") + name + "\" must be an integer");
  return v.get<int>();
}

double number(const Json& v, const char* what) {
  if (!v.is_number()) throw InputError(std::string(what) + " must be a number");
  return v.get<double>();
}

SubsetMask parse_subset(const Json& v, int n) {
  if (!v.is_array() || v.empty()) throw InputError("subset must be a nonempty array of indices");
  std::vector<int> members;
  for (const auto& m : v) {
    if (!m.is_number_integer()) throw InputError("subset indices must be integers");
    const int i = m.get<int>();
    if (i < 1 || i > n) throw InputError("subset index " + std::to_string(i) + " outside 1.." + std::to_string(n));
    members.push_back(i);
  }
  std::sort(members.begin(), members.end());
  if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
    throw InputError("subset lists an index twice");
  }
  return SubsetMask::from_members(members);
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw NumericError("SHA-256 computation failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

LoadedFile load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  LoadedFile loaded;
  try {
    loaded.document = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError("malformed JSON in " + path.string() + ": " + e.what());
  }
  loaded.digest = sha256_hex(loaded.document.dump());
  return loaded;
}

void expect_kind(const Json& document, const std::string& kind) {
  const Json& k = field(document, "kind");
  if (!k.is_string() || k.get<std::string>() != kind) {
    throw InputError("expected an instance of kind \"" + kind + "\"");
  }
}

MarginalFamily parse_classical_family(const Json& document) {
  expect_kind(document, "classical_family");
  const int n = int_field(document, "n");
  if (n < 1 || n > kMaxClassicalVariables) throw InputError("n must be in 1.." + std::to_string(kMaxClassicalVariables));
  const Json& marginals = field(document, "marginals");
  if (!marginals.is_array()) throw InputError("\"marginals\" must be an array");
  MarginalFamily family(n);
  for (const auto& entry : marginals) {
    const SubsetMask subset = parse_subset(field(entry, "subset"), n);
    const Json& table = field(entry, "table");
    if (!table.is_object()) throw InputError("\"table\" must be an object");
    const int k = subset.size();
    const std::size_t rows = std::size_t{1} << k;
    if (table.size() != rows) throw InputError("table for " + subset.to_string() + " needs " + std::to_string(rows) + " entries");
    std::vector<Rational> values(rows);
    std::vector<bool> seen(rows, false);
    for (const auto& [key, value] : table.items()) {
      if (static_cast<int>(key.size()) != k || key.find_first_not_of("01") != std::string::npos) {
        throw InputError("table key \"" + key + "\" is not a bitstring of length " + std::to_string(k));
      }
      std::uint32_t r = 0;
      for (int c = 0; c < k; ++c) {
        if (key[c] == '1') r |= 1u << c;
      }
      if (!value.is_string()) throw InputError("probabilities must be \"p/q\" strings");
      values[r] = parse_probability(value.get<std::string>());
      seen[r] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw InputError("duplicate table key");
    family.add(MarginalTable(n, subset, std::move(values)));
  }
  return family;
}

ComplexMatrix parse_matrix(const Json& data) {
  if (!data.is_array() || data.empty()) throw InputError("matrix data must be a nonempty array of rows");
  const auto dim = static_cast<Eigen::Index>(data.size());
  qubit_count(dim);
  ComplexMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const Json& row = data[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) throw InputError("matrix is not square");
    for (Eigen::Index c = 0; c < dim; ++c) {
      const Json& entry = row[static_cast<std::size_t>(c)];
      if (!entry.is_array() || entry.size() != 2) throw InputError("matrix entries must be [re, im] pairs");
      m(r, c) = Complex(number(entry[0], "real part"), number(entry[1], "imaginary part"));
    }
  }
  return m;
}

ReducedFamily3 parse_quantum_family3(const Json& document) {
  expect_kind(document, "quantum_family3");
  const Json& matrices = field(document, "matrices");
  if (!matrices.is_array() || matrices.size() != 3) throw InputError("expected three matrices");
  std::map<SubsetMask, DensityMatrix> by_subset;
  for (const auto& entry : matrices) {
    const SubsetMask s = parse_subset(field(entry, "subset"), 3);
    if (s.size() != 2) throw InputError("quantum_family3 matrices must be on qubit pairs");
    ComplexMatrix m = parse_matrix(field(entry, "data"));
    if (m.rows() != 4) throw InputError("pair matrices must be 4x4");
    if (!by_subset.emplace(s, DensityMatrix(std::move(m))).second) throw InputError("duplicate subset " + s.to_string());
  }
  return {by_subset.at(SubsetMask::of({1, 2})), by_subset.at(SubsetMask::of({1, 3})),
          by_subset.at(SubsetMask::of({2, 3}))};
}

QuantumFamilyN parse_quantum_family_n(const Json& document) {
  expect_kind(document, "quantum_family_n");
  QuantumFamilyN out;
  out.n = int_field(document, "n");
  if (out.n < 2 || out.n > 6) throw InputError("n must be in 2..6");
  const Json& matrices = field(document, "matrices");
  if (!matrices.is_array()) throw InputError("\"matrices\" must be an array");
  for (const auto& entry : matrices) {
    const SubsetMask s = parse_subset(field(entry, "subset"), out.n);
    if (s == SubsetMask::full(out.n)) throw InputError("family members must be proper subsets");
    ComplexMatrix m = parse_matrix(field(entry, "data"));
    if (m.rows() != (Eigen::Index{1} << s.size())) throw InputError("matrix size does not match " + s.to_string());
    if (!out.family.emplace(s, DensityMatrix(std::move(m))).second) throw InputError("duplicate subset " + s.to_string());
  }
  return out;
}

SpectraFile parse_spectra(const Json& document) {
  expect_kind(document, "spectra");
  SpectraFile out;
  if (document.contains("criterion")) {
    if (!document["criterion"].is_string()) throw InputError("\"criterion\" must be a string");
    out.criterion = document["criterion"].get<std::string>();
  }
  const Json& spectra = field(document, "spectra");
  if (!spectra.is_array() || spectra.empty()) throw InputError("\"spectra\" must be a nonempty array");
  for (const auto& s : spectra) {
    std::vector<double> values;
    if (s.is_number()) {
      values.push_back(s.get<double>());
    } else if (s.is_array()) {
      for (const auto& v : s) values.push_back(number(v, "eigenvalue"));
    } else {
      throw InputError("each spectrum must be a number or an array of numbers");
    }
    out.spectra.push_back(std::move(values));
  }
  return out;
}

Report subset_json(SubsetMask s) { return Report(s.members()); }

Report matrix_json(const ComplexMatrix& m) {
  Report rows = Report::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Report row = Report::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Report vector_json(const ComplexVector& v) {
  Report out = Report::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

Report witness_json(const InequalityWitness& w) {
  Report out;
  out["inequality"] = w.inequality;
  out["subset"] = subset_json(w.subset);
  out["x"] = w.x.to_string();
  out["value"] = to_string(w.value);
  return out;
}

Report joint_json(const JointTable& joint) {
  Report table = Report::object();
  for (std::uint32_t x = 0; x < joint.values().size(); ++x) {
    table[Outcome(joint.n(), x).to_string()] = to_string(joint.values()[x]);
  }
  Report out;
  out["kind"] = "joint";
  out["n"] = joint.n();
  out["table"] = std::move(table);
  return out;
}

void write_json(const std::filesystem::path& path, const Report& report) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << report.dump(2) << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace subcompat::cli
