#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cli/io.hpp"
#include "subcompat/cli.hpp"
#include "subcompat/lp_oracle.hpp"

namespace subcompat::cli {
namespace {

constexpr const char* kVersion = SUBCOMPAT_VERSION;

using Body = std::function<int(Report&)>;

const char* verdict_name(int code) {
  switch (code) {
    case kCompatible:
      return "compatible";
    case kIncompatible:
      return "incompatible";
    case kUndetermined:
      return "undetermined";
    case kInputError:
      return "input_error";
    default:
      return "internal_error";
  }
}

// Runs one command body, mapping exceptions onto exit codes, and prints the
// report. Bodies may set "verdict" themselves; otherwise it follows the code.
int execute(const std::string& command, const Body& body, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report["command"] = command;
  report["version"] = kVersion;
  int code = kInternalError;
  try {
    code = body(report);
  } catch (const NotEquimarginalError& e) {
    const auto& w = e.witness();
    report["equimarginal"] = false;
    report["equimarginal_witness"] = {{"first", subset_json(w.first)},
                                      {"second", subset_json(w.second)},
                                      {"common", subset_json(w.common)}};
    report["error"] = e.what();
    code = kInputError;
  } catch (const QuantumNotEquimarginalError& e) {
    report["equimarginal"] = false;
    report["equimarginal_deviation"] = e.deviation();
    report["error"] = e.what();
    code = kInputError;
  } catch (const InputError& e) {
    report["error"] = e.what();
    code = kInputError;
  } catch (const ResourceError& e) {
    report["error"] = e.what();
    code = kInputError;
  } catch (const std::exception& e) {
    report["error"] = e.what();
    code = kInternalError;
  }
  if (!report.contains("verdict") || code == kInputError || code == kInternalError) {
    report["verdict"] = verdict_name(code);
  }
  report["exit_code"] = code;
  report["elapsed_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out << report.dump(2) << '\n';
  if (report.contains("error")) err << "subcompat " << command << ": " << report["error"].get<std::string>() << '\n';
  return code;
}

void require_equimarginal(const MarginalFamily& family) {
  const auto eq = check_equimarginal(family);
  if (!eq.equimarginal) throw NotEquimarginalError(*eq.witness);
}

Report classical_verdict_json(const ClassicalVerdict& v) {
  Report out;
  out["compatible"] = v.compatible;
  if (v.witness) out["witness"] = witness_json(*v.witness);
  return out;
}

std::size_t worker_count(std::size_t tasks) {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) threads = static_cast<std::size_t>(v);
  }
  return std::min(threads, std::max<std::size_t>(tasks, 1));
}

// Runs task(i) for i in [0, count) on up to worker_count threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t threads = worker_count(count);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------- classical

int check_classical(const std::string& path, const std::string& method, Report& report) {
  const auto loaded = load_file(path);
  report["input"] = path;
  report["input_digest"] = loaded.digest;
  const MarginalFamily family = parse_classical_family(loaded.document);
  report["n"] = family.n();
  report["method"] = method;
  require_equimarginal(family);
  report["equimarginal"] = true;

  std::vector<std::string> methods;
  if (method == "all") {
    if (family.covers_all_proper_subsets()) {
      methods.push_back("theorem2");
      methods.push_back("theorem3");
    }
    if (family.is_pairwise_triple()) methods.push_back("wigner");
    if (family.n() <= kDefaultOracleCap) methods.push_back("oracle");
    if (methods.empty()) throw InputError("no check applies to this family");
  } else {
    methods.push_back(method);
  }

  Report checks = Report::object();
  std::vector<bool> verdicts;
  for (const auto& m : methods) {
    if (m == "oracle") {
      const auto v = oracle_verdict(family);
      Report r;
      r["compatible"] = v.feasible;
      if (v.solution) r["solution"] = joint_json(*v.solution)["table"];
      checks[m] = std::move(r);
      verdicts.push_back(v.feasible);
      continue;
    }
    ClassicalVerdict v;
    if (m == "theorem2") {
      v = check_theorem2(family);
    } else if (m == "theorem3") {
      v = check_theorem3(family);
    } else {
      v = check_wigner(family);
    }
    checks[m] = classical_verdict_json(v);
    verdicts.push_back(v.compatible);
  }
  report["checks"] = std::move(checks);

  const bool agree = std::all_of(verdicts.begin(), verdicts.end(), [&](bool b) { return b == verdicts.front(); });
  report["agreement"] = agree;
  if (!agree) {
    report["verdict"] = "cross_check_mismatch";
    report["error"] = "checks disagree; this is a defect in the tool";
    return kInternalError;
  }
  const int code = verdicts.front() ? kCompatible : kIncompatible;
  report["verdict"] = verdict_name(code);
  return code;
}

int reconstruct(const std::string& path, const std::string& out_path, Report& report) {
  const auto loaded = load_file(path);
  report["input"] = path;
  report["input_digest"] = loaded.digest;
  const MarginalFamily family = parse_classical_family(loaded.document);
  report["n"] = family.n();
  require_equimarginal(family);
  const auto rec = reconstruct_joint(family);
  if (!rec.verdict.compatible) {
    report["verdict"] = verdict_name(kIncompatible);
    report["witness"] = witness_json(*rec.verdict.witness);
    return kIncompatible;
  }
  const JointTable& joint = *rec.verdict.certificate;
  report["interval"] = {{"lower", to_string(rec.interval->lower)},
                        {"upper", to_string(rec.interval->upper)},
                        {"chosen", to_string(rec.interval->chosen)}};
  bool round_trip = true;
  for (const auto& [subset, table] : family.tables()) round_trip = round_trip && marginalize(joint, subset) == table;
  report["round_trip"] = round_trip;
  report["joint"] = joint_json(joint)["table"];
  if (!round_trip) {
    report["error"] = "reconstructed joint does not reproduce the input marginals";
    return kInternalError;
  }
  if (!out_path.empty()) {
    write_json(out_path, joint_json(joint));
    report["output"] = out_path;
  }
  report["verdict"] = verdict_name(kCompatible);
  return kCompatible;
}

// ------------------------------------------------------------------ quantum

ReducedFamily3 load_family3(const std::string& path, Report& report) {
  const auto loaded = load_file(path);
  report["input"] = path;
  report["input_digest"] = loaded.digest;
  ReducedFamily3 family = parse_quantum_family3(loaded.document);
  const auto eq = check_q_equimarginal(family);
  report["equimarginal"] = eq.equimarginal;
  report["equimarginal_deviation"] = eq.max_deviation;
  if (!eq.equimarginal) throw QuantumNotEquimarginalError(eq.max_deviation);
  return family;
}

Report bell_wigner_json(const QuantumVerdict& v) {
  Report out;
  out["passes"] = v.passes;
  out["min_eig"] = v.min_eig;
  out["max_eig"] = v.max_eig;
  if (v.witness_vector) {
    out["witness_vector"] = vector_json(v.witness_vector->amplitudes());
    out["witness_expectation"] = v.witness_expectation;
  }
  return out;
}

int check_quantum3(const std::string& path, Report& report) {
  const auto family = load_family3(path, report);
  const auto v = check_bell_wigner(family);
  report["bell_wigner"] = bell_wigner_json(v);
  const int code = v.passes ? kCompatible : kIncompatible;
  report["verdict"] = v.passes ? "passes" : "fails";
  return code;
}

int probe(const std::string& path, const ProbeOptions& options, const std::string& out_path, Report& report) {
  const auto family = load_family3(path, report);
  report["seed"] = options.seed;
  report["max_iter"] = options.max_iter;
  report["tol"] = options.tol;
  const auto bw = check_bell_wigner(family);
  report["bell_wigner"] = bell_wigner_json(bw);
  if (!bw.passes) throw InputError("Bell-Wigner conditions fail; the probe's hypothesis does not hold");
  const auto result = probe_sufficiency(family, options);
  report["status"] = result.status == ProbeStatus::reconstructed ? "reconstructed" : "undetermined";
  report["iterations"] = result.iterations;
  report["residual"] = result.residual;
  if (result.status == ProbeStatus::undetermined) {
    report["verdict"] = verdict_name(kUndetermined);
    return kUndetermined;
  }
  const Report candidate = matrix_json(result.candidate->matrix());
  report["candidate"] = candidate;
  if (!out_path.empty()) {
    write_json(out_path, Report{{"kind", "density_matrix"}, {"qubits", 3}, {"data", candidate}});
    report["output"] = out_path;
  }
  report["verdict"] = verdict_name(kCompatible);
  return kCompatible;
}

int counterexample(Report& report) {
  report["input_digest"] = nullptr;
  const auto c = counterexample_n4();
  report["psi"] = vector_json(c.psi.amplitudes());
  report["subset"] = subset_json(SubsetMask::of({2, 3, 4}));
  report["delta1"] = matrix_json(c.delta1);
  report["min_eig"] = c.min_eig;
  report["eigenvector"] = vector_json(c.eigenvector);
  report["overlap"] = c.overlap;
  report["closed_form_residual"] = c.closed_form_residual;
  report["verdict"] = "reproduced";
  return kCompatible;
}

int gen_delta_cmd(const std::string& path, const std::string& subset_text, Report& report) {
  const auto loaded = load_file(path);
  report["input"] = path;
  report["input_digest"] = loaded.digest;
  const auto parsed = parse_quantum_family_n(loaded.document);
  std::vector<int> members;
  std::stringstream ss(subset_text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      members.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw InputError("--subset must be a comma-separated list of indices");
    }
  }
  const SubsetMask a = SubsetMask::from_members(members);
  report["n"] = parsed.n;
  report["subset"] = subset_json(a);
  const auto d = gen_delta(parsed.family, a, parsed.n);
  report["min_eig"] = d.min_eig;
  report["max_eig"] = d.max_eig;
  report["delta"] = matrix_json(d.delta);
  report["verdict"] = "computed";
  return kCompatible;
}

// ------------------------------------------------------------------ spectra

double qubit_smaller(const std::vector<double>& s) {
  if (s.size() == 1) return s[0];
  if (s.size() == 2) return Spectrum(s)[0];
  throw InputError("qubit entries must be a smaller eigenvalue or a two-level spectrum");
}

int check_spectra(const std::string& path, std::string criterion, int fermions, Report& report) {
  const auto loaded = load_file(path);
  report["input"] = path;
  report["input_digest"] = loaded.digest;
  const auto file = parse_spectra(loaded.document);
  if (criterion.empty()) criterion = file.criterion;
  if (criterion.empty()) throw InputError("no criterion given on the command line or in the file");
  if (!file.criterion.empty() && file.criterion != criterion) {
    throw InputError("--criterion " + criterion + " contradicts the file's criterion " + file.criterion);
  }
  report["criterion"] = criterion;
  const auto& sp = file.spectra;

  CriterionVerdict verdict;
  if (criterion == "polygon") {
    std::vector<double> lams;
    for (const auto& s : sp) lams.push_back(qubit_smaller(s));
    verdict = check_polygon(lams);
  } else if (criterion == "higuchi") {
    if (sp.size() != 3) throw InputError("higuchi needs three spectra");
    verdict = check_higuchi(Spectrum(sp[0]), Spectrum(sp[1]), Spectrum(sp[2]));
  } else if (criterion == "bravyi") {
    if (sp.size() != 3) throw InputError("bravyi needs two qubit entries and one four-level spectrum");
    verdict = check_bravyi(qubit_smaller(sp[0]), qubit_smaller(sp[1]), Spectrum(sp[2]));
  } else if (criterion == "hzg") {
    std::vector<Spectrum> spectra;
    for (const auto& s : sp) spectra.emplace_back(s);
    const auto v = check_hzg(spectra, sp.front().size());
    report["necessary_only"] = true;
    if (v.failed_inequality) report["failed_inequality"] = *v.failed_inequality;
    report["verdict"] = v.consistent_with_necessity ? "consistent_with_necessity" : "incompatible";
    return v.consistent_with_necessity ? kCompatible : kIncompatible;
  } else if (criterion == "coleman") {
    if (sp.size() != 1) throw InputError("coleman needs exactly one spectrum");
    if (fermions < 1) throw InputError("coleman needs --fermions n with n >= 1");
    report["fermions"] = fermions;
    verdict = check_coleman(Spectrum(sp[0]), fermions);
  } else {
    throw InputError("unknown criterion " + criterion);
  }
  if (verdict.failed_inequality) report["failed_inequality"] = *verdict.failed_inequality;
  const int code = verdict.compatible ? kCompatible : kIncompatible;
  report["verdict"] = verdict_name(code);
  return code;
}

// ------------------------------------------------------------------- sample

struct SampleOptions {
  int qubits = 3;
  int rank = 0;  // 0: full rank
  std::uint64_t seed = 0;
  int count = 1;
  std::string out_dir;
};

Report family3_json(const DensityMatrix& rho) {
  const auto f = ReducedFamily3::from_state(rho);
  Report matrices = Report::array();
  matrices.push_back({{"subset", {1, 2}}, {"data", matrix_json(f.rho12.matrix())}});
  matrices.push_back({{"subset", {1, 3}}, {"data", matrix_json(f.rho13.matrix())}});
  matrices.push_back({{"subset", {2, 3}}, {"data", matrix_json(f.rho23.matrix())}});
  return Report{{"kind", "quantum_family3"}, {"matrices", std::move(matrices)}};
}

int sample(SampleOptions options, Report& report) {
  report["input_digest"] = nullptr;
  if (options.qubits < 1 || options.qubits > 6) throw InputError("--qubits must be in 1..6");
  const int dim = 1 << options.qubits;
  if (options.rank == 0) options.rank = dim;
  if (options.count < 1) throw InputError("--count must be positive");
  report["qubits"] = options.qubits;
  report["rank"] = options.rank;
  report["seed"] = options.seed;
  report["count"] = options.count;
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);

  const auto count = static_cast<std::size_t>(options.count);
  std::vector<Report> entries(count);
  std::vector<int> passes(count, 1);
  parallel_for(count, [&](std::size_t i) {
    const std::uint64_t seed = options.seed + i;
    const auto rho = sample_density(options.qubits, options.rank, seed);
    Report entry;
    entry["index"] = i;
    entry["seed"] = seed;
    if (!options.out_dir.empty()) {
      const auto state_path = std::filesystem::path(options.out_dir) / ("state_" + std::to_string(i) + ".json");
      write_json(state_path, Report{{"kind", "density_matrix"},
                                    {"qubits", options.qubits},
                                    {"rank", options.rank},
                                    {"seed", seed},
                                    {"data", matrix_json(rho.matrix())}});
      entry["file"] = state_path.filename().string();
    }
    if (options.qubits == 3) {
      const auto verdict = check_bell_wigner(ReducedFamily3::from_state(rho));
      passes[i] = verdict.passes ? 1 : 0;
      entry["bell_wigner"] = bell_wigner_json(verdict);
      if (!options.out_dir.empty()) {
        const auto family_path = std::filesystem::path(options.out_dir) / ("family_" + std::to_string(i) + ".json");
        write_json(family_path, family3_json(rho));
        entry["family_file"] = family_path.filename().string();
      }
    }
    entries[i] = std::move(entry);
  });
  report["samples"] = entries;
  if (!options.out_dir.empty()) report["output"] = options.out_dir;
  if (options.qubits != 3) {
    report["verdict"] = "sampled";
    return kCompatible;
  }
  const bool all_pass = std::all_of(passes.begin(), passes.end(), [](int p) { return p == 1; });
  report["all_pass"] = all_pass;
  report["verdict"] = all_pass ? "passes" : "fails";
  return all_pass ? kCompatible : kIncompatible;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compatibility checks for classical marginals and qubit reduced states"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string path, out_path, method = "all", criterion, subset_text;
  int fermions = 0;
  ProbeOptions probe_options;
  SampleOptions sample_options;

  auto* cc = app.add_subcommand("check-classical", "Check a classical marginal family");
  cc->add_option("path", path, "classical_family JSON file")->required();
  cc->add_option("--method", method, "theorem2, theorem3, wigner, oracle or all")
      ->check(CLI::IsMember({"theorem2", "theorem3", "wigner", "oracle", "all"}));

  auto* rc = app.add_subcommand("reconstruct", "Build a joint distribution from a compatible family");
  rc->add_option("path", path, "classical_family JSON file")->required();
  rc->add_option("--out", out_path, "write the joint table here");

  auto* q3 = app.add_subcommand("check-quantum3", "Bell-Wigner check on three two-qubit reductions");
  q3->add_option("path", path, "quantum_family3 JSON file")->required();

  auto* pr = app.add_subcommand("probe", "Search for a three-qubit state with the given reductions");
  pr->add_option("path", path, "quantum_family3 JSON file")->required();
  pr->add_option("--max-iter", probe_options.max_iter, "iteration budget")->check(CLI::PositiveNumber);
  pr->add_option("--tol", probe_options.tol, "residual tolerance")->check(CLI::PositiveNumber);
  pr->add_option("--seed", probe_options.seed, "perturbation seed for the starting point");
  pr->add_option("--out", out_path, "write the candidate state here");

  auto* cx = app.add_subcommand("counterexample-n4", "Four-qubit state violating the generalized bound");

  auto* cs = app.add_subcommand("check-spectra", "Evaluate a spectral criterion");
  cs->add_option("path", path, "spectra JSON file")->required();
  cs->add_option("--criterion", criterion, "polygon, higuchi, bravyi, hzg or coleman")
      ->check(CLI::IsMember({"polygon", "higuchi", "bravyi", "hzg", "coleman"}));
  cs->add_option("--fermions", fermions, "number of fermions (coleman)");

  auto* sm = app.add_subcommand("sample", "Draw random density matrices");
  sm->add_option("--qubits", sample_options.qubits, "number of qubits (1..6)");
  sm->add_option("--rank", sample_options.rank, "rank (default: full)");
  sm->add_option("--seed", sample_options.seed, "base seed; sample i uses seed + i");
  sm->add_option("--count", sample_options.count, "number of samples");
  sm->add_option("--out", sample_options.out_dir, "output directory");

  auto* gd = app.add_subcommand("gen-delta", "Spectrum of the odd-subset operator for an n-qubit family");
  gd->add_option("path", path, "quantum_family_n JSON file")->required();
  gd->add_option("--subset", subset_text, "odd subset, e.g. 2,3,4")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kInputError;
  }

  if (cc->parsed()) return execute("check-classical", [&](Report& r) { return check_classical(path, method, r); }, out, err);
  if (rc->parsed()) return execute("reconstruct", [&](Report& r) { return reconstruct(path, out_path, r); }, out, err);
  if (q3->parsed()) return execute("check-quantum3", [&](Report& r) { return check_quantum3(path, r); }, out, err);
  if (pr->parsed()) {
    return execute("probe", [&](Report& r) { return probe(path, probe_options, out_path, r); }, out, err);
  }
  if (cx->parsed()) return execute("counterexample-n4", [&](Report& r) { return counterexample(r); }, out, err);
  if (cs->parsed()) {
    return execute("check-spectra", [&](Report& r) { return check_spectra(path, criterion, fermions, r); }, out, err);
  }
  if (sm->parsed()) return execute("sample", [&](Report& r) { return sample(sample_options, r); }, out, err);
  if (gd->parsed()) return execute("gen-delta", [&](Report& r) { return gen_delta_cmd(path, subset_text, r); }, out, err);
  return kInputError;
}

}  // namespace subcompat::cli
