#pragma once

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "resq/cluster/pattern.hpp"
#include "resq/device/device_io.hpp"
#include "resq/format.hpp"
#include "resq/pulse/cz.hpp"
#include "resq/pulse/report.hpp"
#include "resq/random.hpp"
#include "resq/resources/estimator.hpp"

namespace resq::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kInfeasible = 2 };

// A device document after --set edits, with the lattice it describes.
struct LoadedDevice {
  nlohmann::json doc;
  DeviceFile device;
};

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << text;
}

// Fills every defaults entry a file may omit, so sweep and --set paths such
// as defaults.omega_MHz always resolve.
inline void complete_defaults(nlohmann::json& doc) {
  if (!doc.is_object()) return;
  const DeviceDefaults d;
  const OperatingPoint op;
  nlohmann::json full = {{"epsilon_GHz", d.epsilon / units::GHz},
                         {"g_MHz", d.g / units::MHz},
                         {"tau_cha_us", d.tau_cha / units::us},
                         {"tau_pho_us", d.tau_pho / units::us},
                         {"inner_g_MHz", d.inner_g / units::MHz},
                         {"inner_tau_us", d.inner_tau / units::us},
                         {"inner_epsilon_min_GHz", d.inner_epsilon_min / units::GHz},
                         {"inner_epsilon_max_GHz", d.inner_epsilon_max / units::GHz},
                         {"omega_MHz", op.rabi_strength / units::MHz},
                         {"kappa_low_MHz", op.kappa_low / units::MHz}};
  if (!doc.contains("defaults")) doc["defaults"] = nlohmann::json::object();
  if (!doc["defaults"].is_object()) return;  // parse_device reports it
  for (const auto& [k, v] : full.items()) {
    if (!doc["defaults"].contains(k)) doc["defaults"][k] = v;
  }
}

// Sets a numeric leaf addressed by a dotted path ("defaults.epsilon_GHz",
// "overrides.0.tau_cha_us", "w_prime_GHz"). The leaf must already exist.
inline void set_path(nlohmann::json& doc, const std::string& path, double value) {
  nlohmann::json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw FormatError("empty parameter path");
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::string& p = parts[k];
    nlohmann::json* next = nullptr;
    if (node->is_object() && node->contains(p)) {
      next = &(*node)[p];
    } else if (node->is_array() && !p.empty() &&
               std::all_of(p.begin(), p.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      const auto idx = std::stoul(p);
      if (idx < node->size()) next = &(*node)[idx];
    }
    if (next == nullptr) throw FormatError("parameter path '" + path + "' does not resolve");
    node = next;
  }
  if (!node->is_number()) throw FormatError("parameter path '" + path + "' is not a number");
  *node = value;
}

inline void apply_sets(nlohmann::json& doc, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw FormatError("--set expects path=value, got '" + s + "'");
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(s.substr(eq + 1), &used);
      if (used != s.size() - eq - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw FormatError("--set value in '" + s + "' is not a number");
    }
    set_path(doc, s.substr(0, eq), v);
  }
}

inline LoadedDevice load_device_with(const std::string& path,
                                     const std::vector<std::string>& sets) {
  const std::string text = read_text(path);
  LoadedDevice out;
  try {
    out.device = parse_device(text);  // line/column diagnostics on the raw file
    out.doc = nlohmann::json::parse(text);
    if (!sets.empty()) {
      complete_defaults(out.doc);
      apply_sets(out.doc, sets);
      out.device = parse_device(out.doc.dump());
    }
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
  return out;
}

// "1,1-1,2", "1:1-1:2" or "2-3" (1D).
inline const JunctionSpec& find_junction(const LatticeSpec& lat, const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) {
    throw FormatError("junction '" + text + "' must look like 1,1-1,2");
  }
  auto parse_site = [&](const std::string& s) {
    SiteId out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, s.find(':') != std::string::npos ? ':' : ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument("junk");
      } catch (const std::exception&) {
        throw FormatError("junction '" + text + "' has a non-integer coordinate");
      }
    }
    return out;
  };
  try {
    return lat.junction(parse_site(text.substr(0, dash)), parse_site(text.substr(dash + 1)));
  } catch (const LatticeError& e) {
    throw FormatError(std::string("unknown junction: ") + e.what());
  }
}

inline const JunctionSpec& pick_junction(const LatticeSpec& lat, const std::string& text) {
  if (!text.empty()) return find_junction(lat, text);
  if (lat.junctions().empty()) throw FormatError("the device has no junctions");
  return lat.junctions().begin()->second;
}

inline TimingBudget device_budget(const DeviceFile& f) {
  return round_budget(derive_budget(f.lattice, f.operating.rabi_strength, f.operating.kappa_low));
}

// Runs `work(i)` for i in [0, count) on up to `threads` workers. Callers
// store results by index, so output order never depends on scheduling.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& work) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

struct CommonOptions {
  std::string device_path;
  std::vector<std::string> sets;
  std::string out_dir;
};

struct ValidateOptions {
  double margin = kDefaultMargin;
  int d = 0;        // 0: lattice dimension
  long long n = 0;  // 0: number of sites
};

inline int cmd_validate(const CommonOptions& c, const ValidateOptions& o, std::ostream& out) {
  const LoadedDevice dev = load_device_with(c.device_path, c.sets);
  const auto& lat = dev.device.lattice;
  const int d = o.d > 0 ? o.d : lat.dimension();
  const long long n = o.n > 0 ? o.n : static_cast<long long>(lat.site_count());
  const FeasibilityReport rep = check_feasibility(lat, device_budget(dev.device), d, n, o.margin);
  out << feasibility_text(rep);
  if (!c.out_dir.empty()) {
    const std::filesystem::path dir(c.out_dir);
    write_text(dir / "feasibility.json", feasibility_json(rep).dump(2) + "\n");
    write_text(dir / "feasibility.csv", feasibility_csv(rep));
  }
  return rep.pass ? kOk : kInfeasible;
}

struct GateOptions {
  std::string junction;
  std::optional<double> omega_mhz;
  int n_max = kDefaultFockCutoff;
  bool decoherence = false;
  bool convergence = false;
};

inline GateResult run_gate(const DeviceFile& f, const JunctionSpec& j, std::optional<double> omega,
                           int n_max, bool decoherence) {
  const auto& lat = f.lattice;
  const auto& l = lat.resonator(j.left);
  const auto& r = lat.resonator(j.right);
  const double w = omega ? *omega : f.operating.rabi_strength;
  PulseSpec pulse;
  if (w > 0.0) {
    pulse = optimal_cz_pulse(j, l, r, w);
  } else {
    // No drive: keep the nominal gate window so the run is comparable.
    pulse = optimal_cz_pulse(j, l, r, f.operating.rabi_strength > 0.0 ? f.operating.rabi_strength
                                                                     : kDefaultRabiStrength);
    pulse.rabi_strength = 0.0;
  }
  std::optional<DecoherenceSpec> dec;
  if (decoherence) dec = junction_decoherence(j, l, r);
  return simulate_cz(j, l, r, pulse, n_max, dec);
}

inline int cmd_gate(const CommonOptions& c, const GateOptions& o, std::ostream& out) {
  const LoadedDevice dev = load_device_with(c.device_path, c.sets);
  const JunctionSpec& j = pick_junction(dev.device.lattice, o.junction);
  std::optional<double> omega;
  if (o.omega_mhz) {
    if (*o.omega_mhz < 0.0) throw FormatError("--omega must be >= 0");
    omega = *o.omega_mhz * units::MHz;
  }
  const GateResult main = run_gate(dev.device, j, omega, o.n_max, o.decoherence);
  nlohmann::json report = gate_json(main);
  report["junction"] = junction_label(j.left, j.right);
  if (o.convergence) {
    nlohmann::json runs = nlohmann::json::array();
    for (int n : {1, o.n_max}) {
      const GateResult r = n == o.n_max ? main : run_gate(dev.device, j, omega, n, o.decoherence);
      runs.push_back(gate_json(r));
    }
    report["convergence"] = runs;
  }
  out << "junction " << junction_label(j.left, j.right) << '\n';
  out << "conditional_phase/pi = " << fmt9(main.conditional_phase / units::pi) << '\n';
  out << "single_qubit_phases_rad = " << fmt9(main.single_qubit_phases[0]) << ' '
      << fmt9(main.single_qubit_phases[1]) << '\n';
  out << "leakage = " << fmt9(main.leakage) << '\n';
  out << "fidelity = " << fmt9(main.avg_gate_fidelity) << '\n';
  if (o.convergence) {
    for (const auto& r : report["convergence"]) {
      out << "n_max " << r["n_max"].get<int>() << ": leakage = " << fmt9(r["leakage"].get<double>())
          << ", conditional_phase/pi = " << fmt9(r["conditional_phase_over_pi"].get<double>())
          << '\n';
    }
  }
  if (!c.out_dir.empty()) {
    write_text(std::filesystem::path(c.out_dir) / "gate.json", report.dump(2) + "\n");
  }
  return kOk;
}

struct MbqcOptions {
  std::string pattern_path;
  Backend backend = Backend::dense;
  std::uint64_t seed = 0;
  std::size_t shots = 1;
  unsigned threads = 1;
};

inline int cmd_mbqc(const CommonOptions& c, const MbqcOptions& o, std::ostream& out,
                    std::ostream& err) {
  const LoadedDevice dev = load_device_with(c.device_path, c.sets);
  const MeasurementPattern pattern = load_pattern(o.pattern_path);
  const auto& lat = dev.device.lattice;
  if (o.shots < 1) throw FormatError("--shots must be >= 1");

  struct Shot {
    std::vector<StepRecord> records;
    std::optional<double> fidelity;
  };
  std::vector<Shot> shots(o.shots);
  parallel_for(o.shots, o.threads, [&](std::size_t s) {
    std::mt19937_64 rng = stream_rng(o.seed, s);
    PatternRun run = run_pattern(lat, pattern, rng, o.backend);
    shots[s].records = std::move(run.records);
    if (pattern.expected_output) {
      DenseRegister reg = run.dense ? std::move(*run.dense) : run.graph->residual();
      apply_byproduct_corrections(reg, run.byproducts);
      const auto& exp = *pattern.expected_output;
      shots[s].fidelity = reg.probability(reg.qubit_of(exp.site), exp.state);
    }
  });

  std::ostringstream csv;
  csv << "step,site,gamma_rad,outcome\n";
  for (const auto& shot : shots) {
    for (const auto& r : shot.records) {
      csv << r.step << ',' << site_label(r.site) << ',' << fmt9(r.gamma) << ',' << r.outcome
          << '\n';
    }
  }
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t k = 0; k < pattern.steps.size(); ++k) {
    std::size_t ones = 0;
    for (const auto& shot : shots) ones += static_cast<std::size_t>(shot.records[k].outcome);
    const double f1 = static_cast<double>(ones) / static_cast<double>(o.shots);
    steps.push_back({{"step", k},
                     {"site", site_label(pattern.steps[k].site)},
                     {"frequency_0", 1.0 - f1},
                     {"frequency_1", f1}});
  }
  nlohmann::json summary = {{"backend", to_string(o.backend)},
                            {"seed", o.seed},
                            {"shots", o.shots},
                            {"steps", steps}};
  if (pattern.expected_output) {
    double sum = 0.0;
    double worst = 1.0;
    for (const auto& shot : shots) {
      sum += *shot.fidelity;
      worst = std::min(worst, *shot.fidelity);
    }
    summary["mean_output_fidelity"] = sum / static_cast<double>(o.shots);
    summary["min_output_fidelity"] = worst;
  }
  if (!c.out_dir.empty()) {
    const std::filesystem::path dir(c.out_dir);
    write_text(dir / "outcomes.csv", csv.str());
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    out << summary.dump(2) << '\n';
  } else {
    out << csv.str();
    err << summary.dump(2) << '\n';
  }
  return kOk;
}

struct EstimateOptions {
  int d = 0;
  long long n = 0;
  double margin = kDefaultMargin;
};

inline int cmd_estimate(const CommonOptions& c, const EstimateOptions& o, std::ostream& out) {
  const LoadedDevice dev = load_device_with(c.device_path, c.sets);
  const auto& lat = dev.device.lattice;
  const int d = o.d > 0 ? o.d : lat.dimension();
  const long long n = o.n > 0 ? o.n : static_cast<long long>(lat.site_count());
  const TimingBudget b = device_budget(dev.device);
  double tau_pho = std::numeric_limits<double>::infinity();
  for (const auto& [_, r] : lat.resonators()) tau_pho = std::min(tau_pho, r.photon_lifetime);
  const double total = total_time(d, n, b);
  const long long n_max = max_feasible_size(b, tau_pho, d, o.margin);
  const FeasibilityReport rep = check_feasibility(lat, b, d, n, o.margin);

  out << "t_sin = " << fmt9(b.t_sin / units::ns) << " ns, t_cp = " << fmt9(b.t_cp / units::ns)
      << " ns, t_mea = " << fmt9(b.t_mea / units::ns) << " ns\n";
  out << "total_time(d=" << d << ", N=" << n << ") = " << fmt9(total / units::ns) << " ns\n";
  out << "N_max(d=" << d << ", margin=" << fmt9(o.margin) << ") = " << n_max << '\n';
  out << "ratio15 (worst) = " << fmt9(rep.worst15 >= 0 ? rep.junctions[rep.worst15].ratio15 : 0.0)
      << '\n';
  out << "ratio16 (worst) = " << fmt9(rep.worst16 >= 0 ? rep.junctions[rep.worst16].ratio16 : 0.0)
      << '\n';
  out << "ratio17 = " << fmt9(rep.ratio17) << '\n';
  if (!c.out_dir.empty()) {
    nlohmann::json j = {{"t_sin_ns", b.t_sin / units::ns},
                        {"t_cp_ns", b.t_cp / units::ns},
                        {"t_mea_ns", b.t_mea / units::ns},
                        {"d", d},
                        {"N", n},
                        {"total_time_ns", total / units::ns},
                        {"N_max", n_max},
                        {"feasibility", feasibility_json(rep)}};
    write_text(std::filesystem::path(c.out_dir) / "estimate.json", j.dump(2) + "\n");
  }
  return kOk;
}

struct SweepOptions {
  std::string param;
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  std::string junction;
  int n_max = kDefaultFockCutoff;
  unsigned threads = 1;
};

inline std::vector<SweepRow> run_sweep(const CommonOptions& c, const SweepOptions& o) {
  if (o.steps < 2) throw FormatError("--steps must be >= 2");
  const LoadedDevice base = load_device_with(c.device_path, c.sets);
  nlohmann::json doc = base.doc;
  complete_defaults(doc);
  set_path(doc, o.param, o.from);  // fail early on an unresolvable path

  std::vector<SweepRow> rows(static_cast<std::size_t>(o.steps));
  parallel_for(rows.size(), o.threads, [&](std::size_t i) {
    const double x = o.from + (o.to - o.from) * static_cast<double>(i) / (o.steps - 1);
    nlohmann::json point = doc;
    set_path(point, o.param, x);
    const DeviceFile f = parse_device(point.dump());
    const JunctionSpec& j = pick_junction(f.lattice, o.junction);
    // The pulse is re-derived from the swept parameters at every point.
    const GateResult r = run_gate(f, j, std::nullopt, o.n_max, false);
    rows[i] = {x, r.conditional_phase, r.leakage, r.avg_gate_fidelity, r.pulse.duration};
  });
  return rows;
}

inline int cmd_sweep(const CommonOptions& c, const SweepOptions& o, std::ostream& out) {
  const std::string csv = sweep_csv(run_sweep(c, o));
  if (!c.out_dir.empty()) write_text(std::filesystem::path(c.out_dir) / "sweep.csv", csv);
  out << csv;
  return kOk;
}

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and feasibility checker for resonator-lattice one-way computing"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  CommonOptions common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("device", common.device_path, "device-v1 JSON file")->required();
    sub->add_option("--set", common.sets, "Override a numeric device field, e.g. defaults.g_MHz=210");
    sub->add_option("--out", common.out_dir, "Directory for report files");
  };

  ValidateOptions vopt;
  auto* validate = app.add_subcommand("validate", "Check the feasibility inequalities");
  add_common(validate);
  validate->add_option("--margin", vopt.margin, "Required ratio for 'much larger'")
      ->check(CLI::Range(1.0, 1e300));
  validate->add_option("--d", vopt.d, "Lattice dimension for the time budget");
  validate->add_option("--N", vopt.n, "Number of photonic qubits");

  GateOptions gopt;
  double omega_mhz = -1.0;
  auto* gate = app.add_subcommand("gate", "Simulate the conditional-phase gate of one junction");
  add_common(gate);
  gate->add_option("--junction", gopt.junction, "Junction as 1,1-1,2 (default: first)");
  auto* omega_opt = gate->add_option("--omega", omega_mhz, "Rabi strength in MHz (times 2 pi)");
  gate->add_option("--nmax", gopt.n_max, "Fock cutoff per resonator")->check(CLI::Range(1, 12));
  gate->add_flag("--decoherence", gopt.decoherence, "Include T1 of the mediator and resonators");
  gate->add_flag("--convergence", gopt.convergence, "Also run at n_max = 1 and report both");

  MbqcOptions mopt;
  std::string backend = "dense";
  auto* mbqc = app.add_subcommand("mbqc", "Run a measurement pattern on the lattice cluster state");
  add_common(mbqc);
  mbqc->add_option("pattern", mopt.pattern_path, "pattern-v1 JSON file")->required();
  mbqc->add_option("--backend", backend, "dense or graph")
      ->check(CLI::IsMember({"dense", "graph"}));
  mbqc->add_option("--seed", mopt.seed, "Base seed");
  mbqc->add_option("--shots", mopt.shots, "Number of shots");
  mbqc->add_option("--threads", mopt.threads, "Worker threads (0: all cores)");

  EstimateOptions eopt;
  auto* estimate = app.add_subcommand("estimate", "Timing budget and maximum lattice size");
  add_common(estimate);
  estimate->add_option("--d", eopt.d, "Lattice dimension");
  estimate->add_option("--N", eopt.n, "Number of photonic qubits");
  estimate->add_option("--margin", eopt.margin, "Required ratio for 'much larger'")
      ->check(CLI::Range(1.0, 1e300));

  SweepOptions sopt;
  auto* sweep = app.add_subcommand("sweep", "Gate metrics against one device parameter");
  add_common(sweep);
  sweep->add_option("--param", sopt.param, "Dotted path, e.g. defaults.omega_MHz")->required();
  sweep->add_option("--from", sopt.from, "First value")->required();
  sweep->add_option("--to", sopt.to, "Last value")->required();
  sweep->add_option("--steps", sopt.steps, "Number of points (>= 2)")->required();
  sweep->add_option("--junction", sopt.junction, "Junction as 1,1-1,2 (default: first)");
  sweep->add_option("--nmax", sopt.n_max, "Fock cutoff per resonator")->check(CLI::Range(1, 12));
  sweep->add_option("--threads", sopt.threads, "Worker threads (0: all cores)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (validate->parsed()) return cmd_validate(common, vopt, out);
    if (gate->parsed()) {
      if (omega_opt->count() > 0) gopt.omega_mhz = omega_mhz;
      return cmd_gate(common, gopt, out);
    }
    if (mbqc->parsed()) {
      mopt.backend = backend == "graph" ? Backend::graph : Backend::dense;
      return cmd_mbqc(common, mopt, out, err);
    }
    if (estimate->parsed()) return cmd_estimate(common, eopt, out);
    if (sweep->parsed()) return cmd_sweep(common, sopt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace resq::cli
