#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "resq/cluster/cluster.hpp"
#include "resq/device/device_io.hpp"

namespace resq {

inline constexpr const char* kPatternSchema = "pattern-v1";

// The measured angle is the base angle, negated (flips_sign) or shifted by pi
// (otherwise) when the XOR of the listed earlier outcomes is 1.
struct AdaptRule {
  std::vector<std::size_t> xor_of;  // 0-based step indices
  bool flips_sign = true;
};

struct PatternStep {
  SiteId site;
  double gamma = 0.0;
  AdaptRule adapt;
};

// Pauli frame of an output qubit: X^{xor of x_of} Z^{xor of z_of}.
struct ByproductRule {
  SiteId site;
  std::vector<std::size_t> x_of;
  std::vector<std::size_t> z_of;
};

struct SiteState {
  SiteId site;
  Eigen::Vector2cd state;
};

struct MeasurementPattern {
  std::vector<PatternStep> steps;
  std::vector<ByproductRule> byproducts;
  std::vector<SiteState> inputs;              // replace |+> before fusion
  std::optional<SiteState> expected_output;   // after byproduct correction

  // Step order is execution order: every referenced outcome must come from
  // an earlier step, and no site is measured twice.
  void validate() const {
    std::set<SiteId> seen;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      if (!seen.insert(steps[k].site).second) {
        throw FormatError("step " + std::to_string(k) + " measures site (" +
                          to_string(steps[k].site) + ") a second time");
      }
      for (auto dep : steps[k].adapt.xor_of) {
        if (dep >= k) {
          throw FormatError("step " + std::to_string(k) + " depends on step " +
                            std::to_string(dep) + ", which does not precede it");
        }
      }
    }
    for (const auto& b : byproducts) {
      for (const auto* list : {&b.x_of, &b.z_of}) {
        for (auto dep : *list) {
          if (dep >= steps.size()) {
            throw FormatError("byproduct of site (" + to_string(b.site) +
                              ") references missing step " + std::to_string(dep));
          }
        }
      }
    }
  }
};

inline int xor_outcomes(const std::vector<std::size_t>& which, const std::vector<int>& outcomes) {
  int parity = 0;
  for (auto k : which) parity ^= outcomes.at(k);
  return parity;
}

inline double adapted_angle(const PatternStep& step, const std::vector<int>& outcomes) {
  if (xor_outcomes(step.adapt.xor_of, outcomes) == 0) return step.gamma;
  return step.adapt.flips_sign ? -step.gamma : step.gamma + units::pi;
}

enum class Backend { dense, graph };

inline const char* to_string(Backend b) { return b == Backend::dense ? "dense" : "graph"; }

struct StepRecord {
  std::size_t step = 0;
  SiteId site;
  double gamma = 0.0;  // angle actually measured
  int outcome = 0;
  double p0 = 0.0;     // Born probability of outcome 0 before sampling
};

struct Byproduct {
  SiteId site;
  int x = 0;
  int z = 0;
};

struct PatternRun {
  std::vector<StepRecord> records;
  std::vector<Byproduct> byproducts;
  std::optional<DenseRegister> dense;  // residual state, dense backend
  std::optional<GraphState> graph;     // full tableau, graph backend
};

// k with gamma = k pi/2 (mod 2 pi), if gamma is a Clifford angle.
inline std::optional<int> clifford_quarter_turns(double gamma) {
  const double q = gamma / (0.5 * units::pi);
  const double k = std::round(q);
  if (std::abs(q - k) > 1e-9) return std::nullopt;
  return static_cast<int>(((static_cast<long long>(k) % 4) + 4) % 4);
}

inline std::vector<Byproduct> evaluate_byproducts(const MeasurementPattern& pattern,
                                                  const std::vector<int>& outcomes) {
  std::vector<Byproduct> out;
  for (const auto& b : pattern.byproducts) {
    out.push_back({b.site, xor_outcomes(b.x_of, outcomes), xor_outcomes(b.z_of, outcomes)});
  }
  return out;
}

// Undoes X^x Z^z on the listed output qubits.
inline void apply_byproduct_corrections(DenseRegister& reg, const std::vector<Byproduct>& bps) {
  for (const auto& b : bps) {
    const std::size_t q = reg.qubit_of(b.site);
    if (b.x) reg.apply(q, gates::pauli_x());
    if (b.z) reg.apply(q, gates::pauli_z());
  }
}

// Builds the lattice cluster state (with any prepared inputs) and executes the
// steps in order with feedforward.
inline PatternRun run_pattern(const LatticeSpec& lat, const MeasurementPattern& pattern,
                              std::mt19937_64& rng, Backend backend = Backend::dense) {
  pattern.validate();
  for (const auto& st : pattern.steps) {
    if (!lat.contains(st.site)) {
      throw LatticeError("pattern measures site (" + to_string(st.site) +
                         ") which is not in the lattice");
    }
  }
  PatternRun run;
  std::vector<int> outcomes;

  if (backend == Backend::dense) {
    DenseRegister reg = DenseRegister::plus_state(lat.sites());
    for (const auto& in : pattern.inputs) reg.prepare(reg.qubit_of(in.site), in.state);
    for (const auto& round : fusion_schedule(lat).rounds) {
      for (const auto& [a, b] : round) reg.apply_cz(reg.qubit_of(a), reg.qubit_of(b));
    }
    for (std::size_t k = 0; k < pattern.steps.size(); ++k) {
      const auto& st = pattern.steps[k];
      const double gamma = adapted_angle(st, outcomes);
      const BGammaResult m = measure_b_gamma(reg, st.site, gamma, rng);
      outcomes.push_back(m.outcome);
      run.records.push_back({k, st.site, gamma, m.outcome, m.p0});
    }
    run.dense = std::move(reg);
  } else {
    if (!pattern.inputs.empty()) {
      throw BackendError("prepared inputs need the dense backend");
    }
    for (std::size_t k = 0; k < pattern.steps.size(); ++k) {
      if (!clifford_quarter_turns(pattern.steps[k].gamma)) {
        throw BackendError("step " + std::to_string(k) + " angle " +
                           std::to_string(pattern.steps[k].gamma) +
                           " rad is not a multiple of pi/2; the graph backend is Clifford-only");
      }
    }
    GraphState gs = build_cluster_graph(lat);
    for (std::size_t k = 0; k < pattern.steps.size(); ++k) {
      const auto& st = pattern.steps[k];
      const double gamma = adapted_angle(st, outcomes);
      const int quarter = *clifford_quarter_turns(gamma);
      // B(0) = X, B(pi/2) = Y, B(pi) = -X, B(3pi/2) = -Y.
      const Pauli p = quarter % 2 == 0 ? Pauli::X : Pauli::Y;
      const PauliMeasurement m = measure_pauli_graph(gs, st.site, p, rng);
      const int outcome = m.outcome ^ (quarter >= 2 ? 1 : 0);
      outcomes.push_back(outcome);
      const double p0 = m.deterministic ? (outcome == 0 ? 1.0 : 0.0) : 0.5;
      run.records.push_back({k, st.site, gamma, outcome, p0});
    }
    run.graph = std::move(gs);
  }
  run.byproducts = evaluate_byproducts(pattern, outcomes);
  return run;
}

namespace detail {

inline Eigen::Vector2cd read_qubit_state(const FieldReader& r, const char* key) {
  const auto& v = r.at(key);
  if (!v.is_array() || v.size() != 2) r.fail(key, "expected two [re, im] amplitude pairs");
  Eigen::Vector2cd out;
  for (int k = 0; k < 2; ++k) {
    const auto& a = v[static_cast<std::size_t>(k)];
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
      r.fail(key, "expected two [re, im] amplitude pairs");
    }
    out(k) = cplx(a[0].get<double>(), a[1].get<double>());
  }
  if (out.norm() == 0.0) r.fail(key, "state must be non-zero");
  return out.normalized();
}

inline std::vector<std::size_t> read_indices(const FieldReader& r, const char* key) {
  std::vector<std::size_t> out;
  if (!r.has(key)) return out;
  for (int v : r.int_list(key)) {
    if (v < 0) r.fail(key, "step indices must be >= 0");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline SiteState read_site_state(const nlohmann::json& j, const std::string& path) {
  const FieldReader r(j, path);
  r.allow({"site", "state"});
  return {r.site("site"), read_qubit_state(r, "state")};
}

}  // namespace detail

inline MeasurementPattern parse_pattern(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("malformed JSON at " + detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1) +
                      ": " + e.what());
  }
  const detail::FieldReader root(doc, "");
  root.allow({"schema", "steps", "byproducts", "inputs", "expected_output"});
  if (root.string("schema") != kPatternSchema) {
    root.fail("schema", std::string("expected \"") + kPatternSchema + "\"");
  }
  MeasurementPattern p;
  const auto& steps = root.at("steps");
  if (!steps.is_array()) root.fail("steps", "expected an array");
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const detail::FieldReader r(steps[k], "steps[" + std::to_string(k) + "]");
    r.allow({"site", "gamma_rad", "adapt"});
    PatternStep st;
    st.site = r.site("site");
    st.gamma = r.number("gamma_rad");
    if (r.has("adapt")) {
      const detail::FieldReader a(r.at("adapt"), r.qualified("adapt"));
      a.allow({"xor_of", "flips_sign"});
      st.adapt.xor_of = detail::read_indices(a, "xor_of");
      if (a.has("flips_sign")) {
        if (!a.at("flips_sign").is_boolean()) a.fail("flips_sign", "expected true or false");
        st.adapt.flips_sign = a.at("flips_sign").get<bool>();
      }
    }
    p.steps.push_back(std::move(st));
  }
  if (root.has("byproducts")) {
    const auto& list = root.at("byproducts");
    if (!list.is_array()) root.fail("byproducts", "expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const detail::FieldReader r(list[k], "byproducts[" + std::to_string(k) + "]");
      r.allow({"site", "x_of", "z_of"});
      p.byproducts.push_back({r.site("site"), detail::read_indices(r, "x_of"),
                              detail::read_indices(r, "z_of")});
    }
  }
  if (root.has("inputs")) {
    const auto& list = root.at("inputs");
    if (!list.is_array()) root.fail("inputs", "expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      p.inputs.push_back(detail::read_site_state(list[k], "inputs[" + std::to_string(k) + "]"));
    }
  }
  if (root.has("expected_output")) {
    p.expected_output = detail::read_site_state(root.at("expected_output"), "expected_output");
  }
  try {
    p.validate();
  } catch (const FormatError& e) {
    throw FormatError(std::string("steps: ") + e.what());
  }
  return p;
}

inline MeasurementPattern load_pattern(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open pattern file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_pattern(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace resq
