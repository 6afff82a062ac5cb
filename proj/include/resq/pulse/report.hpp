#pragma once

#include <nlohmann/json.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "resq/format.hpp"
#include "resq/pulse/cz.hpp"

namespace resq {

inline nlohmann::json pulse_json(const PulseSpec& p) {
  return {{"wd_GHz", p.drive_frequency / units::GHz},
          {"omega_MHz", p.rabi_strength / units::MHz},
          {"duration_ns", p.duration / units::ns},
          {"phase_rad", p.phase}};
}

inline nlohmann::json gate_json(const GateResult& r) {
  return {{"conditional_phase_rad", r.conditional_phase},
          {"conditional_phase_over_pi", r.conditional_phase / units::pi},
          {"single_qubit_phases_rad", {r.single_qubit_phases[0], r.single_qubit_phases[1]}},
          {"leakage", r.leakage},
          {"fidelity", r.avg_gate_fidelity},
          {"n_max", r.n_max},
          {"open_system", r.open_system},
          {"pulse", pulse_json(r.pulse)}};
}

struct SweepRow {
  double param = 0.0;
  double conditional_phase = 0.0;
  double leakage = 0.0;
  double fidelity = 0.0;
  double duration = 0.0;  // s
};

inline constexpr const char* kSweepHeader =
    "param,conditional_phase_rad,leakage,fidelity,duration_ns";

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << fmt9(r.param) << ',' << fmt9(r.conditional_phase) << ',' << fmt9(r.leakage) << ','
       << fmt9(r.fidelity) << ',' << fmt9(r.duration / units::ns) << '\n';
  }
  return os.str();
}

}  // namespace resq
