#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "resq/device/dispersive.hpp"
#include "resq/device/lattice.hpp"
#include "resq/errors.hpp"
#include "resq/hilbert/evolve.hpp"
#include "resq/units.hpp"
#include "resq/warnings.hpp"

namespace resq {

inline constexpr int kDefaultFockCutoff = 3;

// Omega below gap / kSelectivityFactor counts as "much smaller".
inline constexpr double kSelectivityFactor = 10.0;

// Drive Omega (e^{i phase} sigma+ e^{-i w_d t} + h.c.) on a mediator qubit.
struct PulseSpec {
  double drive_frequency = 0.0;  // w_d, rad/s
  double rabi_strength = 0.0;    // Omega, rad/s
  double duration = 0.0;         // s
  double phase = 0.0;            // rad

  void validate() const {
    if (!(duration > 0.0)) throw ParameterError("pulse duration must be positive");
    if (!(rabi_strength >= 0.0)) throw ParameterError("Rabi strength must be >= 0");
  }
};

// Amplitude-damping lifetimes; infinity disables a channel.
struct DecoherenceSpec {
  double qubit_T1 = std::numeric_limits<double>::infinity();
  double photon_T1 = std::numeric_limits<double>::infinity();
  double dephasing_rate = 0.0;  // optional pure dephasing 1/T_phi of the qubit, 1/s

  void validate() const {
    if (!(qubit_T1 > 0.0) || !(photon_T1 > 0.0)) {
      throw ParameterError("T1 times must be positive or infinite");
    }
    if (!(dephasing_rate >= 0.0)) throw ParameterError("dephasing rate must be >= 0");
  }
};

// Lifetimes of one junction: its own tau_cha and the shorter neighbouring tau_pho.
inline DecoherenceSpec junction_decoherence(const JunctionSpec& j, const ResonatorSpec& left,
                                            const ResonatorSpec& right) {
  return {j.coherence_time, std::min(left.photon_lifetime, right.photon_lifetime), 0.0};
}

// Factor order of every junction space.
enum JunctionFactor : std::size_t { kLeftMode = 0, kMediator = 1, kRightMode = 2 };

inline TensorSpace junction_space(int n_max) {
  if (n_max < 1) throw DimensionError("Fock cutoff n_max must be >= 1");
  const auto d = static_cast<std::size_t>(n_max + 1);
  return TensorSpace({d, 2, d});
}

// Resonator-mediator-resonator Hamiltonian in the lab frame:
//   w_l a+a + w_r b+b + eps |e><e| + g_l (a+ s- + a s+) + g_r (b+ s- + b s+)
// plus the pulse drive when given.
inline Hamiltonian junction_hamiltonian(const JunctionSpec& j, const ResonatorSpec& left,
                                        const ResonatorSpec& right,
                                        const std::optional<PulseSpec>& pulse = std::nullopt,
                                        int n_max = kDefaultFockCutoff) {
  const TensorSpace space = junction_space(n_max);
  const Operator a = embed(annihilation(n_max), kLeftMode, space);
  const Operator b = embed(annihilation(n_max), kRightMode, space);
  const Operator sm = embed(qubit::lowering(), kMediator, space);
  const Operator sp = sm.adjoint();
  const Operator ad = a.adjoint();
  const Operator bd = b.adjoint();

  Operator h = left.frequency * (ad * a) + right.frequency * (bd * b) + j.epsilon * (sp * sm) +
               j.g_left * (ad * sm + a * sp) + j.g_right * (bd * sm + b * sp);
  Hamiltonian out(Operator(space, h.matrix(), true));
  if (pulse) {
    pulse->validate();
    if (pulse->rabi_strength > 0.0) {
      out.add_drive(sp, pulse->rabi_strength * std::exp(kI * pulse->phase), pulse->drive_frequency);
    }
  }
  return out;
}

inline constexpr double kDefaultRabiStrength = 4.0 * units::MHz;

// Drive at eps(1;1) for duration pi/Omega.
inline PulseSpec optimal_cz_pulse(const JunctionSpec& j, const ResonatorSpec& left,
                                  const ResonatorSpec& right,
                                  double omega = kDefaultRabiStrength) {
  if (!(omega > 0.0)) throw ParameterError("Rabi strength must be positive");
  const double gap = selectivity_gap(j, left, right);
  if (omega >= gap) {
    throw SelectivityError("Rabi strength " + std::to_string(omega / units::MHz) +
                           " MHz x 2pi is not below the selectivity gap " +
                           std::to_string(gap / units::MHz) + " MHz x 2pi");
  }
  if (omega > gap / kSelectivityFactor) {
    const double clamped = gap / kSelectivityFactor;
    warn("Rabi strength " + std::to_string(omega / units::MHz) + " MHz x 2pi clamped to " +
         std::to_string(clamped / units::MHz) + " MHz x 2pi (gap / " +
         std::to_string(kSelectivityFactor) + ")");
    omega = clamped;
  }
  PulseSpec p;
  p.drive_frequency = stark_shifted_frequency(j, left, right, 1, 1);
  p.rabi_strength = omega;
  p.duration = units::pi / omega;
  return p;
}

}  // namespace resq
