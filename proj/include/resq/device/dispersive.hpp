#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "resq/device/lattice.hpp"
#include "resq/errors.hpp"
#include "resq/warnings.hpp"

namespace resq {

// Coupling-to-detuning ratio above which the dispersive formulas are flagged.
inline constexpr double kDispersiveWarnRatio = 0.2;

namespace detail {

struct Detunings {
  double left;   // epsilon - w_left
  double right;  // epsilon - w_right
};

inline Detunings dispersive_detunings(const JunctionSpec& j, const ResonatorSpec& left,
                                      const ResonatorSpec& right) {
  const Detunings d{j.epsilon - left.frequency, j.epsilon - right.frequency};
  if (d.left == 0.0 || d.right == 0.0) {
    throw ResonanceError("mediator (" + to_string(j.left) + ")-(" + to_string(j.right) +
                         ") is resonant with a neighbouring resonator; dispersive formula invalid");
  }
  const double ratio = std::max(std::abs(j.g_left / d.left), std::abs(j.g_right / d.right));
  if (ratio > kDispersiveWarnRatio) {
    warn("junction (" + to_string(j.left) + ")-(" + to_string(j.right) +
         "): g/|detuning| = " + std::to_string(ratio) + " exceeds " +
         std::to_string(kDispersiveWarnRatio) + ", dispersive estimates are unreliable");
  }
  return d;
}

}  // namespace detail

// Mediator transition frequency with n photons on the left, n_prime on the right.
inline double stark_shifted_frequency(const JunctionSpec& j, const ResonatorSpec& left,
                                      const ResonatorSpec& right, int n, int n_prime) {
  const auto d = detail::dispersive_detunings(j, left, right);
  return j.epsilon + j.g_left * j.g_left / d.left * (2.0 * n + 1.0) +
         j.g_right * j.g_right / d.right * (2.0 * n_prime + 1.0);
}

// Closest other line in the {0,1}^2 manifold to the (1,1) line.
inline double selectivity_gap(const JunctionSpec& j, const ResonatorSpec& left,
                              const ResonatorSpec& right) {
  const double target = stark_shifted_frequency(j, left, right, 1, 1);
  double gap = std::abs(target - stark_shifted_frequency(j, left, right, 0, 0));
  gap = std::min(gap, std::abs(target - stark_shifted_frequency(j, left, right, 0, 1)));
  gap = std::min(gap, std::abs(target - stark_shifted_frequency(j, left, right, 1, 0)));
  return gap;
}

// Effective photon hopping rate g^2/|epsilon - w| using the left (w-class) detuning.
inline double hopping_rate(const JunctionSpec& j, const ResonatorSpec& left,
                           const ResonatorSpec& right) {
  const auto d = detail::dispersive_detunings(j, left, right);
  return j.g_left * j.g_left / std::abs(d.left);
}

// Two-sided alternative (g^2/2)(1/|epsilon - w| + 1/|epsilon - w'|), with
// each side using its own coupling.
inline double symmetric_hopping_rate(const JunctionSpec& j, const ResonatorSpec& left,
                                     const ResonatorSpec& right) {
  const auto d = detail::dispersive_detunings(j, left, right);
  return 0.5 * j.g_left * j.g_right * (1.0 / std::abs(d.left) + 1.0 / std::abs(d.right));
}

// Convenience overloads that look the resonators up in the lattice.
inline double stark_shifted_frequency(const LatticeSpec& lat, const JunctionSpec& j, int n,
                                      int n_prime) {
  return stark_shifted_frequency(j, lat.resonator(j.left), lat.resonator(j.right), n, n_prime);
}
inline double selectivity_gap(const LatticeSpec& lat, const JunctionSpec& j) {
  return selectivity_gap(j, lat.resonator(j.left), lat.resonator(j.right));
}
inline double hopping_rate(const LatticeSpec& lat, const JunctionSpec& j) {
  return hopping_rate(j, lat.resonator(j.left), lat.resonator(j.right));
}

}  // namespace resq
