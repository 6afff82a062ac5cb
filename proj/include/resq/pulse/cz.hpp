#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "resq/pulse/junction.hpp"

namespace resq {

// Integration controls shared by the pulse simulations. dt <= 0 picks the
// default step for the chosen frame.
struct SimulationOptions {
  double dt = 0.0;
  Frame frame = Frame::interaction;
};

struct GateResult {
  double conditional_phase = 0.0;  // rad, wrapped to [-pi/2, 3pi/2)
  // Phases (theta_L, theta_R) picked up by |1 0> and |0 1> relative to |0 0>.
  // The local-Z correction is exp(-i theta_L n_L) exp(-i theta_R n_R).
  std::array<double, 2> single_qubit_phases{0.0, 0.0};
  double leakage = 0.0;
  double avg_gate_fidelity = 0.0;
  // Evolved |n g n'> for (n, n') = 00, 01, 10, 11; empty for open-system runs.
  std::vector<StateVector> final_states;
  // <ref_j| E(|j><k|) |ref_k>, ref_j the undriven evolution of basis state j.
  Eigen::Matrix4cd coherences = Eigen::Matrix4cd::Zero();
  PulseSpec pulse;
  int n_max = kDefaultFockCutoff;
  bool open_system = false;
};

// Wraps into [-pi/2, 3pi/2) so that a CZ phase near pi never straddles the cut.
inline double wrap_conditional_phase(double phi) {
  double x = std::fmod(phi + 0.5 * units::pi, units::two_pi);
  if (x < 0.0) x += units::two_pi;
  return x - 0.5 * units::pi;
}

// Basis index of |n, g, n'> in the junction space.
inline std::size_t junction_index(const TensorSpace& space, std::size_t n, std::size_t n_prime) {
  return space.index_of({n, 0, n_prime});
}

inline std::vector<CollapseChannel> junction_channels(const TensorSpace& space, int n_max,
                                                      const DecoherenceSpec& dec) {
  dec.validate();
  std::vector<CollapseChannel> out;
  if (std::isfinite(dec.qubit_T1)) {
    out.push_back({embed(qubit::lowering(), kMediator, space), 1.0 / dec.qubit_T1});
  }
  if (std::isfinite(dec.photon_T1)) {
    out.push_back({embed(annihilation(n_max), kLeftMode, space), 1.0 / dec.photon_T1});
    out.push_back({embed(annihilation(n_max), kRightMode, space), 1.0 / dec.photon_T1});
  }
  if (dec.dephasing_rate > 0.0) {
    // sqrt(rate/2) sigma_z dephases coherences at exactly `rate`.
    out.push_back({embed(qubit::sigma_z(), kMediator, space), 0.5 * dec.dephasing_rate});
  }
  return out;
}

namespace detail {

// Phases, leakage and average fidelity from the coherence matrix G and the
// in-manifold populations P_j = sum_i <ref_i|E(|j><j|)|ref_i>.
inline void finish_gate(GateResult& r, const Eigen::Matrix4cd& g, const Eigen::Vector4d& p) {
  r.coherences = g;
  const double theta_r = std::arg(g(1, 0));
  const double theta_l = std::arg(g(2, 0));
  r.single_qubit_phases = {theta_l, theta_r};
  r.conditional_phase = wrap_conditional_phase(std::arg(g(3, 0)) - theta_l - theta_r);

  double kept = 0.0;
  for (int k = 0; k < 4; ++k) kept += g(k, k).real();
  r.leakage = std::clamp(1.0 - kept / 4.0, 0.0, 1.0);

  // Target CZ composed with the reported local-Z phases.
  Eigen::Vector4cd t;
  t << 1.0, std::exp(kI * theta_r), std::exp(kI * theta_l), -std::exp(kI * (theta_l + theta_r));
  const cplx overlap = t.adjoint() * g * t;
  r.avg_gate_fidelity = std::clamp((overlap.real() + p.sum()) / 20.0, 0.0, 1.0);

  if (r.leakage > 0.5) {
    throw GateDiagnosticError("leakage " + std::to_string(r.leakage) +
                              " out of the computational manifold; the pulse is far off "
                              "resonance or the junction is not dispersive");
  }
}

}  // namespace detail

// Conditional-phase gate of one junction. Each of |n g n'>, n, n' in {0,1},
// is evolved under the driven Hamiltonian and compared with its undriven
// evolution, which removes the dispersive phases the gate does not create.
// With `decoherence` the channel is the exact Lindblad exponential in the
// frame rotating with the drive.
inline GateResult simulate_cz(const JunctionSpec& j, const ResonatorSpec& left,
                              const ResonatorSpec& right, const PulseSpec& pulse,
                              int n_max = kDefaultFockCutoff,
                              const std::optional<DecoherenceSpec>& decoherence = std::nullopt,
                              const SimulationOptions& options = {}) {
  pulse.validate();
  const Hamiltonian h = junction_hamiltonian(j, left, right, pulse, n_max);
  const TensorSpace& space = h.space();
  const auto dim = static_cast<Eigen::Index>(space.total_dim());

  std::array<Eigen::Index, 4> idx{};
  Matrix basis = Matrix::Zero(dim, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    idx[k] = static_cast<Eigen::Index>(junction_index(space, k / 2, k % 2));
    basis(idx[k], static_cast<Eigen::Index>(k)) = 1.0;
  }
  const Matrix u0 = static_propagator(h.static_part(), pulse.duration);
  const Matrix refs = u0 * basis;

  GateResult r;
  r.pulse = pulse;
  r.n_max = n_max;
  Eigen::Matrix4cd g;
  Eigen::Vector4d p;

  if (!decoherence) {
    const Matrix out = evolve_columns(h, basis, pulse.duration, options.dt, options.frame);
    for (Eigen::Index k = 0; k < 4; ++k) {
      r.final_states.emplace_back(space, out.col(k));
    }
    const Eigen::Matrix4cd m = refs.adjoint() * out;  // m(i,k) = <ref_i|U|k>
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) g(a, b) = m(a, a) * std::conj(m(b, b));
      p(a) = m.col(a).squaredNorm();
    }
  } else {
    r.open_system = true;
    const auto channels = junction_channels(space, n_max, *decoherence);
    const Operator number =
        embed(annihilation(n_max), kLeftMode, space).adjoint() * embed(annihilation(n_max), kLeftMode, space) +
        embed(annihilation(n_max), kRightMode, space).adjoint() * embed(annihilation(n_max), kRightMode, space) +
        embed(qubit::excited_projector(), kMediator, space);
    const Matrix channel =
        lindblad_channel_rotating(h, number, pulse.drive_frequency, channels, pulse.duration);
    auto evolved = [&](int a, int b) {
      const Matrix out = channel.col(idx[std::size_t(b)] * dim + idx[std::size_t(a)]);
      return Matrix(Eigen::Map<const Matrix>(out.data(), dim, dim));
    };
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) g(a, b) = refs.col(a).dot(evolved(a, b) * refs.col(b));
      const Matrix ea = evolved(a, a);
      double kept = 0.0;
      for (int i = 0; i < 4; ++i) kept += refs.col(i).dot(ea * refs.col(i)).real();
      p(a) = kept;
    }
  }
  detail::finish_gate(r, g, p);
  return r;
}

enum class HoppingStart { left, right };

struct HoppingResult {
  double max_transfer = 0.0;  // peak probability of finding the photon on the other side
  double time_of_max = 0.0;   // s
};

// Undriven junction with one photon in one resonator and the mediator in |g>.
// Samples after every integration step.
inline HoppingResult simulate_hopping(const JunctionSpec& j, const ResonatorSpec& left,
                                      const ResonatorSpec& right, HoppingStart start,
                                      double duration, int n_max = kDefaultFockCutoff,
                                      const SimulationOptions& options = {}) {
  const Hamiltonian h = junction_hamiltonian(j, left, right, std::nullopt, n_max);
  const TensorSpace& space = h.space();
  const bool from_left = start == HoppingStart::left;
  const StateVector psi0 = StateVector::basis(space, from_left ? std::initializer_list<std::size_t>{1, 0, 0}
                                                               : std::initializer_list<std::size_t>{0, 0, 1});
  // Basis states with at least one photon on the far side.
  std::vector<Eigen::Index> far;
  for (std::size_t k = 0; k < space.total_dim(); ++k) {
    const auto labels = space.labels_of(k);
    if (labels[from_left ? kRightMode : kLeftMode] >= 1) far.push_back(static_cast<Eigen::Index>(k));
  }
  HoppingResult result;
  auto observer = [&](double t, const Matrix& y) {
    double p = 0.0;
    for (auto k : far) p += std::norm(y(k, 0));
    if (p > result.max_transfer) {
      result.max_transfer = p;
      result.time_of_max = t;
    }
  };
  evolve_columns(h, psi0.amplitudes(), duration, options.dt, options.frame, observer);
  return result;
}

}  // namespace resq
