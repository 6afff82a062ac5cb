#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>

#include "resq/device/lattice.hpp"
#include "resq/hilbert/evolve.hpp"
#include "resq/pulse/cz.hpp"
#include "resq/random.hpp"

namespace resq {

enum class Axis { x, y, z };

// R_axis(theta) = exp(-i theta sigma_axis / 2) on the (g, e) basis.
inline Operator qubit_rotation(Axis axis, double angle) {
  const Matrix s = (axis == Axis::x   ? qubit::sigma_x()
                     : axis == Axis::y ? qubit::sigma_y()
                                       : qubit::sigma_z())
                        .matrix();
  const Matrix m =
      std::cos(0.5 * angle) * Matrix::Identity(2, 2) - kI * std::sin(0.5 * angle) * s;
  return Operator(qubit::space(), m);
}

// Maps (|g> + e^{i gamma}|e>)/sqrt2 to |g> and (|g> - e^{i gamma}|e>)/sqrt2 to |e>.
inline Operator u_gamma(double gamma) {
  return qubit_rotation(Axis::x, 0.5 * units::pi) *
         qubit_rotation(Axis::z, 0.5 * units::pi - gamma);
}

// Factor order of the site space: inner qubit, then the resonator mode.
enum SiteFactor : std::size_t { kInnerQubit = 0, kSiteMode = 1 };

inline TensorSpace site_space(int n_max) {
  if (n_max < 1) throw DimensionError("Fock cutoff n_max must be >= 1");
  return TensorSpace({2, static_cast<std::size_t>(n_max + 1)});
}

// Resonant exchange g (a+ s- + a s+) in the frame rotating with the mode.
inline Hamiltonian resonant_site_hamiltonian(const InnerQubitSpec& q, int n_max) {
  const TensorSpace space = site_space(n_max);
  const Operator a = embed(annihilation(n_max), kSiteMode, space);
  const Operator sm = embed(qubit::lowering(), kInnerQubit, space);
  const Operator h = q.coupling * (a.adjoint() * sm + a * sm.adjoint());
  return Hamiltonian(Operator(space, h.matrix(), true));
}

inline std::vector<CollapseChannel> site_channels(const TensorSpace& space, int n_max,
                                                  const DecoherenceSpec& dec) {
  dec.validate();
  std::vector<CollapseChannel> out;
  if (std::isfinite(dec.qubit_T1)) {
    out.push_back({embed(qubit::lowering(), kInnerQubit, space), 1.0 / dec.qubit_T1});
  }
  if (std::isfinite(dec.photon_T1)) {
    out.push_back({embed(annihilation(n_max), kSiteMode, space), 1.0 / dec.photon_T1});
  }
  if (dec.dephasing_rate > 0.0) {
    out.push_back({embed(qubit::sigma_z(), kInnerQubit, space), 0.5 * dec.dephasing_rate});
  }
  return out;
}

struct SiteEvolution {
  std::optional<StateVector> pure;  // set for closed-system runs
  DensityMatrix state;
  double fidelity = 0.0;  // to the stage's ideal target
};

struct InitializationOptions {
  // Duration of the resonant exchange; <= 0 means 3 pi / (2 g_i).
  double swap_duration = 0.0;
  // Finite pi/2 pulse instead of an instantaneous rotation. The qubit is
  // parked at inner epsilon_max while driven at its own frequency.
  bool finite_pulse = false;
  double drive_strength = 100.0 * units::MHz;  // Omega of the finite pulse
  SimulationOptions integration;
};

namespace detail {

inline SiteEvolution run_site(const Hamiltonian& h, const StateVector& psi0, double duration,
                              const std::optional<DecoherenceSpec>& dec, int n_max,
                              const SimulationOptions& opt) {
  if (!dec) {
    StateVector psi = evolve(h, psi0, duration, opt.dt, opt.frame);
    DensityMatrix rho = DensityMatrix::pure(psi.normalized());
    return {std::move(psi), std::move(rho), 0.0};
  }
  const auto channels = site_channels(h.space(), n_max, *dec);
  DensityMatrix rho =
      evolve_lindblad(h, DensityMatrix::pure(psi0), channels, duration, opt.dt, opt.frame);
  return {std::nullopt, std::move(rho), 0.0};
}

// The finite pi/2 pulse: qubit detuned by delta from the mode, driven
// resonantly with Omega sigma_x in the qubit frame. In that frame the
// exchange term a+ s- oscillates as exp(-i delta t).
inline Hamiltonian finite_pulse_hamiltonian(const InnerQubitSpec& q, const ResonatorSpec& res,
                                            double omega, int n_max) {
  const TensorSpace space = site_space(n_max);
  const Operator a = embed(annihilation(n_max), kSiteMode, space);
  const Operator sm = embed(qubit::lowering(), kInnerQubit, space);
  const double delta = q.epsilon_max - res.frequency;
  Hamiltonian h(Operator(space, (omega * embed(qubit::sigma_x(), kInnerQubit, space)).matrix(), true));
  h.add_drive(a.adjoint() * sm, q.coupling, delta);
  return h;
}

}  // namespace detail

// Prepares (|0> + |1>)/sqrt2 in the resonator: pi/2 pulse on the inner qubit,
// then a resonant exchange of 3 pi / (2 g_i). Fidelity is to |g>(|0>+|1>)/sqrt2.
inline SiteEvolution simulate_initialization(const InnerQubitSpec& q, const ResonatorSpec& res,
                                             int n_max = kDefaultFockCutoff,
                                             const std::optional<DecoherenceSpec>& dec = std::nullopt,
                                             const InitializationOptions& opt = {}) {
  const TensorSpace space = site_space(n_max);
  const StateVector ground = StateVector::basis(space, {0, 0});
  const double swap = opt.swap_duration > 0.0 ? opt.swap_duration : 1.5 * units::pi / q.coupling;

  // Stage one: pi/2 rotation of the inner qubit.
  std::optional<StateVector> psi1;
  std::optional<DensityMatrix> rho1;
  if (opt.finite_pulse) {
    // exp(-i Omega t sigma_x) = R_x(pi/2) at t = pi / (4 Omega)
    const Hamiltonian hp = detail::finite_pulse_hamiltonian(q, res, opt.drive_strength, n_max);
    SiteEvolution s1 = detail::run_site(hp, ground, 0.25 * units::pi / opt.drive_strength, dec,
                                        n_max, opt.integration);
    psi1 = std::move(s1.pure);
    rho1 = std::move(s1.state);
  } else {
    psi1 = ground.apply(embed(qubit_rotation(Axis::x, 0.5 * units::pi), kInnerQubit, space));
    rho1 = DensityMatrix::pure(*psi1);
  }

  // Stage two: resonant exchange with the mode.
  const Hamiltonian h = resonant_site_hamiltonian(q, n_max);
  SiteEvolution out = [&]() -> SiteEvolution {
    if (!dec) {
      StateVector psi = evolve(h, *psi1, swap, opt.integration.dt, opt.integration.frame);
      DensityMatrix rho = DensityMatrix::pure(psi.normalized());
      return {std::move(psi), std::move(rho), 0.0};
    }
    const auto channels = site_channels(space, n_max, *dec);
    return {std::nullopt,
            evolve_lindblad(h, *rho1, channels, swap, opt.integration.dt, opt.integration.frame),
            0.0};
  }();
  StateVector target(space, (StateVector::basis(space, {0, 0}).amplitudes() +
                             StateVector::basis(space, {0, 1}).amplitudes()) /
                                std::sqrt(2.0));
  out.fidelity = out.pure ? fidelity(*out.pure, target) : out.state.overlap(target);
  return out;
}

// Swaps the photonic qubit alpha|0> + beta|1> onto the inner qubit:
// resonant exchange for pi / (2 g_i). Fidelity is to (alpha|g> - i beta|e>)|0>.
inline SiteEvolution simulate_transfer(const InnerQubitSpec& q, const ResonatorSpec& res,
                                       cplx alpha, cplx beta, int n_max = kDefaultFockCutoff,
                                       const std::optional<DecoherenceSpec>& dec = std::nullopt,
                                       const SimulationOptions& opt = {}) {
  (void)res;  // the exchange runs in the mode's rotating frame
  const TensorSpace space = site_space(n_max);
  Vector v = alpha * StateVector::basis(space, {0, 0}).amplitudes() +
             beta * StateVector::basis(space, {0, 1}).amplitudes();
  StateVector psi0 = StateVector(space, std::move(v)).normalized();
  const Hamiltonian h = resonant_site_hamiltonian(q, n_max);
  SiteEvolution out = detail::run_site(h, psi0, 0.5 * units::pi / q.coupling, dec, n_max, opt);

  const double norm = std::sqrt(std::norm(alpha) + std::norm(beta));
  StateVector target(space, (alpha * StateVector::basis(space, {0, 0}).amplitudes() -
                             kI * beta * StateVector::basis(space, {1, 0}).amplitudes()) /
                                norm);
  out.fidelity = out.pure ? fidelity(*out.pure, target) : out.state.overlap(target);
  return out;
}

struct MeasurementRecord {
  int outcome = 0;        // 0: |+gamma>, 1: |-gamma>
  double p0 = 0.0;        // Born probability of outcome 0
  StateVector post_state;  // site state after the projective readout
};

// B(gamma) readout of a photonic qubit alpha|0> + beta|1>: transfer to the
// inner qubit, R_z(pi/2), U_gamma, then an ideal projective {g, e} measurement.
inline MeasurementRecord full_measurement_sequence(const InnerQubitSpec& q,
                                                   const ResonatorSpec& res, double gamma,
                                                   cplx alpha, cplx beta, std::mt19937_64& rng,
                                                   int n_max = kDefaultFockCutoff,
                                                   const SimulationOptions& opt = {}) {
  const TensorSpace space = site_space(n_max);
  SiteEvolution moved = simulate_transfer(q, res, alpha, beta, n_max, std::nullopt, opt);
  const Operator local = embed(u_gamma(gamma) * qubit_rotation(Axis::z, 0.5 * units::pi),
                               kInnerQubit, space);
  const StateVector psi = moved.pure->apply(local);

  const Operator pe = embed(qubit::excited_projector(), kInnerQubit, space);
  const StateVector excited = psi.apply(pe);
  const double p1 = std::clamp(excited.squared_norm() / psi.squared_norm(), 0.0, 1.0);
  const double p0 = 1.0 - p1;
  const int outcome = uniform01(rng) < p0 ? 0 : 1;
  Vector post = outcome == 1 ? excited.amplitudes() : Vector(psi.amplitudes() - excited.amplitudes());
  return {outcome, p0, StateVector(space, std::move(post)).normalized()};
}

}  // namespace resq
