#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "resq/device/lattice.hpp"
#include "resq/errors.hpp"
#include "resq/hilbert/space.hpp"
#include "resq/random.hpp"
#include "resq/units.hpp"

namespace resq {

inline constexpr std::size_t kDenseCapacity = 20;

using Gate2 = Eigen::Matrix2cd;

namespace gates {

inline Gate2 hadamard() {
  Gate2 m;
  m << 1.0, 1.0, 1.0, -1.0;
  return m / std::sqrt(2.0);
}
inline Gate2 pauli_x() {
  Gate2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
inline Gate2 pauli_y() {
  Gate2 m;
  m << 0.0, -kI, kI, 0.0;
  return m;
}
inline Gate2 pauli_z() {
  Gate2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
// P(theta) = diag(1, e^{i theta})
inline Gate2 phase(double theta) {
  Gate2 m;
  m << 1.0, 0.0, 0.0, std::exp(kI * theta);
  return m;
}
inline Gate2 rx(double theta) {
  return std::cos(0.5 * theta) * Gate2::Identity() - kI * std::sin(0.5 * theta) * pauli_x();
}
inline Gate2 rz(double theta) {
  return std::cos(0.5 * theta) * Gate2::Identity() - kI * std::sin(0.5 * theta) * pauli_z();
}

}  // namespace gates

// |+gamma> (outcome 0) or |-gamma> (outcome 1): (|0> +- e^{i gamma}|1>)/sqrt2.
inline Eigen::Vector2cd b_gamma_state(double gamma, int outcome) {
  const double sign = outcome == 0 ? 1.0 : -1.0;
  return Eigen::Vector2cd(1.0, sign * std::exp(kI * gamma)) / std::sqrt(2.0);
}

// Amplitudes of an N-qubit register. Qubit 0 is the most significant bit of
// the amplitude index. Each qubit is labelled with the lattice site it holds.
class DenseRegister {
 public:
  // |+>^N over the given sites.
  static DenseRegister plus_state(std::vector<SiteId> sites) {
    check_capacity(sites.size());
    const std::size_t dim = std::size_t{1} << sites.size();
    Vector amps = Vector::Constant(static_cast<Eigen::Index>(dim),
                                   1.0 / std::sqrt(static_cast<double>(dim)));
    return DenseRegister(std::move(sites), std::move(amps));
  }

  DenseRegister(std::vector<SiteId> sites, Vector amplitudes)
      : sites_(std::move(sites)), amps_(std::move(amplitudes)) {
    check_capacity(sites_.size());
    if (static_cast<std::size_t>(amps_.size()) != (std::size_t{1} << sites_.size())) {
      throw ShapeError("register of " + std::to_string(sites_.size()) + " qubits needs " +
                       std::to_string(std::size_t{1} << sites_.size()) + " amplitudes");
    }
    if (std::abs(amps_.norm() - 1.0) > 1e-9) {
      throw ParameterError("register amplitudes are not normalized");
    }
  }

  std::size_t qubit_count() const { return sites_.size(); }
  const std::vector<SiteId>& sites() const { return sites_; }
  const Vector& amplitudes() const { return amps_; }

  bool has_site(const SiteId& s) const {
    return std::find(sites_.begin(), sites_.end(), s) != sites_.end();
  }

  std::size_t qubit_of(const SiteId& s) const {
    auto it = std::find(sites_.begin(), sites_.end(), s);
    if (it == sites_.end()) {
      throw LatticeError("site (" + to_string(s) + ") is not in the register");
    }
    return static_cast<std::size_t>(it - sites_.begin());
  }

  void apply(std::size_t q, const Gate2& u) {
    const std::size_t mask = bit(q);
    const auto dim = static_cast<std::size_t>(amps_.size());
    for (std::size_t i = 0; i < dim; ++i) {
      if (i & mask) continue;
      const auto i0 = static_cast<Eigen::Index>(i);
      const auto i1 = static_cast<Eigen::Index>(i | mask);
      const cplx a0 = amps_(i0);
      const cplx a1 = amps_(i1);
      amps_(i0) = u(0, 0) * a0 + u(0, 1) * a1;
      amps_(i1) = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }

  void apply_cz(std::size_t a, std::size_t b) {
    if (a == b) throw ParameterError("CZ needs two distinct qubits");
    const std::size_t mask = bit(a) | bit(b);
    for (std::size_t i = 0; i < static_cast<std::size_t>(amps_.size()); ++i) {
      if ((i & mask) == mask) amps_(static_cast<Eigen::Index>(i)) = -amps_(static_cast<Eigen::Index>(i));
    }
  }

  // Replaces qubit q (assumed to be |+>) by an arbitrary normalized state.
  // Only valid before any entangling gate touched q.
  void prepare(std::size_t q, const Eigen::Vector2cd& state) {
    const Eigen::Vector2cd plus(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    // [state, state_perp] [plus, minus]^dagger sends |+> to state.
    Eigen::Matrix2cd target;
    const Eigen::Vector2cd s = state.normalized();
    target.col(0) = s;
    target.col(1) = Eigen::Vector2cd(-std::conj(s(1)), std::conj(s(0)));
    Eigen::Matrix2cd source;
    source.col(0) = plus;
    source.col(1) = Eigen::Vector2cd(1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0));
    apply(q, target * source.adjoint());
  }

  // Probability that projecting qubit q onto `phi` succeeds.
  double probability(std::size_t q, const Eigen::Vector2cd& phi) const {
    return contract(q, phi).squaredNorm();
  }

  // Projects qubit q onto `phi`, removes it and renormalizes. Returns the
  // probability of the projection.
  double project_out(std::size_t q, const Eigen::Vector2cd& phi) {
    Vector rest = contract(q, phi);
    const double p = rest.squaredNorm();
    if (p <= 1e-300) {
      throw ParameterError("projection of qubit " + std::to_string(q) + " has zero probability");
    }
    rest /= std::sqrt(p);
    sites_.erase(sites_.begin() + static_cast<std::ptrdiff_t>(q));
    amps_ = std::move(rest);
    return p;
  }

  // <psi| P |psi> for a Pauli string given as one 2x2 factor per listed qubit.
  double expectation(const std::vector<std::pair<std::size_t, Gate2>>& factors) const {
    DenseRegister copy = *this;
    for (const auto& [q, u] : factors) copy.apply(q, u);
    return std::real(amps_.dot(copy.amps_));
  }

  // Reduced single-qubit state when all other qubits are unentangled with q:
  // the dominant eigenvector of the reduced density matrix.
  Eigen::Vector2cd qubit_state(std::size_t q) const {
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    const std::size_t mask = bit(q);
    for (std::size_t i = 0; i < static_cast<std::size_t>(amps_.size()); ++i) {
      if (i & mask) continue;
      const cplx a0 = amps_(static_cast<Eigen::Index>(i));
      const cplx a1 = amps_(static_cast<Eigen::Index>(i | mask));
      rho(0, 0) += a0 * std::conj(a0);
      rho(0, 1) += a0 * std::conj(a1);
      rho(1, 0) += a1 * std::conj(a0);
      rho(1, 1) += a1 * std::conj(a1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
    return es.eigenvectors().col(1);
  }

 private:
  static void check_capacity(std::size_t n) {
    if (n > kDenseCapacity) {
      throw CapacityError(std::to_string(n) + " qubits exceed the dense capacity of " +
                          std::to_string(kDenseCapacity) + "; use the graph backend");
    }
  }

  std::size_t bit(std::size_t q) const {
    if (q >= sites_.size()) {
      throw ParameterError("qubit index " + std::to_string(q) + " out of range");
    }
    return std::size_t{1} << (sites_.size() - 1 - q);
  }

  // sum_b conj(phi_b) * psi restricted to qubit q = b.
  Vector contract(std::size_t q, const Eigen::Vector2cd& phi) const {
    const std::size_t n = sites_.size();
    const std::size_t mask = bit(q);
    const std::size_t low = mask - 1;
    Vector out(static_cast<Eigen::Index>(std::size_t{1} << (n - 1)));
    for (std::size_t r = 0; r < static_cast<std::size_t>(out.size()); ++r) {
      const std::size_t i0 = ((r & ~low) << 1) | (r & low);
      out(static_cast<Eigen::Index>(r)) =
          std::conj(phi(0)) * amps_(static_cast<Eigen::Index>(i0)) +
          std::conj(phi(1)) * amps_(static_cast<Eigen::Index>(i0 | mask));
    }
    return out;
  }

  std::vector<SiteId> sites_;
  Vector amps_;
};

// |<a|b>|^2 for registers over the same site order.
inline double fidelity(const DenseRegister& a, const DenseRegister& b) {
  if (a.sites() != b.sites()) throw ShapeError("registers hold different sites");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

struct BGammaResult {
  int outcome = 0;
  double p0 = 0.0;  // Born probability of outcome 0
};

// Same, with the outcome forced; returns its probability (error if zero).
inline double project_b_gamma(DenseRegister& reg, const SiteId& site, double gamma, int outcome) {
  return reg.project_out(reg.qubit_of(site), b_gamma_state(gamma, outcome));
}

// Samples a B(gamma) measurement of `site`, removes the qubit and
// renormalizes the rest in place.
inline BGammaResult measure_b_gamma(DenseRegister& reg, const SiteId& site, double gamma,
                                    std::mt19937_64& rng) {
  const std::size_t q = reg.qubit_of(site);
  const double p0 = std::clamp(reg.probability(q, b_gamma_state(gamma, 0)), 0.0, 1.0);
  const int outcome = uniform01(rng) < p0 ? 0 : 1;
  reg.project_out(q, b_gamma_state(gamma, outcome));
  return {outcome, p0};
}

}  // namespace resq
