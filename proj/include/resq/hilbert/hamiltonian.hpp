#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "resq/hilbert/space.hpp"

namespace resq {

// One harmonic contribution amplitude * exp(-i * angular_frequency * t) * op.
struct HarmonicTerm {
  Operator op;
  cplx amplitude;
  double angular_frequency;
};

// H(t) = static_part + sum_k amplitude_k exp(-i w_k t) op_k.
//
// Every drive the simulator needs is a sum of such harmonics, which lets the
// integrators know all oscillation frequencies up front. Hermiticity of H(t)
// is the caller's job (add terms in conjugate pairs, see add_drive).
class Hamiltonian {
 public:
  explicit Hamiltonian(Operator static_part) : static_(std::move(static_part)) {}

  Hamiltonian& add_term(Operator op, cplx amplitude, double angular_frequency) {
    detail::require_same_space(static_.space(), op.space(), "Hamiltonian::add_term");
    terms_.push_back({std::move(op), amplitude, angular_frequency});
    return *this;
  }

  // amplitude e^{-iwt} op + conj(amplitude) e^{+iwt} op^dagger
  Hamiltonian& add_drive(const Operator& op, cplx amplitude, double angular_frequency) {
    add_term(op, amplitude, angular_frequency);
    add_term(op.adjoint(), std::conj(amplitude), -angular_frequency);
    return *this;
  }

  const TensorSpace& space() const { return static_.space(); }
  const Operator& static_part() const { return static_; }
  const std::vector<HarmonicTerm>& terms() const { return terms_; }
  bool is_static() const { return terms_.empty(); }

  Matrix at(double t) const {
    Matrix h = static_.matrix();
    for (const auto& term : terms_) {
      h += term.amplitude * std::exp(-kI * term.angular_frequency * t) * term.op.matrix();
    }
    return h;
  }

  Operator operator()(double t) const { return Operator(space(), at(t)); }

  // Upper bound on |eigenvalue| of H(t) over all t (max row-sum norm).
  double spectral_bound() const {
    double bound = row_sum_norm(static_.matrix());
    for (const auto& term : terms_) {
      bound += std::abs(term.amplitude) * row_sum_norm(term.op.matrix());
    }
    return bound;
  }

  // Largest angular frequency the lab-frame integrator has to resolve.
  double lab_frequency_scale() const {
    double scale = spectral_bound();
    for (const auto& term : terms_) {
      scale = std::max(scale, std::abs(term.angular_frequency));
    }
    return scale;
  }

  // Largest angular frequency left after moving into the interaction picture
  // of diag(static_part): the fastest matrix-element oscillation
  // |E_j - E_k - w| among non-zero couplings, or the coupling strength itself.
  double interaction_frequency_scale() const {
    const Matrix& h0 = static_.matrix();
    const Eigen::Index n = h0.rows();
    Matrix off = h0;
    off.diagonal().setZero();
    double scale = row_sum_norm(off);
    for (const auto& term : terms_) {
      scale += std::abs(term.amplitude) * row_sum_norm(term.op.matrix());
    }
    auto scan = [&](const Matrix& m, double w) {
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
          if (j != k || w != 0.0) {
            if (std::abs(m(j, k)) > 0.0) {
              const double osc = std::abs(h0(j, j).real() - h0(k, k).real() - w);
              scale = std::max(scale, osc);
            }
          }
        }
      }
    };
    scan(off, 0.0);
    for (const auto& term : terms_) {
      scan(term.op.matrix(), term.angular_frequency);
    }
    return scale;
  }

 private:
  static double row_sum_norm(const Matrix& m) {
    return m.rows() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
  }

  Operator static_;
  std::vector<HarmonicTerm> terms_;
};

enum class Frame {
  lab,          // integrate i d/dt psi = H(t) psi directly
  interaction,  // integrate in the interaction picture of diag(static part)
};

// Default RK4 step: 1/(200 f_max), f_max the largest frequency the chosen
// frame must resolve. Returns +infinity for a vanishing Hamiltonian.
inline double default_time_step(const Hamiltonian& h, Frame frame, double extra_rate = 0.0) {
  double scale = frame == Frame::lab ? h.lab_frequency_scale() : h.interaction_frequency_scale();
  scale = std::max(scale, extra_rate);
  if (scale == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  const double f_max = scale / (2.0 * std::numbers::pi);
  return 1.0 / (200.0 * f_max);
}

}  // namespace resq
