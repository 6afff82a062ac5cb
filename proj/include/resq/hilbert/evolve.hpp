#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "resq/hilbert/hamiltonian.hpp"

namespace resq {

// Norm (unitary) or trace (Lindblad) drift above this aborts the run.
inline constexpr double kMaxNormDrift = 1e-6;

// Called after every RK4 step with the elapsed time and the lab-frame columns.
using StepObserver = std::function<void(double t, const Matrix& columns)>;

struct CollapseChannel {
  Operator op;
  double rate;  // 1/s; the jump operator is sqrt(rate) * op
};

namespace detail {

using SparseMatrix = Eigen::SparseMatrix<cplx>;

inline SparseMatrix to_sparse(const Matrix& m) { return m.sparseView(); }

// Right-hand side machinery shared by the Schroedinger and Lindblad solvers.
// In the interaction frame the diagonal of the static part is removed from
// the generator and reinstated through the phase vector exp(-i E t).
class Generator {
 public:
  Generator(const Hamiltonian& h, Frame frame) : frame_(frame) {
    Matrix s = h.static_part().matrix();
    if (frame_ == Frame::interaction) {
      energies_ = s.diagonal().real();
      s.diagonal().setZero();
    }
    static_ = to_sparse(s);
    for (const auto& term : h.terms()) {
      ops_.push_back(to_sparse(term.op.matrix()));
      amplitudes_.push_back(term.amplitude);
      frequencies_.push_back(term.angular_frequency);
    }
  }

  bool interaction() const { return frame_ == Frame::interaction; }

  // exp(-i E t); lab-frame amplitudes are phases .* interaction amplitudes.
  Vector phases(double t) const {
    Vector p(energies_.size());
    for (Eigen::Index j = 0; j < energies_.size(); ++j) {
      p(j) = std::exp(-kI * energies_(j) * t);
    }
    return p;
  }

  // G(t) * y, G the lab Hamiltonian (minus its diagonal in the interaction frame).
  Matrix left(double t, const Matrix& y) const {
    Matrix out = static_ * y;
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      out.noalias() += coefficient(k, t) * (ops_[k] * y);
    }
    return out;
  }

  // y * G(t)
  Matrix right(double t, const Matrix& y) const {
    Matrix out = y * static_;
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      out.noalias() += coefficient(k, t) * (y * ops_[k]);
    }
    return out;
  }

 private:
  cplx coefficient(std::size_t k, double t) const {
    return amplitudes_[k] * std::exp(-kI * frequencies_[k] * t);
  }

  Frame frame_;
  Eigen::VectorXd energies_;
  SparseMatrix static_;
  std::vector<SparseMatrix> ops_;
  std::vector<cplx> amplitudes_;
  std::vector<double> frequencies_;
};

inline std::size_t step_count(double duration, double& dt) {
  if (!(duration > 0.0)) {
    throw ParameterError("duration must be positive");
  }
  if (!(dt > 0.0)) {
    throw ParameterError("time step must be positive");
  }
  if (dt > duration * (1.0 + 1e-12)) {
    throw ParameterError("time step exceeds duration");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
  const std::size_t n = steps == 0 ? 1 : steps;
  dt = duration / static_cast<double>(n);
  return n;
}

inline double resolve_step(double requested, double automatic, double duration) {
  if (requested > 0.0) {
    return requested;
  }
  if (requested < 0.0) {
    throw ParameterError("time step must be positive");
  }
  return std::min(automatic, duration);
}

inline void require_hermitian_hamiltonian(const Hamiltonian& h, double duration) {
  const double scale = std::max(1.0, h.spectral_bound());
  for (double t : {0.0, 0.5 * duration, duration}) {
    if (detail::hermiticity_defect(h.at(t)) > 1e-12 * scale) {
      throw ParameterError("Hamiltonian is not Hermitian at t = " + std::to_string(t));
    }
  }
}

template <class Rhs, class AfterStep>
Matrix rk4(const Rhs& f, Matrix y, double dt, std::size_t steps, const AfterStep& after_step) {
  double t = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    const Matrix k1 = f(t, y);
    const Matrix k2 = f(t + 0.5 * dt, y + (0.5 * dt) * k1);
    const Matrix k3 = f(t + 0.5 * dt, y + (0.5 * dt) * k2);
    const Matrix k4 = f(t + dt, y + dt * k3);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = static_cast<double>(n + 1) * dt;
    after_step(t, y);
  }
  return y;
}

}  // namespace detail

// Propagates each column of `columns` under i d/dt psi = H(t) psi for `duration`
// with fixed-step RK4. dt <= 0 selects default_time_step(h, frame). Columns
// are returned in the lab frame and are not renormalized; a squared-norm
// change above kMaxNormDrift throws StepSizeError.
inline Matrix evolve_columns(const Hamiltonian& h, const Matrix& columns, double duration,
                             double dt = 0.0, Frame frame = Frame::lab,
                             const StepObserver& observer = {}) {
  if (static_cast<std::size_t>(columns.rows()) != h.space().total_dim()) {
    throw ShapeError("evolve: state dimension does not match Hamiltonian");
  }
  dt = detail::resolve_step(dt, default_time_step(h, frame), duration);
  const std::size_t steps = detail::step_count(duration, dt);
  detail::require_hermitian_hamiltonian(h, duration);

  const detail::Generator gen(h, frame);
  Matrix y;
  if (gen.interaction()) {
    // Interaction-picture amplitudes coincide with lab amplitudes at t = 0.
    auto rhs = [&gen](double t, const Matrix& phi) -> Matrix {
      const Vector p = gen.phases(t);
      const Matrix lab = p.asDiagonal() * phi;
      return -kI * (p.conjugate().asDiagonal() * gen.left(t, lab));
    };
    auto after = [&](double t, const Matrix& phi) {
      if (observer) observer(t, gen.phases(t).asDiagonal() * phi);
    };
    y = detail::rk4(rhs, columns, dt, steps, after);
    y = gen.phases(duration).asDiagonal() * y;
  } else {
    auto rhs = [&gen](double t, const Matrix& psi) -> Matrix { return -kI * gen.left(t, psi); };
    auto after = [&](double t, const Matrix& psi) {
      if (observer) observer(t, psi);
    };
    y = detail::rk4(rhs, columns, dt, steps, after);
  }

  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    const double drift = std::abs(y.col(c).squaredNorm() - columns.col(c).squaredNorm());
    if (drift > kMaxNormDrift) {
      throw StepSizeError("norm drift " + std::to_string(drift) + " exceeds " +
                          std::to_string(kMaxNormDrift) + "; use a smaller dt than " +
                          std::to_string(dt));
    }
  }
  return y;
}

inline StateVector evolve(const Hamiltonian& h, const StateVector& psi0, double duration,
                          double dt = 0.0, Frame frame = Frame::lab) {
  detail::require_same_space(h.space(), psi0.space(), "evolve");
  Matrix y = evolve_columns(h, psi0.amplitudes(), duration, dt, frame);
  return StateVector(psi0.space(), y.col(0));
}

// exp(-i H t) for a time-independent Hermitian H, by diagonalization.
inline Matrix static_propagator(const Operator& h, double t) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(h.matrix());
  Vector phases(eig.eigenvalues().size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::exp(-kI * eig.eigenvalues()(k) * t);
  }
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

// Amplitudes in the frame rotating with diag(static part) at time t.
inline StateVector to_interaction_frame(const Hamiltonian& h, const StateVector& psi, double t) {
  const Eigen::VectorXd e = h.static_part().matrix().diagonal().real();
  Vector v = psi.amplitudes();
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    v(j) *= std::exp(kI * e(j) * t);
  }
  return StateVector(psi.space(), std::move(v));
}

// Lindblad propagation of an arbitrary operator X (a state, or a matrix unit
// |j><k| when reconstructing a channel):
//   dX/dt = -i[H, X] + sum_k rate_k (L X L^dag - {L^dag L, X}/2).
// A trace change above kMaxNormDrift throws StepSizeError.
inline Matrix propagate_lindblad(const Hamiltonian& h, const Matrix& x0,
                                 const std::vector<CollapseChannel>& channels, double duration,
                                 double dt = 0.0, Frame frame = Frame::lab) {
  const auto n = static_cast<Eigen::Index>(h.space().total_dim());
  if (x0.rows() != n || x0.cols() != n) {
    throw ShapeError("propagate_lindblad: operator shape does not match Hamiltonian");
  }
  double total_rate = 0.0;
  std::vector<detail::SparseMatrix> jumps;
  std::vector<detail::SparseMatrix> jumps_adj;
  detail::SparseMatrix decay(n, n);
  for (const auto& ch : channels) {
    detail::require_same_space(h.space(), ch.op.space(), "collapse operator");
    if (!(ch.rate >= 0.0)) {
      throw ParameterError("collapse rate must be non-negative");
    }
    if (ch.rate == 0.0) continue;
    total_rate += ch.rate;
    const Matrix l = std::sqrt(ch.rate) * ch.op.matrix();
    jumps.push_back(detail::to_sparse(l));
    jumps_adj.push_back(detail::to_sparse(l.adjoint()));
    decay += detail::to_sparse(l.adjoint() * l);
  }
  dt = detail::resolve_step(dt, default_time_step(h, frame, total_rate), duration);
  const std::size_t steps = detail::step_count(duration, dt);
  detail::require_hermitian_hamiltonian(h, duration);

  const detail::Generator gen(h, frame);
  auto lab_rhs = [&](double t, const Matrix& rho) -> Matrix {
    Matrix out = -kI * (gen.left(t, rho) - gen.right(t, rho));
    if (!jumps.empty()) {
      out.noalias() -= 0.5 * (decay * rho);
      out.noalias() -= 0.5 * (rho * decay);
      for (std::size_t k = 0; k < jumps.size(); ++k) {
        out.noalias() += (jumps[k] * rho) * jumps_adj[k];
      }
    }
    return out;
  };

  Matrix x;
  auto no_observer = [](double, const Matrix&) {};
  if (gen.interaction()) {
    auto rhs = [&](double t, const Matrix& xi) -> Matrix {
      const Vector p = gen.phases(t);
      const Matrix frame_phase = p * p.adjoint();
      const Matrix lab = xi.cwiseProduct(frame_phase);
      return lab_rhs(t, lab).cwiseProduct(frame_phase.conjugate());
    };
    x = detail::rk4(rhs, x0, dt, steps, no_observer);
    const Vector p = gen.phases(duration);
    x = x.cwiseProduct(p * p.adjoint()).eval();
  } else {
    x = detail::rk4(lab_rhs, x0, dt, steps, no_observer);
  }

  const double drift = std::abs(x.trace() - x0.trace());
  if (drift > kMaxNormDrift) {
    throw StepSizeError("trace drift " + std::to_string(drift) + " exceeds " +
                        std::to_string(kMaxNormDrift) + "; use a smaller dt than " +
                        std::to_string(dt));
  }
  return x;
}

// Lindblad channel for generators that become time independent in the frame
// rotating at w_frame * N, N a diagonal number operator: the static part
// commutes with N, every harmonic term changes N by q with frequency
// q * w_frame, and every collapse operator changes N by a fixed amount.
// Returns the lab-frame superoperator on column-stacked operators, computed
// as one matrix exponential instead of resolving the carrier with RK4.
inline Matrix lindblad_channel_rotating(const Hamiltonian& h, const Operator& number,
                                        double w_frame,
                                        const std::vector<CollapseChannel>& channels,
                                        double duration) {
  if (!(duration > 0.0)) throw ParameterError("duration must be positive");
  detail::require_same_space(h.space(), number.space(), "number operator");
  const Matrix& nm = number.matrix();
  const auto d = nm.rows();
  Matrix off = nm;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() > 0.0 || nm.diagonal().imag().cwiseAbs().maxCoeff() > 0.0) {
    throw ParameterError("rotating frame needs a real diagonal number operator");
  }
  const Eigen::VectorXd n = nm.diagonal().real();
  const double tol = 1e-9 * std::max(1.0, h.spectral_bound());

  // The single N change carried by op, or throws.
  auto shift = [&](const Matrix& op, const char* what) {
    std::optional<double> q;
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) {
        if (std::abs(op(j, k)) <= 1e-14 * std::max(1.0, op.cwiseAbs().maxCoeff())) continue;
        const double qjk = n(j) - n(k);
        if (q && std::abs(*q - qjk) > 1e-9) {
          throw ParameterError(std::string(what) + " does not change N by a fixed amount");
        }
        q = qjk;
      }
    }
    return q.value_or(0.0);
  };

  const Matrix& h0 = h.static_part().matrix();
  if ((h0 * nm - nm * h0).cwiseAbs().maxCoeff() > tol) {
    throw ParameterError("static Hamiltonian does not conserve N");
  }
  Matrix h_rot = h0 - w_frame * nm;
  for (const auto& term : h.terms()) {
    const double q = shift(term.op.matrix(), "drive term");
    if (std::abs(term.angular_frequency - q * w_frame) > 1e-9 * std::max(1.0, std::abs(w_frame))) {
      throw ParameterError("drive frequency does not match the rotating frame");
    }
    h_rot += term.amplitude * term.op.matrix();
  }

  const Matrix id = Matrix::Identity(d, d);
  Matrix gen = -kI * (Eigen::kroneckerProduct(id, h_rot).eval() -
                      Eigen::kroneckerProduct(h_rot.transpose(), id).eval());
  for (const auto& ch : channels) {
    detail::require_same_space(h.space(), ch.op.space(), "collapse operator");
    if (!(ch.rate >= 0.0)) throw ParameterError("collapse rate must be non-negative");
    if (ch.rate == 0.0) continue;
    shift(ch.op.matrix(), "collapse operator");
    const Matrix l = std::sqrt(ch.rate) * ch.op.matrix();
    const Matrix k = l.adjoint() * l;
    gen += Eigen::kroneckerProduct(l.conjugate(), l).eval();
    gen -= 0.5 * Eigen::kroneckerProduct(id, k).eval();
    gen -= 0.5 * Eigen::kroneckerProduct(k.transpose(), id).eval();
  }
  Matrix channel = (gen * duration).exp();

  // Back to the lab frame: X -> exp(-i w N T) X exp(i w N T), elementwise.
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      channel.row(c * d + r) *= std::exp(-kI * w_frame * duration * (n(r) - n(c)));
    }
  }
  Vector vec_id = Eigen::Map<const Vector>(id.data(), d * d);
  const double drift = (channel.adjoint() * vec_id - vec_id).cwiseAbs().maxCoeff();
  if (drift > kMaxNormDrift) {
    throw StepSizeError("channel trace drift " + std::to_string(drift) + " exceeds " +
                        std::to_string(kMaxNormDrift));
  }
  return channel;
}

inline DensityMatrix evolve_lindblad(const Hamiltonian& h, const DensityMatrix& rho0,
                                     const std::vector<CollapseChannel>& channels, double duration,
                                     double dt = 0.0, Frame frame = Frame::lab) {
  detail::require_same_space(h.space(), rho0.space(), "evolve_lindblad");
  Matrix x = propagate_lindblad(h, rho0.matrix(), channels, duration, dt, frame);
  // Integration error leaves O(dt^5) anti-Hermitian residue; symmetrize.
  x = (0.5 * (x + x.adjoint())).eval();
  // RK4 is not positivity preserving: eigenvalues of a pure state drift below
  // zero at the step-error scale. Clip those, reject anything larger.
  Eigen::SelfAdjointEigenSolver<Matrix> es(x);
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -kMaxNormDrift) {
    throw StepSizeError("negative population " + std::to_string(ev.minCoeff()) +
                        "; use a smaller dt than " + std::to_string(dt > 0.0 ? dt : duration));
  }
  if (ev.minCoeff() < 0.0) {
    ev = ev.cwiseMax(0.0);
    x = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  }
  x /= x.trace();
  return DensityMatrix(rho0.space(), std::move(x));
}

}  // namespace resq
