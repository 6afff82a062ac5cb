#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "resq/errors.hpp"

namespace resq {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

// Ordered product of truncated subsystems. Index arithmetic is row-major:
// the first factor is the most significant digit, matching Kronecker order.
class TensorSpace {
 public:
  explicit TensorSpace(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) {
      throw DimensionError("tensor space needs at least one factor");
    }
    total_ = 1;
    for (auto d : dims_) {
      if (d < 2) {
        throw DimensionError("subsystem dimension must be >= 2, got " + std::to_string(d));
      }
      total_ *= d;
    }
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t factor_count() const { return dims_.size(); }
  std::size_t dim(std::size_t factor) const { return dims_.at(factor); }
  std::size_t total_dim() const { return total_; }

  std::size_t index_of(std::span<const std::size_t> labels) const {
    if (labels.size() != dims_.size()) {
      throw ShapeError("label count does not match factor count");
    }
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (labels[k] >= dims_[k]) {
        throw ShapeError("label out of range for factor " + std::to_string(k));
      }
      idx = idx * dims_[k] + labels[k];
    }
    return idx;
  }

  std::size_t index_of(std::initializer_list<std::size_t> labels) const {
    return index_of(std::span<const std::size_t>(labels.begin(), labels.size()));
  }

  std::vector<std::size_t> labels_of(std::size_t index) const {
    std::vector<std::size_t> labels(dims_.size());
    for (std::size_t k = dims_.size(); k-- > 0;) {
      labels[k] = index % dims_[k];
      index /= dims_[k];
    }
    return labels;
  }

  bool operator==(const TensorSpace&) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::size_t total_ = 1;
};

namespace detail {

inline void require_square(const TensorSpace& space, const Matrix& m, const char* what) {
  const auto n = static_cast<Eigen::Index>(space.total_dim());
  if (m.rows() != n || m.cols() != n) {
    throw ShapeError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", space dimension is " + std::to_string(n));
  }
}

inline double hermiticity_defect(const Matrix& m) {
  return m.rows() == 0 ? 0.0 : (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_same_space(const TensorSpace& a, const TensorSpace& b, const char* what) {
  if (!(a == b)) {
    throw ShapeError(std::string(what) + ": operands live in different spaces");
  }
}

}  // namespace detail

class Operator {
 public:
  static constexpr double kHermitianTolerance = 1e-12;

  Operator(TensorSpace space, Matrix entries, bool hermitian = false)
      : space_(std::move(space)), m_(std::move(entries)), hermitian_(hermitian) {
    detail::require_square(space_, m_, "Operator");
    if (hermitian_) {
      const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
      if (detail::hermiticity_defect(m_) >= kHermitianTolerance * scale) {
        throw ParameterError("operator flagged Hermitian but max |A - A^dagger| = " +
                             std::to_string(detail::hermiticity_defect(m_)));
      }
    }
  }

  static Operator identity(const TensorSpace& space) {
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    return Operator(space, Matrix::Identity(n, n), true);
  }

  static Operator zero(const TensorSpace& space) {
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    return Operator(space, Matrix::Zero(n, n), true);
  }

  const TensorSpace& space() const { return space_; }
  const Matrix& matrix() const { return m_; }
  std::size_t dim() const { return space_.total_dim(); }
  bool is_hermitian() const { return hermitian_; }

  Operator adjoint() const { return Operator(space_, m_.adjoint(), hermitian_); }

  friend Operator operator+(const Operator& a, const Operator& b) {
    detail::require_same_space(a.space_, b.space_, "operator +");
    return Operator(a.space_, a.m_ + b.m_, a.hermitian_ && b.hermitian_);
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    detail::require_same_space(a.space_, b.space_, "operator -");
    return Operator(a.space_, a.m_ - b.m_, a.hermitian_ && b.hermitian_);
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    detail::require_same_space(a.space_, b.space_, "operator *");
    return Operator(a.space_, a.m_ * b.m_);
  }
  friend Operator operator*(double s, const Operator& a) {
    return Operator(a.space_, s * a.m_, a.hermitian_);
  }
  friend Operator operator*(cplx s, const Operator& a) {
    return Operator(a.space_, s * a.m_, a.hermitian_ && s.imag() == 0.0);
  }

 private:
  TensorSpace space_;
  Matrix m_;
  bool hermitian_ = false;
};

class StateVector {
 public:
  StateVector(TensorSpace space, Vector amplitudes)
      : space_(std::move(space)), amps_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amps_.size()) != space_.total_dim()) {
      throw ShapeError("state has " + std::to_string(amps_.size()) +
                       " amplitudes, space dimension is " + std::to_string(space_.total_dim()));
    }
  }

  static StateVector basis(const TensorSpace& space, std::span<const std::size_t> labels) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.total_dim()));
    v(static_cast<Eigen::Index>(space.index_of(labels))) = 1.0;
    return StateVector(space, std::move(v));
  }

  static StateVector basis(const TensorSpace& space, std::initializer_list<std::size_t> labels) {
    return basis(space, std::span<const std::size_t>(labels.begin(), labels.size()));
  }

  const TensorSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amps_; }
  cplx operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

  double norm() const { return amps_.norm(); }
  double squared_norm() const { return amps_.squaredNorm(); }

  StateVector& normalize() {
    const double n = amps_.norm();
    if (n == 0.0) {
      throw ParameterError("cannot normalize the zero vector");
    }
    amps_ /= n;
    return *this;
  }

  StateVector normalized() const {
    StateVector copy = *this;
    copy.normalize();
    return copy;
  }

  cplx inner(const StateVector& other) const {
    detail::require_same_space(space_, other.space_, "inner product");
    return amps_.dot(other.amps_);
  }

  StateVector apply(const Operator& op) const {
    detail::require_same_space(space_, op.space(), "apply");
    return StateVector(space_, op.matrix() * amps_);
  }

 private:
  TensorSpace space_;
  Vector amps_;
};

class DensityMatrix {
 public:
  static constexpr double kTolerance = 1e-9;

  // Validates Hermiticity, unit trace and positivity at kTolerance.
  DensityMatrix(TensorSpace space, Matrix entries)
      : space_(std::move(space)), rho_(std::move(entries)) {
    detail::require_square(space_, rho_, "DensityMatrix");
    if (detail::hermiticity_defect(rho_) > kTolerance) {
      throw ParameterError("density matrix is not Hermitian");
    }
    if (std::abs(rho_.trace() - cplx(1.0)) > kTolerance) {
      throw ParameterError("density matrix trace is " + std::to_string(rho_.trace().real()));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kTolerance) {
      throw ParameterError("density matrix has a negative eigenvalue");
    }
  }

  static DensityMatrix pure(const StateVector& psi) {
    const Vector& v = psi.amplitudes();
    return DensityMatrix(psi.space(), v * v.adjoint() / v.squaredNorm());
  }

  const TensorSpace& space() const { return space_; }
  const Matrix& matrix() const { return rho_; }
  double trace() const { return rho_.trace().real(); }
  double purity() const { return (rho_ * rho_).trace().real(); }

  // <psi|rho|psi> for a normalized psi.
  double overlap(const StateVector& psi) const {
    detail::require_same_space(space_, psi.space(), "overlap");
    const Vector v = psi.amplitudes() / psi.norm();
    return std::real(v.dot(rho_ * v));
  }

  double expectation(const Operator& op) const {
    detail::require_same_space(space_, op.space(), "expectation");
    return std::real((rho_ * op.matrix()).trace());
  }

 private:
  TensorSpace space_;
  Matrix rho_;
};

// Truncated bosonic lowering operator on levels 0..n_max.
inline Operator annihilation(int n_max) {
  if (n_max < 1) {
    throw DimensionError("annihilation needs n_max >= 1, got " + std::to_string(n_max));
  }
  const auto d = static_cast<Eigen::Index>(n_max + 1);
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index n = 1; n < d; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return Operator(TensorSpace({static_cast<std::size_t>(d)}), std::move(a));
}

inline Operator creation(int n_max) { return annihilation(n_max).adjoint(); }

inline Operator number_operator(int n_max) {
  const Operator a = annihilation(n_max);
  return Operator(a.space(), a.matrix().adjoint() * a.matrix(), true);
}

// Two-level operators in the {|g>=|0>, |e>=|1>} basis.
namespace qubit {

inline TensorSpace space() { return TensorSpace({2}); }

inline Operator sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return Operator(space(), m, true);
}
inline Operator sigma_y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return Operator(space(), m, true);
}
inline Operator sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return Operator(space(), m, true);
}
// |g><e|
inline Operator lowering() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return Operator(space(), m);
}
// |e><g|
inline Operator raising() { return lowering().adjoint(); }
// |e><e|
inline Operator excited_projector() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return Operator(space(), m, true);
}

}  // namespace qubit

inline TensorSpace tensor(const TensorSpace& a, const TensorSpace& b) {
  std::vector<std::size_t> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return TensorSpace(std::move(dims));
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Operator kron(const Operator& a, const Operator& b) {
  return Operator(tensor(a.space(), b.space()), kron(a.matrix(), b.matrix()),
                  a.is_hermitian() && b.is_hermitian());
}

inline StateVector kron(const StateVector& a, const StateVector& b) {
  const Vector& va = a.amplitudes();
  const Vector& vb = b.amplitudes();
  Vector out(va.size() * vb.size());
  for (Eigen::Index i = 0; i < va.size(); ++i) {
    out.segment(i * vb.size(), vb.size()) = va(i) * vb;
  }
  return StateVector(tensor(a.space(), b.space()), std::move(out));
}

// Places a single-factor operator at position `site` of `space`, identity elsewhere.
inline Operator embed(const Operator& op, std::size_t site, const TensorSpace& space) {
  if (site >= space.factor_count()) {
    throw ShapeError("embed: site " + std::to_string(site) + " out of range");
  }
  if (op.dim() != space.dim(site)) {
    throw ShapeError("embed: operator dimension " + std::to_string(op.dim()) +
                     " does not match factor dimension " + std::to_string(space.dim(site)));
  }
  std::size_t before = 1;
  std::size_t after = 1;
  for (std::size_t k = 0; k < site; ++k) before *= space.dim(k);
  for (std::size_t k = site + 1; k < space.factor_count(); ++k) after *= space.dim(k);
  const auto eb = static_cast<Eigen::Index>(before);
  const auto ea = static_cast<Eigen::Index>(after);
  Matrix m = kron(kron(Matrix::Identity(eb, eb), op.matrix()), Matrix::Identity(ea, ea));
  return Operator(space, std::move(m), op.is_hermitian());
}

// |<a|b>|^2 after normalizing both inputs.
inline double fidelity(const StateVector& a, const StateVector& b) {
  detail::require_same_space(a.space(), b.space(), "fidelity");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw ParameterError("fidelity of a zero vector");
  }
  const double f = std::norm(a.amplitudes().dot(b.amplitudes())) / (na * na * nb * nb);
  return std::clamp(f, 0.0, 1.0);
}

// Reduced state on the factors listed in `keep`; kept factors stay in space order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<std::size_t> keep) {
  const TensorSpace& space = rho.space();
  if (keep.empty()) {
    throw ParameterError("partial_trace: keep set is empty");
  }
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.back() >= space.factor_count()) {
    throw ParameterError("partial_trace: factor index out of range");
  }
  std::vector<bool> kept(space.factor_count(), false);
  std::vector<std::size_t> kept_dims;
  for (auto k : keep) {
    kept[k] = true;
    kept_dims.push_back(space.dim(k));
  }
  TensorSpace reduced(kept_dims);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(reduced.total_dim()),
                            static_cast<Eigen::Index>(reduced.total_dim()));

  const std::size_t n = space.total_dim();
  std::vector<std::size_t> kept_index(n);
  std::vector<std::size_t> traced_index(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto labels = space.labels_of(i);
    std::size_t ki = 0;
    std::size_t ti = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (kept[k]) {
        ki = ki * space.dim(k) + labels[k];
      } else {
        ti = ti * space.dim(k) + labels[k];
      }
    }
    kept_index[i] = ki;
    traced_index[i] = ti;
  }
  const Matrix& m = rho.matrix();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (traced_index[i] == traced_index[j]) {
        out(static_cast<Eigen::Index>(kept_index[i]), static_cast<Eigen::Index>(kept_index[j])) +=
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return DensityMatrix(reduced, std::move(out));
}

}  // namespace resq
