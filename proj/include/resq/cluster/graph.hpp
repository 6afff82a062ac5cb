#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "resq/cluster/dense.hpp"
#include "resq/device/lattice.hpp"
#include "resq/errors.hpp"
#include "resq/random.hpp"

namespace resq {

enum class Pauli { X, Y, Z };

inline const char* to_string(Pauli p) {
  switch (p) {
    case Pauli::X: return "X";
    case Pauli::Y: return "Y";
    case Pauli::Z: return "Z";
  }
  return "?";
}

// Signed Pauli string: (-1)^sign * prod_j i^{x_j z_j} X^{x_j} Z^{z_j}.
struct PauliString {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> z;
  bool sign = false;

  explicit PauliString(std::size_t n = 0) : x(n, 0), z(n, 0) {}

  PauliString& set(std::size_t q, Pauli p) {
    x[q] = p != Pauli::Z;
    z[q] = p != Pauli::X;
    return *this;
  }

  bool operator==(const PauliString&) const = default;
};

struct PauliMeasurement {
  int outcome = 0;  // 0 for eigenvalue +1
  bool deterministic = false;
};

// Stabilizer state as an Aaronson-Gottesman tableau with destabilizers.
// Rows 0..n-1 are destabilizers, n..2n-1 stabilizers, 2n is scratch. Bits are
// packed 64 qubits per word. Measured qubits stay in the tableau in the
// eigenstate of the measured Pauli; residual() projects them out.
class GraphState {
 public:
  // |+>^N: stabilizers X_q, destabilizers Z_q.
  static GraphState plus_state(std::vector<SiteId> sites) {
    GraphState g(std::move(sites));
    for (std::size_t q = 0; q < g.n_; ++q) {
      g.set_bit(g.z_, q, q, true);
      g.set_bit(g.x_, g.n_ + q, q, true);
    }
    return g;
  }

  std::size_t qubit_count() const { return n_; }
  const std::vector<SiteId>& sites() const { return sites_; }

  std::size_t qubit_of(const SiteId& s) const {
    for (std::size_t q = 0; q < n_; ++q) {
      if (sites_[q] == s) return q;
    }
    throw LatticeError("site (" + to_string(s) + ") is not in the graph state");
  }

  // Outcome record for qubit q, if it has been measured.
  const std::optional<std::pair<Pauli, int>>& measured(std::size_t q) const {
    return measured_.at(q);
  }

  void h(std::size_t q) {
    check(q);
    for (std::size_t r = 0; r < 2 * n_; ++r) {
      const bool xb = get_bit(x_, r, q);
      const bool zb = get_bit(z_, r, q);
      if (xb && zb) r_[r] ^= 1;
      set_bit(x_, r, q, zb);
      set_bit(z_, r, q, xb);
    }
  }

  void s(std::size_t q) {
    check(q);
    for (std::size_t r = 0; r < 2 * n_; ++r) {
      const bool xb = get_bit(x_, r, q);
      const bool zb = get_bit(z_, r, q);
      if (xb && zb) r_[r] ^= 1;
      set_bit(z_, r, q, zb ^ xb);
    }
  }

  void s_dagger(std::size_t q) {
    s(q);
    pauli(q, Pauli::Z);
  }

  void cnot(std::size_t control, std::size_t target) {
    check(control);
    check(target);
    if (control == target) throw ParameterError("CNOT needs two distinct qubits");
    for (std::size_t r = 0; r < 2 * n_; ++r) {
      const bool xa = get_bit(x_, r, control);
      const bool za = get_bit(z_, r, control);
      const bool xb = get_bit(x_, r, target);
      const bool zb = get_bit(z_, r, target);
      if (xa && zb && (xb == za)) r_[r] ^= 1;
      set_bit(x_, r, target, xb ^ xa);
      set_bit(z_, r, control, za ^ zb);
    }
  }

  void cz(std::size_t a, std::size_t b) {
    h(b);
    cnot(a, b);
    h(b);
  }

  // Applies a Pauli gate (not a measurement).
  void pauli(std::size_t q, Pauli p) {
    check(q);
    for (std::size_t r = 0; r < 2 * n_; ++r) {
      const bool xb = get_bit(x_, r, q);
      const bool zb = get_bit(z_, r, q);
      const bool flip = p == Pauli::X ? zb : p == Pauli::Z ? xb : (xb != zb);
      if (flip) r_[r] ^= 1;
    }
  }

  // Measures the Pauli `p` on qubit q. A random outcome is drawn from `rng`;
  // with `forced` set, that outcome is imposed instead (an error if the
  // outcome is deterministic and different).
  PauliMeasurement measure(std::size_t q, Pauli p, std::mt19937_64* rng,
                           std::optional<int> forced = std::nullopt) {
    check(q);
    to_z_basis(q, p);
    PauliMeasurement m = measure_z(q, rng, forced);
    from_z_basis(q, p);
    measured_[q] = std::make_pair(p, m.outcome);
    return m;
  }

  PauliString generator(std::size_t i) const {
    if (i >= n_) throw ParameterError("generator index out of range");
    return row(n_ + i);
  }

  PauliString destabilizer(std::size_t i) const {
    if (i >= n_) throw ParameterError("destabilizer index out of range");
    return row(i);
  }

  // Tableau invariants: stabilizers commute pairwise and are independent.
  bool valid() const {
    for (std::size_t a = n_; a < 2 * n_; ++a) {
      for (std::size_t b = a + 1; b < 2 * n_; ++b) {
        if (!commute(a, b)) return false;
      }
    }
    return rank() == n_;
  }

  // Dense amplitudes of all N qubits (up to a global phase).
  DenseRegister to_dense() const {
    if (n_ > kDenseCapacity) {
      throw CapacityError("graph state of " + std::to_string(n_) +
                          " qubits is too large for a dense conversion");
    }
    const std::size_t dim = std::size_t{1} << n_;
    // Project a fixed pseudo-random vector onto the joint +1 eigenspace.
    std::mt19937_64 rng(0x5eedULL);
    Vector v(static_cast<Eigen::Index>(dim));
    for (auto& a : v) a = cplx(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
    for (std::size_t i = 0; i < n_; ++i) {
      v = 0.5 * (v + apply_row(n_ + i, v));
    }
    const double norm = v.norm();
    if (norm < 1e-12) throw Error("stabilizer projection vanished");
    v /= norm;
    // Fix the global phase: largest amplitude real positive.
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    v *= std::conj(v(k)) / std::abs(v(k));
    return DenseRegister(sites_, std::move(v));
  }

  // Dense state of the unmeasured qubits.
  DenseRegister residual() const {
    DenseRegister reg = to_dense();
    for (std::size_t q = n_; q-- > 0;) {
      if (!measured_[q]) continue;
      const auto [p, outcome] = *measured_[q];
      reg.project_out(q, eigenstate(p, outcome));
    }
    return reg;
  }

  static Eigen::Vector2cd eigenstate(Pauli p, int outcome) {
    switch (p) {
      case Pauli::X: return b_gamma_state(0.0, outcome);
      case Pauli::Y: return b_gamma_state(0.5 * units::pi, outcome);
      case Pauli::Z: break;
    }
    return outcome == 0 ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0);
  }

 private:
  explicit GraphState(std::vector<SiteId> sites)
      : sites_(std::move(sites)),
        n_(sites_.size()),
        words_((n_ + 63) / 64),
        x_((2 * n_ + 1) * words_, 0),
        z_((2 * n_ + 1) * words_, 0),
        r_(2 * n_ + 1, 0),
        measured_(n_) {}

  void check(std::size_t q) const {
    if (q >= n_) throw ParameterError("qubit index " + std::to_string(q) + " out of range");
  }

  bool get_bit(const std::vector<std::uint64_t>& m, std::size_t row, std::size_t q) const {
    return (m[row * words_ + q / 64] >> (q % 64)) & 1U;
  }

  void set_bit(std::vector<std::uint64_t>& m, std::size_t row, std::size_t q, bool v) {
    std::uint64_t& w = m[row * words_ + q / 64];
    const std::uint64_t mask = std::uint64_t{1} << (q % 64);
    w = v ? (w | mask) : (w & ~mask);
  }

  // row h <- row i * row h, tracking the sign.
  void rowsum(std::size_t h, std::size_t i) {
    int phase = 2 * r_[h] + 2 * r_[i];
    for (std::size_t w = 0; w < words_; ++w) {
      const std::uint64_t x1 = x_[i * words_ + w];
      const std::uint64_t z1 = z_[i * words_ + w];
      const std::uint64_t x2 = x_[h * words_ + w];
      const std::uint64_t z2 = z_[h * words_ + w];
      const std::uint64_t plus =
          (x1 & z1 & z2 & ~x2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2);
      const std::uint64_t minus =
          (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2);
      phase += std::popcount(plus) - std::popcount(minus);
      x_[h * words_ + w] = x1 ^ x2;
      z_[h * words_ + w] = z1 ^ z2;
    }
    phase = ((phase % 4) + 4) % 4;
    r_[h] = phase == 2 ? 1 : 0;
  }

  void copy_row(std::size_t dst, std::size_t src) {
    for (std::size_t w = 0; w < words_; ++w) {
      x_[dst * words_ + w] = x_[src * words_ + w];
      z_[dst * words_ + w] = z_[src * words_ + w];
    }
    r_[dst] = r_[src];
  }

  void clear_row(std::size_t row) {
    for (std::size_t w = 0; w < words_; ++w) {
      x_[row * words_ + w] = 0;
      z_[row * words_ + w] = 0;
    }
    r_[row] = 0;
  }

  // U with U P U^dagger = Z: H for X, H S^dagger for Y.
  void to_z_basis(std::size_t q, Pauli p) {
    if (p == Pauli::X) {
      h(q);
    } else if (p == Pauli::Y) {
      s_dagger(q);
      h(q);
    }
  }

  void from_z_basis(std::size_t q, Pauli p) {
    if (p == Pauli::X) {
      h(q);
    } else if (p == Pauli::Y) {
      h(q);
      s(q);
    }
  }

  PauliMeasurement measure_z(std::size_t q, std::mt19937_64* rng, std::optional<int> forced) {
    std::size_t p = 2 * n_;
    for (std::size_t r = n_; r < 2 * n_; ++r) {
      if (get_bit(x_, r, q)) {
        p = r;
        break;
      }
    }
    if (p < 2 * n_) {
      for (std::size_t r = 0; r < 2 * n_; ++r) {
        if (r != p && get_bit(x_, r, q)) rowsum(r, p);
      }
      copy_row(p - n_, p);
      clear_row(p);
      set_bit(z_, p, q, true);
      int outcome = 0;
      if (forced) {
        outcome = *forced;
      } else {
        if (rng == nullptr) throw ParameterError("random outcome needs a generator");
        outcome = uniform01(*rng) < 0.5 ? 0 : 1;
      }
      r_[p] = static_cast<std::uint8_t>(outcome);
      return {outcome, false};
    }
    const std::size_t scratch = 2 * n_;
    clear_row(scratch);
    for (std::size_t r = 0; r < n_; ++r) {
      if (get_bit(x_, r, q)) rowsum(scratch, r + n_);
    }
    const int outcome = r_[scratch];
    if (forced && *forced != outcome) {
      throw ParameterError("forced outcome " + std::to_string(*forced) +
                           " contradicts the deterministic outcome " + std::to_string(outcome));
    }
    return {outcome, true};
  }

  PauliString row(std::size_t r) const {
    PauliString p(n_);
    for (std::size_t q = 0; q < n_; ++q) {
      p.x[q] = get_bit(x_, r, q);
      p.z[q] = get_bit(z_, r, q);
    }
    p.sign = r_[r] != 0;
    return p;
  }

  bool commute(std::size_t a, std::size_t b) const {
    int parity = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      parity += std::popcount((x_[a * words_ + w] & z_[b * words_ + w]) ^
                              (z_[a * words_ + w] & x_[b * words_ + w]));
    }
    return parity % 2 == 0;
  }

  std::size_t rank() const {
    // Gaussian elimination over GF(2) on the stabilizer rows.
    std::vector<std::vector<std::uint64_t>> rows;
    for (std::size_t r = n_; r < 2 * n_; ++r) {
      std::vector<std::uint64_t> v(2 * words_);
      for (std::size_t w = 0; w < words_; ++w) {
        v[w] = x_[r * words_ + w];
        v[words_ + w] = z_[r * words_ + w];
      }
      rows.push_back(std::move(v));
    }
    std::size_t rank = 0;
    for (std::size_t col = 0; col < 2 * words_ * 64 && rank < rows.size(); ++col) {
      const std::size_t w = col / 64;
      const std::uint64_t mask = std::uint64_t{1} << (col % 64);
      std::size_t pivot = rank;
      while (pivot < rows.size() && !(rows[pivot][w] & mask)) ++pivot;
      if (pivot == rows.size()) continue;
      std::swap(rows[rank], rows[pivot]);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (k != rank && (rows[k][w] & mask)) {
          for (std::size_t t = 0; t < rows[k].size(); ++t) rows[k][t] ^= rows[rank][t];
        }
      }
      ++rank;
    }
    return rank;
  }

  // P|y> = (-1)^r i^{|x & z|} (-1)^{z.y} |y xor x>, qubit 0 the top bit.
  Vector apply_row(std::size_t r, const Vector& v) const {
    std::size_t xm = 0;
    std::size_t zm = 0;
    for (std::size_t q = 0; q < n_; ++q) {
      const std::size_t b = std::size_t{1} << (n_ - 1 - q);
      if (get_bit(x_, r, q)) xm |= b;
      if (get_bit(z_, r, q)) zm |= b;
    }
    static const cplx ipow[4] = {1.0, kI, -1.0, -kI};
    cplx c = ipow[std::popcount(xm & zm) % 4];
    if (r_[r]) c = -c;
    Vector out(v.size());
    for (std::size_t y = 0; y < static_cast<std::size_t>(v.size()); ++y) {
      const double s = (std::popcount(zm & y) % 2) ? -1.0 : 1.0;
      out(static_cast<Eigen::Index>(y ^ xm)) = c * s * v(static_cast<Eigen::Index>(y));
    }
    return out;
  }

  std::vector<SiteId> sites_;
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> x_;
  std::vector<std::uint64_t> z_;
  std::vector<std::uint8_t> r_;
  std::vector<std::optional<std::pair<Pauli, int>>> measured_;
};

}  // namespace resq
