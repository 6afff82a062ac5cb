#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resq/errors.hpp"
#include "resq/units.hpp"

namespace resq {

// Lattice coordinate, one 1-based entry per dimension.
using SiteId = std::vector<int>;

inline std::string to_string(const SiteId& site) {
  std::string out;
  for (std::size_t k = 0; k < site.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(site[k]);
  }
  return out;
}

// True when a and b differ by exactly one in exactly one coordinate.
inline bool adjacent(const SiteId& a, const SiteId& b) {
  if (a.size() != b.size()) return false;
  int moved = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const int delta = std::abs(a[k] - b[k]);
    if (delta > 1) return false;
    moved += delta;
  }
  return moved == 1;
}

struct ResonatorSpec {
  SiteId site;
  double frequency;        // angular, rad/s
  double photon_lifetime;  // tau_pho, s
};

// Mediator qubit between two adjacent resonators. `left` is always the site in
// the w frequency class, `right` the w' class, so that epsilon - w_left and
// epsilon - w_right are the two detunings in the usual notation.
struct JunctionSpec {
  SiteId left;
  SiteId right;
  double epsilon;         // mediator level splitting, rad/s
  double g_left;          // coupling to the left resonator, rad/s
  double g_right;         // coupling to the right resonator, rad/s
  double coherence_time;  // tau_cha, s
};

// Charge qubit inside a resonator, used for initialization and readout.
struct InnerQubitSpec {
  SiteId site;
  double epsilon_min;     // tunable range, rad/s
  double epsilon_max;
  double coupling;        // g_i to the half-wave mode, rad/s
  double coherence_time;  // s
};

// Per-device values applied when a lattice is built; individual devices can be
// overridden afterwards.
struct DeviceDefaults {
  double epsilon = 8.6 * units::GHz;
  double g = 200.0 * units::MHz;
  double tau_cha = 1.0 * units::us;
  double tau_pho = 5.0 * units::us;
  double inner_g = 200.0 * units::MHz;
  double inner_tau = 1.0 * units::us;
  double inner_epsilon_min = 4.0 * units::GHz;
  double inner_epsilon_max = 10.0 * units::GHz;
};

using JunctionKey = std::pair<SiteId, SiteId>;

// Unordered pair key: coordinate-sorted.
inline JunctionKey junction_key(const SiteId& a, const SiteId& b) {
  return a < b ? JunctionKey{a, b} : JunctionKey{b, a};
}

class LatticeSpec {
 public:
  int dimension() const { return static_cast<int>(extents_.size()); }
  const std::vector<int>& extents() const { return extents_; }
  std::size_t site_count() const { return resonators_.size(); }

  const std::map<SiteId, ResonatorSpec>& resonators() const { return resonators_; }
  const std::map<JunctionKey, JunctionSpec>& junctions() const { return junctions_; }
  const std::map<SiteId, InnerQubitSpec>& inner_qubits() const { return inner_qubits_; }

  // Sites in lexicographic order; this is also the qubit order of dense registers.
  std::vector<SiteId> sites() const {
    std::vector<SiteId> out;
    out.reserve(resonators_.size());
    for (const auto& [site, _] : resonators_) out.push_back(site);
    return out;
  }

  bool contains(const SiteId& site) const { return resonators_.count(site) != 0; }

  const ResonatorSpec& resonator(const SiteId& site) const {
    auto it = resonators_.find(site);
    if (it == resonators_.end()) {
      throw LatticeError("no resonator at site (" + to_string(site) + ")");
    }
    return it->second;
  }

  const InnerQubitSpec& inner_qubit(const SiteId& site) const {
    auto it = inner_qubits_.find(site);
    if (it == inner_qubits_.end()) {
      throw LatticeError("no inner qubit at site (" + to_string(site) + ")");
    }
    return it->second;
  }

  // Looks a junction up by its endpoints in either order.
  const JunctionSpec& junction(const SiteId& a, const SiteId& b) const {
    auto it = junctions_.find(junction_key(a, b));
    if (it == junctions_.end()) {
      throw LatticeError("no junction between (" + to_string(a) + ") and (" + to_string(b) + ")");
    }
    return it->second;
  }

  std::vector<SiteId> neighbors(const SiteId& site) const {
    std::vector<SiteId> out;
    for (std::size_t k = 0; k < site.size(); ++k) {
      for (int step : {-1, 1}) {
        SiteId n = site;
        n[k] += step;
        if (contains(n)) out.push_back(n);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  LatticeSpec with_resonator(const ResonatorSpec& r) const {
    LatticeSpec copy = *this;
    copy.resonator_ref(r.site) = r;
    copy.validate();
    return copy;
  }

  LatticeSpec with_junction(const JunctionSpec& j) const {
    LatticeSpec copy = *this;
    auto it = copy.junctions_.find(junction_key(j.left, j.right));
    if (it == copy.junctions_.end()) {
      throw LatticeError("no junction between (" + to_string(j.left) + ") and (" +
                         to_string(j.right) + ")");
    }
    JunctionSpec updated = j;
    // Orientation is fixed by the frequency class, not by the caller.
    updated.left = it->second.left;
    updated.right = it->second.right;
    if (updated.left != j.left) std::swap(updated.g_left, updated.g_right);
    it->second = updated;
    copy.validate();
    return copy;
  }

  LatticeSpec with_inner_qubit(const InnerQubitSpec& q) const {
    LatticeSpec copy = *this;
    auto it = copy.inner_qubits_.find(q.site);
    if (it == copy.inner_qubits_.end()) {
      throw LatticeError("no inner qubit at site (" + to_string(q.site) + ")");
    }
    it->second = q;
    copy.validate();
    return copy;
  }

  // Checks the structural invariants; throws LatticeError on violation.
  void validate() const {
    for (const auto& [site, r] : resonators_) {
      if (!(r.frequency > 0.0) || !(r.photon_lifetime > 0.0)) {
        throw LatticeError("resonator (" + to_string(site) +
                           ") needs positive frequency and photon lifetime");
      }
      for (const auto& n : neighbors(site)) {
        if (junctions_.count(junction_key(site, n)) != 1) {
          throw LatticeError("missing junction between (" + to_string(site) + ") and (" +
                             to_string(n) + ")");
        }
        if (resonator(n).frequency == r.frequency) {
          throw LatticeError("adjacent resonators (" + to_string(site) + ") and (" + to_string(n) +
                             ") share a frequency");
        }
      }
    }
    for (const auto& [key, j] : junctions_) {
      if (!adjacent(j.left, j.right)) {
        throw LatticeError("junction endpoints (" + to_string(j.left) + ") and (" +
                           to_string(j.right) + ") are not nearest neighbours");
      }
      if (!(j.epsilon > 0.0) || !(j.coherence_time > 0.0) || j.g_left < 0.0 || j.g_right < 0.0) {
        throw LatticeError("junction (" + to_string(j.left) + ")-(" + to_string(j.right) +
                           ") has invalid parameters");
      }
    }
    for (const auto& [site, q] : inner_qubits_) {
      if (!(q.coupling > 0.0)) {
        throw LatticeError("inner qubit (" + to_string(site) + ") needs a positive coupling");
      }
      if (!(q.coherence_time > 0.0)) {
        throw LatticeError("inner qubit (" + to_string(site) + ") needs a positive coherence time");
      }
    }
  }

 private:
  friend LatticeSpec build_lattice(int, const std::vector<int>&, double, double,
                                   const DeviceDefaults&);

  ResonatorSpec& resonator_ref(const SiteId& site) {
    auto it = resonators_.find(site);
    if (it == resonators_.end()) {
      throw LatticeError("no resonator at site (" + to_string(site) + ")");
    }
    return it->second;
  }

  std::vector<int> extents_;
  std::map<SiteId, ResonatorSpec> resonators_;
  std::map<JunctionKey, JunctionSpec> junctions_;
  std::map<SiteId, InnerQubitSpec> inner_qubits_;
};

// Checkerboard class: site is in the w class iff (sum of coordinates - d) is
// even, which puts odd sites of a chain and even-sum sites of a square lattice
// at w.
inline bool in_w_class(const SiteId& site) {
  int sum = 0;
  for (int c : site) sum += c;
  return ((sum - static_cast<int>(site.size())) % 2) == 0;
}

inline LatticeSpec build_lattice(int d, const std::vector<int>& extents, double w, double w_prime,
                                 const DeviceDefaults& defaults = {}) {
  if (d < 1 || static_cast<int>(extents.size()) != d) {
    throw LatticeError("extents must list one size per dimension");
  }
  for (int e : extents) {
    if (e < 1) throw LatticeError("lattice extents must be >= 1");
  }
  if (w == w_prime) {
    throw FrequencyError("neighbouring resonator frequencies w and w' must differ");
  }
  if (!(w > 0.0) || !(w_prime > 0.0)) {
    throw FrequencyError("resonator frequencies must be positive");
  }

  LatticeSpec lat;
  lat.extents_ = extents;

  SiteId site(static_cast<std::size_t>(d), 1);
  while (true) {
    lat.resonators_[site] = ResonatorSpec{site, in_w_class(site) ? w : w_prime, defaults.tau_pho};
    lat.inner_qubits_[site] = InnerQubitSpec{site, defaults.inner_epsilon_min,
                                             defaults.inner_epsilon_max, defaults.inner_g,
                                             defaults.inner_tau};
    std::size_t k = 0;
    while (k < site.size() && ++site[k] > extents[k]) {
      site[k] = 1;
      ++k;
    }
    if (k == site.size()) break;
  }

  for (const auto& [s, _] : lat.resonators_) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      SiteId n = s;
      n[k] += 1;
      if (!lat.contains(n)) continue;
      const bool s_is_w = in_w_class(s);
      JunctionSpec j{s_is_w ? s : n, s_is_w ? n : s, defaults.epsilon, defaults.g, defaults.g,
                     defaults.tau_cha};
      lat.junctions_[junction_key(s, n)] = j;
    }
  }
  lat.validate();
  return lat;
}

}  // namespace resq
