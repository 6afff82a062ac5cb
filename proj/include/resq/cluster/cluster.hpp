#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "resq/cluster/dense.hpp"
#include "resq/cluster/graph.hpp"
#include "resq/device/lattice.hpp"

namespace resq {

using Edge = std::pair<SiteId, SiteId>;

// Rounds of simultaneous CZ gates. Edges inside one round share no site.
struct FusionSchedule {
  std::vector<std::vector<Edge>> rounds;

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& r : rounds) n += r.size();
    return n;
  }
};

// Axes from the last coordinate to the first (rows (i, j)-(i, j+1) before
// columns in 2D); per axis, first the edges whose lower end has an odd
// coordinate, then those with an even one. Always 2d rounds, some possibly
// empty on short axes.
inline FusionSchedule fusion_schedule(const LatticeSpec& lat) {
  FusionSchedule sched;
  const auto sites = lat.sites();
  for (int axis = lat.dimension() - 1; axis >= 0; --axis) {
    for (int parity : {1, 0}) {
      std::vector<Edge> round;
      for (const auto& s : sites) {
        if (s[axis] % 2 != parity) continue;
        SiteId n = s;
        n[axis] += 1;
        if (lat.contains(n)) round.emplace_back(s, n);
      }
      sched.rounds.push_back(std::move(round));
    }
  }
  return sched;
}

// Cluster-state stabilizer K_a = X_a prod_{b ~ a} Z_b over the lattice sites.
inline PauliString cluster_stabilizer(const LatticeSpec& lat, const std::vector<SiteId>& order,
                                      const SiteId& a) {
  PauliString p(order.size());
  auto index = [&](const SiteId& s) {
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), s) - order.begin());
  };
  p.set(index(a), Pauli::X);
  for (const auto& b : lat.neighbors(a)) p.set(index(b), Pauli::Z);
  return p;
}

inline DenseRegister build_cluster_dense(const LatticeSpec& lat) {
  DenseRegister reg = DenseRegister::plus_state(lat.sites());
  for (const auto& round : fusion_schedule(lat).rounds) {
    for (const auto& [a, b] : round) reg.apply_cz(reg.qubit_of(a), reg.qubit_of(b));
  }
  return reg;
}

inline GraphState build_cluster_graph(const LatticeSpec& lat) {
  GraphState g = GraphState::plus_state(lat.sites());
  // Qubit index equals the position in lat.sites(); avoid linear lookups.
  const auto sites = lat.sites();
  auto index = [&](const SiteId& s) {
    return static_cast<std::size_t>(std::lower_bound(sites.begin(), sites.end(), s) -
                                    sites.begin());
  };
  for (const auto& round : fusion_schedule(lat).rounds) {
    for (const auto& [a, b] : round) g.cz(index(a), index(b));
  }
  return g;
}

inline PauliMeasurement measure_pauli_graph(GraphState& gs, const SiteId& site, Pauli basis,
                                            std::mt19937_64& rng) {
  return gs.measure(gs.qubit_of(site), basis, &rng);
}

struct StabilizerExpectation {
  SiteId site;
  double value = 0.0;
};

// <K_a> for every lattice site held by the register.
inline std::vector<StabilizerExpectation> verify_stabilizers(const DenseRegister& reg,
                                                             const LatticeSpec& lat) {
  std::vector<StabilizerExpectation> out;
  for (const auto& a : reg.sites()) {
    std::vector<std::pair<std::size_t, Gate2>> factors{{reg.qubit_of(a), gates::pauli_x()}};
    for (const auto& b : lat.neighbors(a)) {
      if (reg.has_site(b)) factors.emplace_back(reg.qubit_of(b), gates::pauli_z());
    }
    out.push_back({a, reg.expectation(factors)});
  }
  return out;
}

inline bool all_stabilizers_hold(const std::vector<StabilizerExpectation>& report,
                                 double tol = 1e-9) {
  return std::all_of(report.begin(), report.end(),
                     [tol](const auto& e) { return std::abs(e.value - 1.0) <= tol; });
}

}  // namespace resq
