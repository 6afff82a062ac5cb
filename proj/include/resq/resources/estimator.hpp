#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "resq/device/dispersive.hpp"
#include "resq/device/lattice.hpp"
#include "resq/errors.hpp"
#include "resq/format.hpp"
#include "resq/units.hpp"

namespace resq {

// Default reading of "much larger than".
inline constexpr double kDefaultMargin = 5.0;

struct TimingBudget {
  double t_sin = 0.0;  // single-qubit rotation, s
  double t_cp = 0.0;   // conditional-phase gate, s
  double t_mea = 0.0;  // readout, s

  void validate() const {
    if (!(t_sin > 0.0) || !(t_cp > 0.0) || !(t_mea > 0.0)) {
      throw ParameterError("timing budget entries must be positive");
    }
  }
};

// The published timescales: 2.5 ns, 125 ns, 8 ns.
inline TimingBudget nominal_budget() { return {2.5 * units::ns, 125.0 * units::ns, 8.0 * units::ns}; }

// Rounds every entry to a multiple of `resolution`. The default half
// nanosecond keeps t_sin = 2.5 ns and turns 1/kappa_low = 7.96 ns into 8 ns.
inline TimingBudget round_budget(const TimingBudget& b, double resolution = 0.5 * units::ns) {
  if (!(resolution > 0.0)) throw ParameterError("rounding resolution must be positive");
  auto r = [resolution](double t) { return std::round(t / resolution) * resolution; };
  TimingBudget out{r(b.t_sin), r(b.t_cp), r(b.t_mea)};
  out.validate();
  return out;
}

// t_sin = pi / g_min over the inner qubits, t_cp = pi / Omega, t_mea = 1 / kappa_low.
inline TimingBudget derive_budget(const LatticeSpec& lat, double omega, double kappa_low) {
  if (!(omega > 0.0) || !(kappa_low > 0.0)) {
    throw ParameterError("Rabi strength and readout rate must be positive");
  }
  double g_min = std::numeric_limits<double>::infinity();
  for (const auto& [_, q] : lat.inner_qubits()) g_min = std::min(g_min, q.coupling);
  if (!std::isfinite(g_min)) throw ParameterError("lattice has no inner qubits");
  return {units::pi / g_min, units::pi / omega, 1.0 / kappa_low};
}

// 2d t_cp + N (4 t_sin + t_mea) + 2 t_sin
inline double total_time(int d, long long n, const TimingBudget& b) {
  if (d < 1 || n < 1) throw ParameterError("total_time needs d >= 1 and N >= 1");
  b.validate();
  return 2.0 * d * b.t_cp + static_cast<double>(n) * (4.0 * b.t_sin + b.t_mea) + 2.0 * b.t_sin;
}

struct JunctionFeasibility {
  SiteId left;
  SiteId right;
  double ratio15 = 0.0;  // |w - w'| / kappa_hop
  double ratio16 = 0.0;  // tau_cha / t_cp
  bool pass = false;
};

struct FeasibilityReport {
  std::vector<JunctionFeasibility> junctions;
  double ratio17 = 0.0;  // tau_pho,min / total_time
  double total_time = 0.0;
  double margin = kDefaultMargin;
  int d = 1;
  long long n = 1;
  // Worst junction per constraint (index into `junctions`, -1 if none).
  int worst15 = -1;
  int worst16 = -1;
  bool pass15 = true;
  bool pass16 = true;
  bool pass17 = true;
  bool pass = true;
};

inline FeasibilityReport check_feasibility(const LatticeSpec& lat, const TimingBudget& budget,
                                           int d, long long n, double margin = kDefaultMargin) {
  if (!(margin >= 1.0)) throw ParameterError("margin must be >= 1");
  budget.validate();
  FeasibilityReport rep;
  rep.margin = margin;
  rep.d = d;
  rep.n = n;
  for (const auto& [key, j] : lat.junctions()) {
    const auto& l = lat.resonator(j.left);
    const auto& r = lat.resonator(j.right);
    const double kappa = hopping_rate(j, l, r);
    JunctionFeasibility row;
    row.left = j.left;
    row.right = j.right;
    row.ratio15 = kappa > 0.0 ? std::abs(l.frequency - r.frequency) / kappa
                              : std::numeric_limits<double>::infinity();
    row.ratio16 = j.coherence_time / budget.t_cp;
    row.pass = row.ratio15 >= margin && row.ratio16 >= margin;
    const int idx = static_cast<int>(rep.junctions.size());
    if (rep.worst15 < 0 || row.ratio15 < rep.junctions[rep.worst15].ratio15) rep.worst15 = idx;
    if (rep.worst16 < 0 || row.ratio16 < rep.junctions[rep.worst16].ratio16) rep.worst16 = idx;
    rep.pass15 = rep.pass15 && row.ratio15 >= margin;
    rep.pass16 = rep.pass16 && row.ratio16 >= margin;
    rep.junctions.push_back(std::move(row));
  }
  double tau_pho = std::numeric_limits<double>::infinity();
  for (const auto& [_, r] : lat.resonators()) tau_pho = std::min(tau_pho, r.photon_lifetime);
  rep.total_time = total_time(d, n, budget);
  rep.ratio17 = tau_pho / rep.total_time;
  rep.pass17 = rep.ratio17 >= margin;
  rep.pass = rep.pass15 && rep.pass16 && rep.pass17;
  return rep;
}

// Largest N with total_time(d, N) <= tau_pho / margin, or 0.
inline long long max_feasible_size(const TimingBudget& b, double tau_pho, int d,
                                   double margin = kDefaultMargin) {
  if (!(margin >= 1.0)) throw ParameterError("margin must be >= 1");
  if (d < 1) throw ParameterError("d must be >= 1");
  b.validate();
  const double limit = tau_pho / margin;
  const double tol = 1e-12 * limit;
  const double per_qubit = 4.0 * b.t_sin + b.t_mea;
  const double fixed = 2.0 * d * b.t_cp + 2.0 * b.t_sin;
  if (fixed + per_qubit > limit + tol) return 0;
  auto n = static_cast<long long>(std::floor((limit - fixed) / per_qubit));
  n = std::max(n, 1LL);
  while (total_time(d, n + 1, b) <= limit + tol) ++n;
  while (n > 0 && total_time(d, n, b) > limit + tol) --n;
  return n;
}

inline nlohmann::json feasibility_json(const FeasibilityReport& rep) {
  using nlohmann::json;
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json rows = json::array();
  for (const auto& j : rep.junctions) {
    rows.push_back({{"junction", junction_label(j.left, j.right)},
                    {"ratio15", num(j.ratio15)},
                    {"ratio16", num(j.ratio16)},
                    {"pass", j.pass}});
  }
  json out = {{"margin", rep.margin},
              {"d", rep.d},
              {"N", rep.n},
              {"total_time_ns", rep.total_time / units::ns},
              {"ratio17", num(rep.ratio17)},
              {"pass_hopping", rep.pass15},
              {"pass_charge_coherence", rep.pass16},
              {"pass_photon_coherence", rep.pass17},
              {"pass", rep.pass},
              {"junctions", rows}};
  if (rep.worst15 >= 0) {
    const auto& w15 = rep.junctions[static_cast<std::size_t>(rep.worst15)];
    const auto& w16 = rep.junctions[static_cast<std::size_t>(rep.worst16)];
    out["worst_ratio15"] = {{"junction", junction_label(w15.left, w15.right)},
                            {"value", num(w15.ratio15)}};
    out["worst_ratio16"] = {{"junction", junction_label(w16.left, w16.right)},
                            {"value", num(w16.ratio16)}};
  }
  return out;
}

inline std::string feasibility_csv(const FeasibilityReport& rep) {
  std::ostringstream os;
  os << "junction,ratio15,ratio16,pass\n";
  for (const auto& j : rep.junctions) {
    os << junction_label(j.left, j.right) << ',' << fmt9(j.ratio15) << ',' << fmt9(j.ratio16)
       << ',' << (j.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

inline std::string feasibility_text(const FeasibilityReport& rep) {
  std::ostringstream os;
  auto verdict = [](bool ok) { return ok ? "pass" : "FAIL"; };
  os << "margin " << fmt9(rep.margin) << ", d = " << rep.d << ", N = " << rep.n << '\n';
  os << "junction              |w-w'|/k_hop   tau_cha/t_cp   status\n";
  for (const auto& j : rep.junctions) {
    char line[128];
    std::snprintf(line, sizeof line, "%-20s  %12s  %13s   %s\n",
                  junction_label(j.left, j.right).c_str(), fmt9(j.ratio15).c_str(),
                  fmt9(j.ratio16).c_str(), verdict(j.pass));
    os << line;
  }
  if (rep.worst15 >= 0) {
    const auto& w15 = rep.junctions[static_cast<std::size_t>(rep.worst15)];
    const auto& w16 = rep.junctions[static_cast<std::size_t>(rep.worst16)];
    os << "hopping suppression   worst " << fmt9(w15.ratio15) << " at "
       << junction_label(w15.left, w15.right) << "  " << verdict(rep.pass15) << '\n';
    os << "charge coherence      worst " << fmt9(w16.ratio16) << " at "
       << junction_label(w16.left, w16.right) << "  " << verdict(rep.pass16) << '\n';
  }
  os << "photon coherence      tau_pho/T = " << fmt9(rep.ratio17) << " (T = "
     << fmt9(rep.total_time / units::ns) << " ns)  " << verdict(rep.pass17) << '\n';
  os << "overall               " << verdict(rep.pass) << '\n';
  return os.str();
}

}  // namespace resq
