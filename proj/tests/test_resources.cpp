#include <gtest/gtest.h>

#include <cmath>

#include "resq/resources/estimator.hpp"

using namespace resq;

namespace {

LatticeSpec nominal_lattice(int n = 4) {
  return build_lattice(2, {n, n}, 6.6 * units::GHz, 7.0 * units::GHz);
}

double ns(double t) { return t / units::ns; }

}  // namespace

TEST(Budget, DerivedFromNominalParameters) {
  const TimingBudget b = derive_budget(nominal_lattice(), 4.0 * units::MHz, 20.0 * units::MHz);
  EXPECT_NEAR(ns(b.t_sin), 2.5, 1e-9);
  EXPECT_NEAR(ns(b.t_cp), 125.0, 1e-9);
  EXPECT_NEAR(ns(b.t_mea), 1e3 / (2.0 * units::pi * 20.0), 1e-9);
  EXPECT_NEAR(ns(b.t_mea), 7.96, 0.01);
  const TimingBudget r = round_budget(b);
  EXPECT_DOUBLE_EQ(ns(r.t_sin), 2.5);
  EXPECT_DOUBLE_EQ(ns(r.t_cp), 125.0);
  EXPECT_DOUBLE_EQ(ns(r.t_mea), 8.0);
}

TEST(Budget, InvalidInputsThrow) {
  EXPECT_THROW(derive_budget(nominal_lattice(), 0.0, 1.0), ParameterError);
  EXPECT_THROW(total_time(1, 1, TimingBudget{0.0, 1.0, 1.0}), ParameterError);
  EXPECT_THROW(total_time(0, 1, nominal_budget()), ParameterError);
}

TEST(TotalTime, CoefficientsByFiniteDifferences) {
  const TimingBudget b = nominal_budget();
  for (int d = 1; d <= 3; ++d) {
    for (long long n = 1; n <= 40; n += 13) {
      EXPECT_NEAR(ns(total_time(d + 1, n, b) - total_time(d, n, b)), 250.0, 1e-9);
      EXPECT_NEAR(ns(total_time(d, n + 1, b) - total_time(d, n, b)), 18.0, 1e-9);
      EXPECT_NEAR(ns(total_time(d, n, b)) - 250.0 * d - 18.0 * n, 5.0, 1e-9);
    }
  }
  // General budget: the slopes are 2 t_cp and 4 t_sin + t_mea.
  const TimingBudget g{1.7e-9, 90e-9, 6.1e-9};
  EXPECT_NEAR(total_time(3, 5, g) - total_time(2, 5, g), 2.0 * g.t_cp, 1e-18);
  EXPECT_NEAR(total_time(3, 6, g) - total_time(3, 5, g), 4.0 * g.t_sin + g.t_mea, 1e-18);
}

TEST(TotalTime, WorkedValues) {
  const TimingBudget b = nominal_budget();
  EXPECT_NEAR(ns(total_time(2, 16, b)), 793.0, 1e-9);
  EXPECT_NEAR(ns(total_time(1, 1, b)), 273.0, 1e-9);
  EXPECT_NEAR(ns(total_time(1, 2, b)), 291.0, 1e-9);
}

TEST(MaxFeasibleSize, WorkedValues) {
  const TimingBudget b = nominal_budget();
  const double tau = 5.0 * units::us;
  EXPECT_EQ(max_feasible_size(b, tau, 2, 5.0), 27);
  EXPECT_EQ(max_feasible_size(b, tau, 2, 10.0), 0);
  EXPECT_EQ(max_feasible_size(b, tau, 1, 1.0), 263);
  EXPECT_THROW(max_feasible_size(b, tau, 2, 0.5), ParameterError);
}

TEST(MaxFeasibleSize, BracketsTheLimitAndIsMonotone) {
  const TimingBudget b = nominal_budget();
  const double tau = 5.0 * units::us;
  long long prev_d = 1 << 30;
  for (int d = 1; d <= 6; ++d) {
    long long prev_m = 1 << 30;
    for (double margin : {1.0, 1.5, 2.0, 3.0, 5.0, 7.5, 10.0}) {
      const long long n = max_feasible_size(b, tau, d, margin);
      EXPECT_LE(n, prev_m);
      prev_m = n;
      if (n > 0) {
        EXPECT_LE(total_time(d, n, b), tau / margin * (1 + 1e-12));
      }
      EXPECT_GT(total_time(d, n + 1, b), tau / margin);
    }
    const long long n5 = max_feasible_size(b, tau, d, 5.0);
    EXPECT_LE(n5, prev_d);
    prev_d = n5;
  }
}

TEST(Feasibility, NominalRatiosAndMargins) {
  const auto lat = nominal_lattice();
  const TimingBudget b = nominal_budget();
  const FeasibilityReport r5 = check_feasibility(lat, b, 2, 16, 5.0);
  ASSERT_EQ(r5.junctions.size(), 24u);
  for (const auto& j : r5.junctions) {
    EXPECT_NEAR(j.ratio15, 400.0 / 20.0, 1e-9);
    EXPECT_NEAR(j.ratio16, 1000.0 / 125.0, 1e-9);
  }
  EXPECT_NEAR(r5.ratio17, 5000.0 / 793.0, 1e-9);
  EXPECT_TRUE(r5.pass);
  const FeasibilityReport r10 = check_feasibility(lat, b, 2, 16, 10.0);
  EXPECT_TRUE(r10.pass15);
  EXPECT_FALSE(r10.pass16);
  EXPECT_FALSE(r10.pass);
  EXPECT_TRUE(check_feasibility(lat, b, 2, 16, 1.0).pass);
  EXPECT_THROW(check_feasibility(lat, b, 2, 16, 0.9), ParameterError);
}

TEST(Feasibility, WorstJunctionIsReported) {
  auto lat = nominal_lattice(3);
  JunctionSpec j = lat.junction({2, 2}, {2, 3});
  j.coherence_time = 0.5 * units::us;
  lat = lat.with_junction(j);
  const FeasibilityReport r = check_feasibility(lat, nominal_budget(), 2, 9);
  ASSERT_GE(r.worst16, 0);
  const auto& w = r.junctions[std::size_t(r.worst16)];
  EXPECT_EQ(w.left, (SiteId{2, 2}));
  EXPECT_NEAR(w.ratio16, 4.0, 1e-9);
  EXPECT_FALSE(r.pass16);
}

TEST(Feasibility, RatiosAreNonNegative) {
  const FeasibilityReport r = check_feasibility(nominal_lattice(3), nominal_budget(), 2, 9);
  for (const auto& j : r.junctions) {
    EXPECT_GE(j.ratio15, 0.0);
    EXPECT_GE(j.ratio16, 0.0);
  }
  EXPECT_GE(r.ratio17, 0.0);
}

TEST(Feasibility, ReportFormats) {
  const FeasibilityReport r = check_feasibility(nominal_lattice(2), nominal_budget(), 2, 4);
  const std::string csv = feasibility_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "junction,ratio15,ratio16,pass");
  EXPECT_NE(csv.find("1:1-1:2,20,8,true"), std::string::npos);
  const auto j = feasibility_json(r);
  EXPECT_EQ(j["junctions"].size(), 4u);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_NE(feasibility_text(r).find("overall               pass"), std::string::npos);
}
