#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "resq/device/device_io.hpp"
#include "resq/device/dispersive.hpp"
#include "resq/warnings.hpp"

using namespace resq;

namespace {

constexpr double kW = 6.6 * units::GHz;
constexpr double kWp = 7.0 * units::GHz;

LatticeSpec pair_lattice(DeviceDefaults d = {}) { return build_lattice(1, {2}, kW, kWp, d); }

// Second-order shift g^2/Delta in MHz, evaluated from plain numbers.
double shift_mhz(double g_mhz, double delta_mhz) { return g_mhz * g_mhz / delta_mhz; }

// Collects warnings for the lifetime of the object.
struct WarningCapture {
  std::vector<std::string> seen;
  WarningSink previous;
  WarningCapture() {
    previous = set_warning_sink([this](const std::string& m) { seen.push_back(m); });
  }
  ~WarningCapture() { set_warning_sink(previous); }
};

}  // namespace

TEST(Lattice, ChainAlternatesFrequencies) {
  const auto lat = build_lattice(1, {3}, kW, kWp);
  EXPECT_EQ(lat.resonator({1}).frequency, kW);
  EXPECT_EQ(lat.resonator({2}).frequency, kWp);
  EXPECT_EQ(lat.resonator({3}).frequency, kW);
  EXPECT_EQ(lat.junctions().size(), 2u);
}

TEST(Lattice, SquareCheckerboard) {
  const auto lat = build_lattice(2, {2, 2}, kW, kWp);
  EXPECT_EQ(lat.resonator({1, 1}).frequency, kW);
  EXPECT_EQ(lat.resonator({2, 2}).frequency, kW);
  EXPECT_EQ(lat.resonator({1, 2}).frequency, kWp);
  EXPECT_EQ(lat.resonator({2, 1}).frequency, kWp);
  EXPECT_EQ(lat.junctions().size(), 4u);
}

TEST(Lattice, SquareJunctionCount) {
  for (int n = 1; n <= 7; ++n) {
    const auto lat = build_lattice(2, {n, n}, kW, kWp);
    EXPECT_EQ(lat.junctions().size(), static_cast<std::size_t>(2 * n * (n - 1))) << "n=" << n;
  }
  EXPECT_EQ(build_lattice(2, {3, 3}, kW, kWp).junctions().size(), 12u);
}

TEST(Lattice, RandomExtentsSatisfyInvariants) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> ext(1, 5);
  std::uniform_int_distribution<int> dim(1, 3);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = dim(rng);
    std::vector<int> e(static_cast<std::size_t>(d));
    std::size_t sites = 1;
    std::size_t edges = 0;
    for (auto& x : e) x = ext(rng);
    for (int k = 0; k < d; ++k) sites *= static_cast<std::size_t>(e[k]);
    for (int k = 0; k < d; ++k) edges += sites / e[k] * (e[k] - 1);
    const auto lat = build_lattice(d, e, kW, kWp);
    EXPECT_EQ(lat.site_count(), sites);
    EXPECT_EQ(lat.junctions().size(), edges);
    for (const auto& s : lat.sites()) {
      for (const auto& n : lat.neighbors(s)) {
        EXPECT_NE(lat.resonator(s).frequency, lat.resonator(n).frequency);
      }
    }
    EXPECT_NO_THROW(lat.validate());
  }
}

TEST(Lattice, EqualFrequenciesRejected) {
  EXPECT_THROW(build_lattice(1, {2}, kW, kW), FrequencyError);
}

TEST(Lattice, BadExtentsRejected) {
  EXPECT_THROW(build_lattice(2, {3}, kW, kWp), LatticeError);
  EXPECT_THROW(build_lattice(1, {0}, kW, kWp), LatticeError);
}

TEST(Lattice, JunctionLookupInEitherOrder) {
  const auto lat = build_lattice(2, {2, 2}, kW, kWp);
  const auto& a = lat.junction({1, 2}, {1, 1});
  const auto& b = lat.junction({1, 1}, {1, 2});
  EXPECT_EQ(&a, &b);
  EXPECT_EQ(a.left, (SiteId{1, 1}));  // w-class end on the left
  EXPECT_THROW(lat.junction({1, 1}, {2, 2}), LatticeError);
}

TEST(Lattice, WithJunctionSwapsCouplingsForReversedEnds) {
  const auto lat = pair_lattice();
  JunctionSpec j = lat.junction({1}, {2});
  std::swap(j.left, j.right);
  j.g_left = 150.0 * units::MHz;  // belongs to site 2 now
  j.g_right = 250.0 * units::MHz;
  const auto out = lat.with_junction(j);
  const auto& stored = out.junction({1}, {2});
  EXPECT_EQ(stored.left, SiteId{1});
  EXPECT_DOUBLE_EQ(stored.g_left, 250.0 * units::MHz);
  EXPECT_DOUBLE_EQ(stored.g_right, 150.0 * units::MHz);
}

TEST(Lattice, ValidateCatchesEqualNeighbours) {
  const auto lat = pair_lattice();
  ResonatorSpec r = lat.resonator({2});
  r.frequency = kW;
  EXPECT_THROW(lat.with_resonator(r), LatticeError);
}

TEST(Dispersive, StarkShiftedFrequencies) {
  const auto lat = pair_lattice();
  const auto& j = lat.junction({1}, {2});
  const double s_l = shift_mhz(200, 8600 - 6600);  // 20
  const double s_r = shift_mhz(200, 8600 - 7000);  // 25
  const double e11 = stark_shifted_frequency(lat, j, 1, 1) / units::MHz;
  const double e00 = stark_shifted_frequency(lat, j, 0, 0) / units::MHz;
  EXPECT_NEAR(e11, 8600 + 3 * s_l + 3 * s_r, 8735 * 1e-9);
  EXPECT_NEAR(e11, 8735.0, 8735 * 1e-9);
  EXPECT_NEAR(e00, 8645.0, 8645 * 1e-9);
}

TEST(Dispersive, ZeroCouplingLeavesBareFrequency) {
  DeviceDefaults d;
  d.g = 0.0;
  const auto lat = pair_lattice(d);
  const auto& j = lat.junction({1}, {2});
  for (int n = 0; n <= 2; ++n) {
    EXPECT_EQ(stark_shifted_frequency(lat, j, n, 2 - n), j.epsilon);
  }
  EXPECT_EQ(hopping_rate(lat, j), 0.0);
}

TEST(Dispersive, SelectivityGapQuotedValue) {
  const auto lat = pair_lattice();
  EXPECT_NEAR(selectivity_gap(lat, lat.junction({1}, {2})) / units::MHz, 40.0, 40.0 * 1e-9);
}

TEST(Dispersive, SelectivityGapSymmetricCase) {
  // epsilon - w = epsilon - w' cannot hold on a lattice; place w' above epsilon.
  const double delta = 1.5 * units::GHz;
  const double eps = 8.6 * units::GHz;
  const ResonatorSpec l{{1}, eps - delta, 5e-6};
  const ResonatorSpec r{{2}, eps - delta * (1.0 + 1e-12), 5e-6};
  const double g = 150.0 * units::MHz;
  const JunctionSpec j{{1}, {2}, eps, g, g, 1e-6};
  EXPECT_NEAR(selectivity_gap(j, l, r), 2.0 * g * g / delta, 1e-6 * 2.0 * g * g / delta);
}

TEST(Dispersive, GapScalesWithCouplingSquared) {
  const auto lat = pair_lattice();
  JunctionSpec j = lat.junction({1}, {2});
  const auto& l = lat.resonator({1});
  const auto& r = lat.resonator({2});
  const double base = selectivity_gap(j, l, r);
  j.g_left *= 2.0;
  j.g_right *= 2.0;
  WarningCapture quiet;
  EXPECT_NEAR(selectivity_gap(j, l, r), 4.0 * base, 1e-9 * base);
}

TEST(Dispersive, HoppingRateAndRatio) {
  const auto lat = pair_lattice();
  const auto& j = lat.junction({1}, {2});
  EXPECT_NEAR(hopping_rate(lat, j) / units::MHz, 20.0, 1e-9);
  EXPECT_NEAR((kWp - kW) / hopping_rate(lat, j), 20.0, 1e-9);
  // Average of the two one-sided rates: (20 + 25) / 2.
  EXPECT_NEAR(symmetric_hopping_rate(j, lat.resonator({1}), lat.resonator({2})) / units::MHz, 22.5,
              1e-9);
}

TEST(Dispersive, ResonantMediatorThrows) {
  const auto lat = pair_lattice();
  JunctionSpec j = lat.junction({1}, {2});
  j.epsilon = kW;
  EXPECT_THROW(stark_shifted_frequency(j, lat.resonator({1}), lat.resonator({2}), 1, 1),
               ResonanceError);
}

TEST(Dispersive, WeakDispersionWarns) {
  const auto lat = pair_lattice();
  JunctionSpec j = lat.junction({1}, {2});
  j.epsilon = 7.5 * units::GHz;  // g / Delta_r = 0.4
  WarningCapture cap;
  stark_shifted_frequency(j, lat.resonator({1}), lat.resonator({2}), 1, 1);
  ASSERT_FALSE(cap.seen.empty());
  EXPECT_NE(cap.seen.front().find("dispersive"), std::string::npos);
}

TEST(DeviceIo, ParsesSampleWithDefaults) {
  const DeviceFile f = load_device(std::string(RESQ_SAMPLES_DIR) + "/device_4x4.json");
  EXPECT_EQ(f.lattice.site_count(), 16u);
  EXPECT_EQ(f.lattice.junctions().size(), 24u);
  EXPECT_DOUBLE_EQ(f.operating.rabi_strength, 4.0 * units::MHz);
  EXPECT_DOUBLE_EQ(f.operating.kappa_low, 20.0 * units::MHz);
  EXPECT_DOUBLE_EQ(f.lattice.junction({1, 1}, {1, 2}).coherence_time, 1.0 * units::us);
}

TEST(DeviceIo, OverridesApply) {
  const DeviceFile f = load_device(std::string(RESQ_SAMPLES_DIR) + "/device_2x2.json");
  EXPECT_DOUBLE_EQ(f.lattice.junction({1, 1}, {1, 2}).coherence_time, 1.2 * units::us);
  EXPECT_DOUBLE_EQ(f.lattice.junction({1, 1}, {2, 1}).coherence_time, 1.0 * units::us);
  EXPECT_DOUBLE_EQ(f.lattice.resonator({2, 2}).photon_lifetime, 6.0 * units::us);
}

TEST(DeviceIo, RoundTripThroughJson) {
  DeviceFile f = load_device(std::string(RESQ_SAMPLES_DIR) + "/device_2x2.json");
  JunctionSpec j = f.lattice.junction({2, 2}, {2, 1});
  j.g_left = 180.0 * units::MHz;
  f.lattice = f.lattice.with_junction(j);
  const DeviceFile back = parse_device(device_to_json(f).dump());
  for (const auto& [key, a] : f.lattice.junctions()) {
    const auto& b = back.lattice.junctions().at(key);
    EXPECT_NEAR(a.g_left, b.g_left, 1e-6);
    EXPECT_NEAR(a.g_right, b.g_right, 1e-6);
    EXPECT_NEAR(a.coherence_time, b.coherence_time, 1e-18);
    EXPECT_NEAR(a.epsilon, b.epsilon, 1e-3);
  }
  for (const auto& [site, a] : f.lattice.resonators()) {
    EXPECT_NEAR(a.frequency, back.lattice.resonator(site).frequency, 1e-3);
    EXPECT_NEAR(a.photon_lifetime, back.lattice.resonator(site).photon_lifetime, 1e-18);
  }
}

TEST(DeviceIo, SyntaxErrorReportsLineAndColumn) {
  try {
    parse_device("{\n  \"schema\": \"device-v1\",\n  \"dimension\": ,\n}");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(DeviceIo, FieldErrorsNameTheField) {
  const std::string base =
      R"({"schema": "device-v1", "dimension": 1, "extents": [2], "w_GHz": 6.6, "w_prime_GHz": 7.0)";
  auto expect_field = [&](const std::string& tail, const std::string& field) {
    try {
      parse_device(base + tail);
      FAIL() << "expected FormatError for " << tail;
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  expect_field(R"(, "defaults": {"g_MHz": "x"}})", "defaults.g_MHz");
  expect_field(R"(, "defaults": {"tau_cha_us": -1}})", "defaults.tau_cha_us");
  expect_field(R"(, "colour": 1})", "colour");
  expect_field(R"(, "overrides": [{"site": [9]}]})", "overrides[0]");
  expect_field(R"(, "overrides": [{"junction": [[1], [2]], "bogus": 1}]})", "bogus");
  EXPECT_THROW(parse_device(R"({"schema": "device-v2"})"), FormatError);
  EXPECT_THROW(parse_device(R"({"schema": "device-v1", "dimension": 1, "extents": [2], "w_GHz": 7, "w_prime_GHz": 7})"),
               FormatError);
}
