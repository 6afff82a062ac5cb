#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "resq/device/lattice.hpp"
#include "resq/errors.hpp"
#include "resq/units.hpp"

namespace resq {

inline constexpr const char* kDeviceSchema = "device-v1";

// Control-electronics values carried alongside the lattice in device files.
struct OperatingPoint {
  double rabi_strength = 4.0 * units::MHz;  // Omega, rad/s
  double kappa_low = 20.0 * units::MHz;     // low-Q readout decay rate, 1/s (angular)
};

struct DeviceFile {
  LatticeSpec lattice;
  OperatingPoint operating;
  DeviceDefaults defaults;
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Field access with path-qualified diagnostics.
class FieldReader {
 public:
  FieldReader(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail("", "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [key, _] : obj_.items()) {
      if (!ok.count(key)) fail(key, "unknown field");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  double number(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  double number_or(const char* key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  double positive(const char* key) const {
    const double x = number(key);
    if (!(x > 0.0)) fail(key, "must be positive");
    return x;
  }

  double positive_or(const char* key, double fallback) const {
    return has(key) ? positive(key) : fallback;
  }

  int integer(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }

  std::string string(const char* key) const {
    const auto& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  SiteId site(const char* key) const { return site_from(at(key), qualified(key)); }

  std::vector<int> int_list(const char* key) const {
    const auto& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail(key, "expected an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  const nlohmann::json& at(const char* key) const {
    if (!obj_.contains(key)) fail(key, "missing required field");
    return obj_.at(key);
  }

  std::string qualified(const std::string& key) const {
    if (path_.empty()) return key;
    return key.empty() ? path_ : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw FormatError("field '" + qualified(key) + "': " + what);
  }

  static SiteId site_from(const nlohmann::json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) {
      throw FormatError("field '" + where + "': expected a site coordinate array");
    }
    SiteId out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) {
        throw FormatError("field '" + where + "': site coordinates must be integers");
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

 private:
  const nlohmann::json& obj_;
  std::string path_;
};

inline DeviceDefaults read_defaults(const FieldReader& r, OperatingPoint& op) {
  r.allow({"epsilon_GHz", "g_MHz", "tau_cha_us", "tau_pho_us", "inner_g_MHz", "inner_tau_us",
           "inner_epsilon_min_GHz", "inner_epsilon_max_GHz", "omega_MHz", "kappa_low_MHz"});
  DeviceDefaults d;
  d.epsilon = r.positive_or("epsilon_GHz", d.epsilon / units::GHz) * units::GHz;
  d.g = r.number_or("g_MHz", d.g / units::MHz) * units::MHz;
  if (d.g < 0.0) r.fail("g_MHz", "must be non-negative");
  d.tau_cha = r.positive_or("tau_cha_us", d.tau_cha / units::us) * units::us;
  d.tau_pho = r.positive_or("tau_pho_us", d.tau_pho / units::us) * units::us;
  d.inner_g = r.positive_or("inner_g_MHz", d.inner_g / units::MHz) * units::MHz;
  d.inner_tau = r.positive_or("inner_tau_us", d.inner_tau / units::us) * units::us;
  d.inner_epsilon_min =
      r.positive_or("inner_epsilon_min_GHz", d.inner_epsilon_min / units::GHz) * units::GHz;
  d.inner_epsilon_max =
      r.positive_or("inner_epsilon_max_GHz", d.inner_epsilon_max / units::GHz) * units::GHz;
  if (d.inner_epsilon_max < d.inner_epsilon_min) {
    r.fail("inner_epsilon_max_GHz", "must not be below inner_epsilon_min_GHz");
  }
  op.rabi_strength = r.number_or("omega_MHz", op.rabi_strength / units::MHz) * units::MHz;
  if (op.rabi_strength < 0.0) r.fail("omega_MHz", "must be non-negative");
  op.kappa_low = r.positive_or("kappa_low_MHz", op.kappa_low / units::MHz) * units::MHz;
  return d;
}

inline LatticeSpec apply_override(const LatticeSpec& lat, const FieldReader& r) {
  const int kinds = int(r.has("site")) + int(r.has("junction")) + int(r.has("inner_qubit"));
  if (kinds != 1) {
    r.fail("", "an override names exactly one of 'site', 'junction' or 'inner_qubit'");
  }
  try {
    if (r.has("site")) {
      r.allow({"site", "w_GHz", "tau_pho_us"});
      ResonatorSpec res = lat.resonator(r.site("site"));
      res.frequency = r.positive_or("w_GHz", res.frequency / units::GHz) * units::GHz;
      res.photon_lifetime = r.positive_or("tau_pho_us", res.photon_lifetime / units::us) * units::us;
      return lat.with_resonator(res);
    }
    if (r.has("junction")) {
      r.allow({"junction", "epsilon_GHz", "g_MHz", "g_left_MHz", "g_right_MHz", "tau_cha_us"});
      const auto& ends = r.at("junction");
      if (!ends.is_array() || ends.size() != 2) {
        r.fail("junction", "expected a pair of site coordinates");
      }
      const SiteId a = FieldReader::site_from(ends[0], r.qualified("junction[0]"));
      const SiteId b = FieldReader::site_from(ends[1], r.qualified("junction[1]"));
      JunctionSpec j = lat.junction(a, b);
      j.epsilon = r.positive_or("epsilon_GHz", j.epsilon / units::GHz) * units::GHz;
      if (r.has("g_MHz")) {
        j.g_left = j.g_right = r.number("g_MHz") * units::MHz;
      }
      // g_left/g_right refer to the w-class and w'-class ends respectively.
      j.g_left = r.number_or("g_left_MHz", j.g_left / units::MHz) * units::MHz;
      j.g_right = r.number_or("g_right_MHz", j.g_right / units::MHz) * units::MHz;
      j.coherence_time = r.positive_or("tau_cha_us", j.coherence_time / units::us) * units::us;
      return lat.with_junction(j);
    }
    r.allow({"inner_qubit", "g_MHz", "tau_us", "epsilon_min_GHz", "epsilon_max_GHz"});
    InnerQubitSpec q = lat.inner_qubit(r.site("inner_qubit"));
    q.coupling = r.positive_or("g_MHz", q.coupling / units::MHz) * units::MHz;
    q.coherence_time = r.positive_or("tau_us", q.coherence_time / units::us) * units::us;
    q.epsilon_min = r.positive_or("epsilon_min_GHz", q.epsilon_min / units::GHz) * units::GHz;
    q.epsilon_max = r.positive_or("epsilon_max_GHz", q.epsilon_max / units::GHz) * units::GHz;
    return lat.with_inner_qubit(q);
  } catch (const LatticeError& e) {
    throw FormatError("field '" + r.qualified("") + "': " + e.what());
  }
}

}  // namespace detail

// Parses a device-v1 document. Syntax errors report line and column; schema
// errors report the offending field path. Both throw FormatError.
inline DeviceFile parse_device(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("malformed JSON at " + detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1) +
                      ": " + e.what());
  }
  const detail::FieldReader root(doc, "");
  root.allow({"schema", "dimension", "extents", "w_GHz", "w_prime_GHz", "defaults", "overrides"});
  if (root.string("schema") != kDeviceSchema) {
    root.fail("schema", std::string("expected \"") + kDeviceSchema + "\"");
  }
  const int d = root.integer("dimension");
  if (d < 1) root.fail("dimension", "must be >= 1");
  const auto extents = root.int_list("extents");
  if (static_cast<int>(extents.size()) != d) root.fail("extents", "length must equal dimension");
  for (int e : extents) {
    if (e < 1) root.fail("extents", "entries must be >= 1");
  }
  const double w = root.positive("w_GHz") * units::GHz;
  const double w_prime = root.positive("w_prime_GHz") * units::GHz;

  DeviceFile out;
  if (root.has("defaults")) {
    out.defaults = detail::read_defaults(detail::FieldReader(root.at("defaults"), "defaults"),
                                         out.operating);
  }
  try {
    out.lattice = build_lattice(d, extents, w, w_prime, out.defaults);
  } catch (const FrequencyError& e) {
    root.fail("w_prime_GHz", e.what());
  }
  if (root.has("overrides")) {
    const auto& list = root.at("overrides");
    if (!list.is_array()) root.fail("overrides", "expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const detail::FieldReader r(list[k], "overrides[" + std::to_string(k) + "]");
      out.lattice = detail::apply_override(out.lattice, r);
    }
  }
  return out;
}

inline DeviceFile load_device(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open device file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_device(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

namespace detail {

inline nlohmann::json site_json(const SiteId& s) { return nlohmann::json(s); }

}  // namespace detail

// Writes a device-v1 document. Every device that differs from the defaults
// becomes an explicit override, so parse_device(to_json(f)) rebuilds f.
inline nlohmann::json device_to_json(const DeviceFile& f) {
  using nlohmann::json;
  const auto& lat = f.lattice;
  const auto sites = lat.sites();
  double w = 0.0;
  double w_prime = 0.0;
  // Class frequencies come from the first site of each class.
  for (const auto& s : sites) {
    double& slot = in_w_class(s) ? w : w_prime;
    if (slot == 0.0) slot = lat.resonator(s).frequency;
  }
  if (w_prime == 0.0) w_prime = w * 1.1;  // single-site lattice: any distinct value

  const auto& d = f.defaults;
  json doc = {
      {"schema", kDeviceSchema},
      {"dimension", lat.dimension()},
      {"extents", lat.extents()},
      {"w_GHz", w / units::GHz},
      {"w_prime_GHz", w_prime / units::GHz},
      {"defaults",
       {{"epsilon_GHz", d.epsilon / units::GHz},
        {"g_MHz", d.g / units::MHz},
        {"tau_cha_us", d.tau_cha / units::us},
        {"tau_pho_us", d.tau_pho / units::us},
        {"inner_g_MHz", d.inner_g / units::MHz},
        {"inner_tau_us", d.inner_tau / units::us},
        {"inner_epsilon_min_GHz", d.inner_epsilon_min / units::GHz},
        {"inner_epsilon_max_GHz", d.inner_epsilon_max / units::GHz},
        {"omega_MHz", f.operating.rabi_strength / units::MHz},
        {"kappa_low_MHz", f.operating.kappa_low / units::MHz}}},
  };
  json overrides = json::array();
  for (const auto& s : sites) {
    const auto& r = lat.resonator(s);
    const double base = in_w_class(s) ? w : w_prime;
    if (r.frequency != base || r.photon_lifetime != d.tau_pho) {
      overrides.push_back({{"site", detail::site_json(s)},
                           {"w_GHz", r.frequency / units::GHz},
                           {"tau_pho_us", r.photon_lifetime / units::us}});
    }
  }
  for (const auto& [key, j] : lat.junctions()) {
    if (j.epsilon != d.epsilon || j.g_left != d.g || j.g_right != d.g ||
        j.coherence_time != d.tau_cha) {
      overrides.push_back({{"junction", {detail::site_json(j.left), detail::site_json(j.right)}},
                           {"epsilon_GHz", j.epsilon / units::GHz},
                           {"g_left_MHz", j.g_left / units::MHz},
                           {"g_right_MHz", j.g_right / units::MHz},
                           {"tau_cha_us", j.coherence_time / units::us}});
    }
  }
  for (const auto& [s, q] : lat.inner_qubits()) {
    if (q.coupling != d.inner_g || q.coherence_time != d.inner_tau ||
        q.epsilon_min != d.inner_epsilon_min || q.epsilon_max != d.inner_epsilon_max) {
      overrides.push_back({{"inner_qubit", detail::site_json(s)},
                           {"g_MHz", q.coupling / units::MHz},
                           {"tau_us", q.coherence_time / units::us},
                           {"epsilon_min_GHz", q.epsilon_min / units::GHz},
                           {"epsilon_max_GHz", q.epsilon_max / units::GHz}});
    }
  }
  if (!overrides.empty()) doc["overrides"] = overrides;
  return doc;
}

}  // namespace resq
