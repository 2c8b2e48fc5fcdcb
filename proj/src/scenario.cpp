#include "hmimo/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace hmimo {

using nlohmann::json;

std::string_view to_string(DomainSelection d) {
  switch (d) {
    case DomainSelection::angular: return "angular";
    case DomainSelection::wavenumber: return "wavenumber";
    case DomainSelection::both: return "both";
  }
  return "?";
}

std::string_view to_string(EstimatorKind e) { return e == EstimatorKind::gcse ? "gcse" : "omp"; }
std::string_view to_string(ChannelKind c) { return c == ChannelKind::clustered ? "clustered" : "block"; }

DomainSelection parse_domain_selection(std::string_view s) {
  if (s == "angular") return DomainSelection::angular;
  if (s == "wavenumber") return DomainSelection::wavenumber;
  if (s == "both") return DomainSelection::both;
  throw std::invalid_argument(fmt::format("unknown domain '{}' (angular, wavenumber, both)", s));
}

EstimatorKind parse_estimator(std::string_view s) {
  if (s == "gcse") return EstimatorKind::gcse;
  if (s == "omp") return EstimatorKind::omp;
  throw std::invalid_argument(fmt::format("unknown estimator '{}' (gcse, omp)", s));
}

ChannelKind parse_channel_kind(std::string_view s) {
  if (s == "clustered") return ChannelKind::clustered;
  if (s == "block") return ChannelKind::block;
  throw std::invalid_argument(fmt::format("unknown channel kind '{}' (clustered, block)", s));
}

std::vector<Domain> expand(DomainSelection d) {
  switch (d) {
    case DomainSelection::angular: return {Domain::angular};
    case DomainSelection::wavenumber: return {Domain::wavenumber};
    case DomainSelection::both: return {Domain::angular, Domain::wavenumber};
  }
  return {};
}

void Scenario::validate() const {
  array.validate();
  spectrum.validate();
  if (combiner.n_feeds < 1) throw std::invalid_argument("scenario: n_feeds must be at least 1");
  if (snr_grid_db.empty()) throw std::invalid_argument("scenario: empty SNR grid");
  for (double s : snr_grid_db)
    if (std::isnan(s) || s == -std::numeric_limits<double>::infinity())
      throw std::invalid_argument("scenario: SNR values must be finite or +inf");
  if (seeds.empty()) throw std::invalid_argument("scenario: empty seed list");
  if (estimators.empty()) throw std::invalid_argument("scenario: no estimators selected");
  if (gcse.max_iters < 1 || gcse.sparsity < 1 || !(gcse.eta >= 0.0) || !(gcse.residual_tol >= 0.0))
    throw std::invalid_argument("scenario: invalid gcse parameters");
  if (omp.sparsity < 1 || !(omp.residual_tol >= 0.0)) throw std::invalid_argument("scenario: invalid omp parameters");
  if (mc_samples < kMinVarianceSamples)
    throw std::invalid_argument(fmt::format("scenario: mc_samples must be at least {}", kMinVarianceSamples));
  if (channel == ChannelKind::block && block_size < 1) throw std::invalid_argument("scenario: block_size must be positive");
}

namespace {

constexpr double kDeg = kPi / 180.0;

AngularSpectrum four_clusters(double concentration) {
  AngularSpectrum s;
  const double centers[4][2] = {{20, 30}, {35, 150}, {25, 250}, {45, 320}};
  for (const auto& c : centers) s.clusters.push_back({0.25, concentration, c[0] * kDeg, c[1] * kDeg});
  return s;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = first + i;
  return out;
}

}  // namespace

Scenario desk_preset() {
  Scenario s;
  s.name = "desk";
  s.array = {16, 16, 0.25, 1.0};
  s.spectrum = four_clusters(300.0);
  s.combiner.n_feeds = 64;
  s.gcse = GcseConfig{};
  s.gcse.max_iters = 10;
  s.gcse.sparsity = 24;
  s.gcse.eta = 0.25;
  s.omp = {24, 0.0};
  s.snr_grid_db = {0, 5, 10, 15, 20};
  s.seeds = seed_range(1000, 20);
  s.mc_samples = 1000000;
  s.variance_seed = 1;
  return s;
}

Scenario paper_preset() {
  Scenario s = desk_preset();
  s.name = "paper";
  const double wavelength = 299792458.0 / 7e9;
  s.array = {129, 129, 0.25, wavelength};
  s.combiner.n_feeds = 1000;
  s.gcse.max_iters = 20;
  s.gcse.sparsity = 200;
  s.omp.sparsity = 200;
  s.mc_samples = 10000000;
  return s;
}

Scenario preset(std::string_view name) {
  if (name == "desk") return desk_preset();
  if (name == "paper") return paper_preset();
  throw std::invalid_argument(fmt::format("unknown preset '{}' (desk, paper)", name));
}

namespace {

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw std::invalid_argument(fmt::format("config: '{}' must be an object", where));
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw std::invalid_argument(fmt::format("config: unknown key '{}' in {}", it.key(), where));
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

double snr_from_json(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "+inf"))
    return std::numeric_limits<double>::infinity();
  throw std::invalid_argument("config: SNR entries must be numbers or \"inf\"");
}

}  // namespace

void apply_json(Scenario& s, const json& j) {
  check_keys(j, "top level",
             {"preset", "name", "array", "clusters", "combiner", "gcse", "omp", "snr_db", "seeds", "domain", "estimators",
              "channel", "variance", "snr_convention", "threads", "memory_limit_gb"});
  read(j, "name", s.name);
  if (j.contains("array")) {
    const json& a = j["array"];
    check_keys(a, "array", {"n_x", "n_y", "spacing", "wavelength", "frequency_hz"});
    read(a, "n_x", s.array.n_x);
    read(a, "n_y", s.array.n_y);
    read(a, "spacing", s.array.spacing);
    read(a, "wavelength", s.array.wavelength);
    if (a.contains("frequency_hz")) s.array.wavelength = 299792458.0 / a["frequency_hz"].get<double>();
  }
  if (j.contains("clusters")) {
    s.spectrum.clusters.clear();
    for (const json& c : j["clusters"]) {
      check_keys(c, "cluster", {"weight", "concentration", "theta_deg", "phi_deg"});
      ClusterSpec cs;
      cs.weight = c.at("weight").get<double>();
      cs.concentration = c.at("concentration").get<double>();
      cs.center_elevation = c.at("theta_deg").get<double>() * kDeg;
      cs.center_azimuth = c.at("phi_deg").get<double>() * kDeg;
      s.spectrum.clusters.push_back(cs);
    }
  }
  if (j.contains("combiner")) {
    const json& c = j["combiner"];
    check_keys(c, "combiner", {"n_feeds", "unit_feed_gains", "unit_amplitudes"});
    read(c, "n_feeds", s.combiner.n_feeds);
    read(c, "unit_feed_gains", s.combiner.unit_feed_gains);
    read(c, "unit_amplitudes", s.combiner.unit_amplitudes);
  }
  if (j.contains("gcse")) {
    const json& g = j["gcse"];
    check_keys(g, "gcse", {"max_iters", "residual_tol", "sparsity", "eta", "variance_mode", "literal_evidence"});
    read(g, "max_iters", s.gcse.max_iters);
    read(g, "residual_tol", s.gcse.residual_tol);
    read(g, "sparsity", s.gcse.sparsity);
    read(g, "eta", s.gcse.eta);
    read(g, "literal_evidence", s.gcse.literal_evidence);
    if (g.contains("variance_mode")) s.gcse.variance_mode = parse_variance_mode(g["variance_mode"].get<std::string>());
  }
  if (j.contains("omp")) {
    const json& o = j["omp"];
    check_keys(o, "omp", {"sparsity", "residual_tol"});
    read(o, "sparsity", s.omp.sparsity);
    read(o, "residual_tol", s.omp.residual_tol);
  }
  if (j.contains("snr_db")) {
    s.snr_grid_db.clear();
    for (const json& v : j["snr_db"]) s.snr_grid_db.push_back(snr_from_json(v));
  }
  if (j.contains("seeds")) {
    const json& v = j["seeds"];
    if (v.is_array()) {
      s.seeds = v.get<std::vector<std::uint64_t>>();
    } else {
      check_keys(v, "seeds", {"first", "count"});
      s.seeds = seed_range(v.at("first").get<std::uint64_t>(), v.at("count").get<std::size_t>());
    }
  }
  if (j.contains("domain")) s.domain = parse_domain_selection(j["domain"].get<std::string>());
  if (j.contains("estimators")) {
    s.estimators.clear();
    for (const json& e : j["estimators"]) s.estimators.push_back(parse_estimator(e.get<std::string>()));
  }
  if (j.contains("channel")) {
    const json& c = j["channel"];
    check_keys(c, "channel", {"kind", "block_size"});
    if (c.contains("kind")) s.channel = parse_channel_kind(c["kind"].get<std::string>());
    read(c, "block_size", s.block_size);
  }
  if (j.contains("variance")) {
    const json& v = j["variance"];
    check_keys(v, "variance", {"mc_samples", "seed"});
    read(v, "mc_samples", s.mc_samples);
    read(v, "seed", s.variance_seed);
  }
  if (j.contains("snr_convention")) s.snr_convention = parse_snr_convention(j["snr_convention"].get<std::string>());
  read(j, "threads", s.threads);
  if (j.contains("memory_limit_gb")) s.memory_limit_bytes = j["memory_limit_gb"].get<double>() * 1e9;
}

Scenario load_scenario(const std::filesystem::path& path, std::string_view fallback_preset) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open config '{}'", path.string()));
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(fmt::format("config '{}': {}", path.string(), e.what()));
  }
  Scenario s = preset(j.contains("preset") ? j["preset"].get<std::string>() : std::string(fallback_preset));
  try {
    apply_json(s, j);
  } catch (const json::exception& e) {
    throw std::runtime_error(fmt::format("config '{}': {}", path.string(), e.what()));
  }
  s.validate();
  return s;
}

std::string format_snr(double snr_db) {
  if (std::isinf(snr_db)) return snr_db > 0 ? "inf" : "-inf";
  return fmt::format("{}", snr_db);
}

json to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["array"] = {{"n_x", s.array.n_x}, {"n_y", s.array.n_y}, {"spacing", s.array.spacing}, {"wavelength", s.array.wavelength}};
  j["clusters"] = json::array();
  for (const auto& c : s.spectrum.clusters)
    j["clusters"].push_back({{"weight", c.weight},
                             {"concentration", c.concentration},
                             {"theta_deg", c.center_elevation / kDeg},
                             {"phi_deg", c.center_azimuth / kDeg}});
  j["combiner"] = {{"n_feeds", s.combiner.n_feeds},
                   {"unit_feed_gains", s.combiner.unit_feed_gains},
                   {"unit_amplitudes", s.combiner.unit_amplitudes}};
  j["gcse"] = {{"max_iters", s.gcse.max_iters},
               {"residual_tol", s.gcse.residual_tol},
               {"sparsity", s.gcse.sparsity},
               {"eta", s.gcse.eta},
               {"variance_mode", std::string(to_string(s.gcse.variance_mode))},
               {"literal_evidence", s.gcse.literal_evidence}};
  j["omp"] = {{"sparsity", s.omp.sparsity}, {"residual_tol", s.omp.residual_tol}};
  j["snr_db"] = json::array();
  for (double v : s.snr_grid_db) {
    if (std::isinf(v))
      j["snr_db"].push_back("inf");
    else
      j["snr_db"].push_back(v);
  }
  j["seeds"] = s.seeds;
  j["domain"] = std::string(to_string(s.domain));
  j["estimators"] = json::array();
  for (auto e : s.estimators) j["estimators"].push_back(std::string(to_string(e)));
  j["channel"] = {{"kind", std::string(to_string(s.channel))}, {"block_size", s.block_size}};
  j["variance"] = {{"mc_samples", s.mc_samples}, {"seed", s.variance_seed}};
  j["snr_convention"] = std::string(to_string(s.snr_convention));
  return j;
}

}  // namespace hmimo
