#include "hmimo/channel_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "hmimo/numeric.hpp"
#include "hmimo/random.hpp"

namespace hmimo {

void AngularSpectrum::validate() const {
  if (clusters.empty()) throw std::invalid_argument("AngularSpectrum: no clusters");
  CompensatedSum total;
  for (const auto& c : clusters) {
    if (!(c.weight >= 0.0)) throw std::invalid_argument("AngularSpectrum: negative cluster weight");
    if (!(c.concentration > 0.0)) throw std::invalid_argument("AngularSpectrum: concentration must be positive");
    total.add(c.weight);
  }
  if (std::abs(total.value() - 1.0) > 1e-12)
    throw std::invalid_argument(fmt::format("AngularSpectrum: weights sum to {}, expected 1", total.value()));
}

namespace {

// log(a / sinh a) + a, continuous down to a = 0.
double log_peak_factor(double a) {
  if (a < 1e-4) return a - a * a / 6.0 + a * a * a * a / 180.0;
  return std::log(2.0 * a) - std::log1p(-std::exp(-2.0 * a));
}

}  // namespace

double vmf_log_density(double theta, double phi, const ClusterSpec& c) {
  // 1 - cos of the angular distance in haversine form, exact at the center.
  const double st = std::sin(0.5 * (theta - c.center_elevation));
  const double sp = std::sin(0.5 * (phi - c.center_azimuth));
  const double one_minus_cos = 2.0 * (st * st + std::sin(theta) * std::sin(c.center_elevation) * sp * sp);
  return log_peak_factor(c.concentration) - std::log(4.0 * kPi) - c.concentration * one_minus_cos;
}

double vmf_density(double theta, double phi, const ClusterSpec& c) { return std::exp(vmf_log_density(theta, phi, c)); }

double angular_power(double theta, double phi, const AngularSpectrum& spectrum) {
  double s = 0.0;
  for (const auto& c : spectrum.clusters) s += c.weight * vmf_density(theta, phi, c);
  return s;
}

namespace {

bool in_cell_1d(double u, int l, double aperture) {
  return u >= static_cast<double>(l) / aperture && u < static_cast<double>(l + 1) / aperture;
}

int cell_1d(double u, double aperture) {
  int l = static_cast<int>(std::floor(u * aperture));
  // floor(u * a) can disagree with the division-based predicate by one ulp.
  if (u < static_cast<double>(l) / aperture) --l;
  if (u >= static_cast<double>(l + 1) / aperture) ++l;
  return l;
}

}  // namespace

bool wavenumber_region_contains(const WavenumberIndex& idx, const UpaConfig& cfg, double theta, double phi) {
  const double s = std::sin(theta);
  return in_cell_1d(s * std::cos(phi), idx.lx, cfg.aperture_x()) &&
         in_cell_1d(s * std::sin(phi), idx.ly, cfg.aperture_y());
}

WavenumberIndex wavenumber_cell_of(const UpaConfig& cfg, double theta, double phi) {
  const double s = std::sin(theta);
  return {cell_1d(s * std::cos(phi), cfg.aperture_x()), cell_1d(s * std::sin(phi), cfg.aperture_y())};
}

namespace {

std::size_t chunk_count(std::size_t n) { return (n + kSampleChunk - 1) / kSampleChunk; }

template <class F>
void for_each_chunk_sample(std::size_t n, std::uint64_t seed, std::size_t chunk, F&& f) {
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::variance_samples), chunk}));
  const std::size_t begin = chunk * kSampleChunk;
  const std::size_t end = std::min(n, begin + kSampleChunk);
  for (std::size_t i = begin; i < end; ++i) {
    const double cos_theta = rng.uniform();
    const double phi = kTwoPi * rng.uniform();
    f(HemisphereDirection{std::acos(cos_theta), phi});
  }
}

}  // namespace

std::vector<HemisphereDirection> hemisphere_samples(std::size_t n, std::uint64_t seed) {
  std::vector<HemisphereDirection> out;
  out.reserve(n);
  for (std::size_t c = 0; c < chunk_count(n); ++c)
    for_each_chunk_sample(n, seed, c, [&](const HemisphereDirection& d) { out.push_back(d); });
  return out;
}

double VarianceProfile::total() const {
  CompensatedSum s;
  for (double v : variances) s.add(v);
  return s.value();
}

VarianceProfile integrate_variances(const AngularSpectrum& spectrum, const WavenumberIndexSet& index_set,
                                    std::size_t mc_samples, std::uint64_t seed, unsigned threads) {
  if (mc_samples < kMinVarianceSamples)
    throw std::invalid_argument(
        fmt::format("integrate_variances: need at least {} samples, got {}", kMinVarianceSamples, mc_samples));
  spectrum.validate();
  const UpaConfig& cfg = index_set.config();
  const std::size_t n_chunks = chunk_count(mc_samples);
  const std::size_t L = index_set.size();
  std::vector<std::vector<CompensatedSum>> partial(n_chunks, std::vector<CompensatedSum>(L));

  auto work = [&](std::size_t chunk) {
    auto& acc = partial[chunk];
    for_each_chunk_sample(mc_samples, seed, chunk, [&](const HemisphereDirection& d) {
      const WavenumberIndex cell = wavenumber_cell_of(cfg, d.theta, d.phi);
      const long k = index_set.find(cell.lx, cell.ly);
      if (k >= 0) acc[static_cast<std::size_t>(k)].add(angular_power(d.theta, d.phi, spectrum));
    });
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_chunks)));
  if (threads == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) work(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < n_chunks; c = next++) work(c);
      });
    for (auto& th : pool) th.join();
  }

  VarianceProfile out;
  out.index_set = index_set;
  out.mc_samples = mc_samples;
  out.seed = seed;
  out.variances.assign(L, 0.0);
  const double scale = kTwoPi / static_cast<double>(mc_samples);
  for (std::size_t l = 0; l < L; ++l) {
    CompensatedSum s;
    for (std::size_t c = 0; c < n_chunks; ++c) s.add(partial[c][l]);
    out.variances[l] = s.value() * scale;
  }
  return out;
}

VarianceProfile make_profile(const WavenumberIndexSet& index_set, std::vector<double> variances) {
  if (variances.size() != index_set.size())
    throw std::invalid_argument(fmt::format("make_profile: {} variances for {} indices", variances.size(),
                                            index_set.size()));
  for (double v : variances)
    if (!(v >= 0.0)) throw std::invalid_argument("make_profile: variances must be nonnegative");
  VarianceProfile p;
  p.index_set = index_set;
  p.variances = std::move(variances);
  return p;
}

void write_variance_csv(std::ostream& os, const VarianceProfile& profile) {
  os << "lx,ly,variance\n";
  for (std::size_t l = 0; l < profile.index_set.size(); ++l)
    os << fmt::format("{},{},{:.17g}\n", profile.index_set[l].lx, profile.index_set[l].ly, profile.variances[l]);
}

cvec synthesize_spatial(const UpaConfig& cfg, const WavenumberIndexSet& index_set, const cvec& coeffs) {
  if (static_cast<std::size_t>(coeffs.size()) != index_set.size())
    throw std::invalid_argument("synthesize_spatial: coefficient count does not match the index set");
  const double norm = 1.0 / std::sqrt(static_cast<double>(cfg.element_count()));
  cvec h = cvec::Zero(cfg.element_count());
  for (std::size_t l = 0; l < index_set.size(); ++l) {
    if (coeffs[l] == cplx(0.0, 0.0)) continue;
    h += (coeffs[l] * norm) * fh_steering_vector(cfg, index_set[l]);
  }
  return h;
}

ChannelRealization draw_channel(const VarianceProfile& profile, const UpaConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t L = profile.index_set.size();
  ChannelRealization out;
  out.seed = seed;
  out.wavenumber_coeffs.resize(static_cast<Eigen::Index>(L));
  for (std::size_t l = 0; l < L; ++l) out.wavenumber_coeffs[l] = rng.complex_normal(profile.variances[l]);
  out.spatial = synthesize_spatial(cfg, profile.index_set, out.wavenumber_coeffs);
  return out;
}

}  // namespace hmimo
