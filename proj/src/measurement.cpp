#include "hmimo/measurement.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hmimo/random.hpp"

namespace hmimo {

Combiner build_combiner(const UpaConfig& cfg, const CombinerConfig& ccfg) {
  cfg.validate();
  if (ccfg.n_feeds < 1) throw std::invalid_argument("CombinerConfig: n_feeds must be at least 1");
  const int nf = ccfg.n_feeds;
  const int n = cfg.element_count();
  Rng rng(ccfg.seed);

  // Draw order is fixed (A, P row-major, M) so overrides do not shift P.
  Combiner c;
  c.feed_gains.resize(nf);
  for (int r = 0; r < nf; ++r) c.feed_gains[r] = rng.unit_phase();
  c.phases.resize(nf, n);
  for (int r = 0; r < nf; ++r)
    for (int k = 0; k < n; ++k) c.phases(r, k) = rng.unit_phase();
  c.amplitudes.resize(n);
  for (int k = 0; k < n; ++k) c.amplitudes[k] = rng.uniform();

  if (ccfg.unit_feed_gains) c.feed_gains.setOnes();
  if (ccfg.unit_amplitudes) c.amplitudes.setOnes();

  c.matrix = c.feed_gains.asDiagonal() * c.phases * c.amplitudes.cast<cplx>().asDiagonal();
  return c;
}

std::string_view to_string(SnrConvention c) { return c == SnrConvention::total ? "total" : "per_feed"; }

SnrConvention parse_snr_convention(std::string_view s) {
  if (s == "total") return SnrConvention::total;
  if (s == "per_feed") return SnrConvention::per_feed;
  throw std::invalid_argument("unknown SNR convention '" + std::string(s) + "'");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

Observation observe(const cmat& combiner, const ChannelRealization& realization, double snr_db, std::uint64_t seed,
                    SnrConvention convention) {
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("observe: SNR must be finite or +inf");
  if (combiner.cols() != realization.spatial.size())
    throw std::invalid_argument("observe: combiner width does not match the channel length");

  Observation obs;
  obs.pilot_symbol = cplx(1.0, 0.0);
  const cvec signal = combiner * realization.spatial * obs.pilot_symbol;
  obs.y = signal;
  obs.snr_linear = db_to_linear(snr_db);
  const double energy = signal.squaredNorm();
  obs.zero_signal = energy == 0.0;
  if (std::isinf(snr_db)) return obs;

  double var = energy / obs.snr_linear;
  if (convention == SnrConvention::per_feed) var /= static_cast<double>(signal.size());
  obs.noise_variance = var;
  if (var == 0.0) return obs;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < obs.y.size(); ++i) obs.y[i] += rng.complex_normal(var);
  return obs;
}

}  // namespace hmimo
