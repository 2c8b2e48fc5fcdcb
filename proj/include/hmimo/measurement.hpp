#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

#include "hmimo/array_geometry.hpp"
#include "hmimo/channel_model.hpp"
#include "hmimo/types.hpp"

namespace hmimo {

struct CombinerConfig {
  int n_feeds = 1;
  std::uint64_t seed = 0;
  // Debug overrides: replace the random factor with all ones.
  bool unit_feed_gains = false;   // A
  bool unit_amplitudes = false;   // M
};

/// C = diag(A) P diag(M), kept alongside its factors.
struct Combiner {
  cvec feed_gains;  // A, length N_f, unit modulus
  cmat phases;      // P, N_f x N, unit modulus
  rvec amplitudes;  // M, length N, in [0, 1]
  cmat matrix;      // C
};

Combiner build_combiner(const UpaConfig& cfg, const CombinerConfig& ccfg);

/// How the noise variance follows from the target SNR.
///  total:    sigma^2 = ||C H||^2 / snr
///  per_feed: sigma^2 = ||C H||^2 / (N_f snr)
enum class SnrConvention { total, per_feed };

std::string_view to_string(SnrConvention c);
SnrConvention parse_snr_convention(std::string_view s);

struct Observation {
  cvec y;
  double noise_variance = 0.0;
  double snr_linear = 0.0;
  cplx pilot_symbol{1.0, 0.0};
  /// Set when the channel is zero, so the noise variance collapsed to 0.
  bool zero_signal = false;
};

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

/// y = C H x + n with x = 1 and n ~ CN(0, sigma^2 I). snr_db = +inf disables noise.
Observation observe(const cmat& combiner, const ChannelRealization& realization, double snr_db, std::uint64_t seed,
                    SnrConvention convention = SnrConvention::total);

double db_to_linear(double db);

}  // namespace hmimo
