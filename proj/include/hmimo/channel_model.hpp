#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hmimo/array_geometry.hpp"
#include "hmimo/types.hpp"

namespace hmimo {

/// One von Mises-Fisher scattering cluster. Angles in radians; elevation is
/// measured from the array broadside (z axis).
struct ClusterSpec {
  double weight = 1.0;
  double concentration = 1.0;
  double center_elevation = 0.0;
  double center_azimuth = 0.0;
};

struct AngularSpectrum {
  std::vector<ClusterSpec> clusters;

  /// Throws unless weights are nonnegative and sum to 1 (1e-12), and every
  /// concentration is positive.
  void validate() const;
};

double vmf_log_density(double theta, double phi, const ClusterSpec& cluster);
double vmf_density(double theta, double phi, const ClusterSpec& cluster);
double angular_power(double theta, double phi, const AngularSpectrum& spectrum);

/// Half-open box membership of the direction in cell idx:
/// sin(theta)cos(phi) in [lx/ax, (lx+1)/ax), sin(theta)sin(phi) likewise.
bool wavenumber_region_contains(const WavenumberIndex& idx, const UpaConfig& cfg, double theta,
                                double phi);

/// The unique cell holding the direction, whether or not it is in the index set.
WavenumberIndex wavenumber_cell_of(const UpaConfig& cfg, double theta, double phi);

struct HemisphereDirection {
  double theta;
  double phi;
};

inline constexpr std::size_t kMinVarianceSamples = 1000;
inline constexpr std::size_t kSampleChunk = 1 << 16;

/// Uniform directions on the upper hemisphere: cos(theta) ~ U[0,1),
/// phi ~ U[0,2pi). Chunk c of kSampleChunk samples draws from its own stream,
/// so any chunk can be regenerated on its own.
std::vector<HemisphereDirection> hemisphere_samples(std::size_t n, std::uint64_t seed);

struct VarianceProfile {
  WavenumberIndexSet index_set;
  std::vector<double> variances;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;

  double total() const;
};

/// Shared-sample Monte-Carlo estimate of the angular power inside each
/// wavenumber cell. Chunks are processed on up to `threads` workers and
/// reduced in chunk order, so the result does not depend on `threads`.
VarianceProfile integrate_variances(const AngularSpectrum& spectrum, const WavenumberIndexSet& index_set,
                                    std::size_t mc_samples, std::uint64_t seed, unsigned threads = 1);

/// Profile with externally supplied variances (used by tests and the
/// constructed-support scenarios).
VarianceProfile make_profile(const WavenumberIndexSet& index_set, std::vector<double> variances);

void write_variance_csv(std::ostream& os, const VarianceProfile& profile);

struct ChannelRealization {
  cvec spatial;
  cvec wavenumber_coeffs;
  std::uint64_t seed = 0;
};

/// h_l ~ CN(0, variance_l) independently; H = Psi^f h with unit-norm columns.
ChannelRealization draw_channel(const VarianceProfile& profile, const UpaConfig& cfg, std::uint64_t seed);

/// H = Psi^f h for given coefficients.
cvec synthesize_spatial(const UpaConfig& cfg, const WavenumberIndexSet& index_set, const cvec& coeffs);

}  // namespace hmimo
