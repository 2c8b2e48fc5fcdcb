#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "hmimo/types.hpp"

namespace hmimo {

/// Uniform planar array. Element spacing is given in wavelengths, so the
/// wavenumber geometry depends only on (n - 1) * spacing.
struct UpaConfig {
  int n_x = 2;
  int n_y = 2;
  double spacing = 0.5;     // delta / lambda
  double wavelength = 1.0;  // lambda, any length unit

  /// Throws std::invalid_argument unless n_x, n_y >= 2 and 0 < spacing <= 1/2.
  void validate() const;

  int element_count() const { return n_x * n_y; }
  double l_x_len() const { return (n_x - 1) * spacing * wavelength; }
  double l_y_len() const { return (n_y - 1) * spacing * wavelength; }
  /// Apertures measured in wavelengths: L_x / lambda and L_y / lambda.
  double aperture_x() const { return (n_x - 1) * spacing; }
  double aperture_y() const { return (n_y - 1) * spacing; }
};

/// A 2D integer spatial-frequency index. Also used for centered angular
/// (DFT) bin labels.
struct WavenumberIndex {
  int lx = 0;
  int ly = 0;

  friend bool operator==(const WavenumberIndex&, const WavenumberIndex&) = default;
  friend auto operator<=>(const WavenumberIndex&, const WavenumberIndex&) = default;
};

/// All integer pairs inside the elliptic wavenumber support, ordered
/// lexicographically by (lx, ly). The position of an index in this list is
/// its dictionary column and its MRF vertex id.
class WavenumberIndexSet {
 public:
  WavenumberIndexSet() = default;
  WavenumberIndexSet(UpaConfig config, std::vector<WavenumberIndex> indices);

  const UpaConfig& config() const { return config_; }
  const std::vector<WavenumberIndex>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  const WavenumberIndex& operator[](std::size_t i) const { return indices_[i]; }

  /// Position of (lx, ly) in the ordering, or -1 when not a member.
  long find(int lx, int ly) const;
  bool contains(int lx, int ly) const { return find(lx, ly) >= 0; }

 private:
  UpaConfig config_{};
  std::vector<WavenumberIndex> indices_;
  // Dense lookup table over the bounding box of the members.
  int min_x_ = 0, min_y_ = 0, span_x_ = 0, span_y_ = 0;
  std::vector<long> lookup_;
};

/// True when (lx/ax)^2 + (ly/ay)^2 <= 1, with apertures in wavelengths.
bool inside_wavenumber_ellipse(int lx, int ly, double aperture_x, double aperture_y);

WavenumberIndexSet build_index_set(const UpaConfig& cfg);

/// Fourier-harmonic steering vector, one entry per antenna in row-major
/// (n_x, n_y) order: exp{j 2pi (lx delta n_x / L_x + ly delta n_y / L_y)}.
cvec fh_steering_vector(const UpaConfig& cfg, const WavenumberIndex& idx);

/// Row-major antenna flattening: n_x * N_y + n_y.
std::size_t antenna_flat_index(const UpaConfig& cfg, int n_x, int n_y);
std::pair<int, int> antenna_from_flat(const UpaConfig& cfg, std::size_t flat);

}  // namespace hmimo
