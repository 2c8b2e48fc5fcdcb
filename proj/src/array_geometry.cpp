#include "hmimo/array_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hmimo {

void UpaConfig::validate() const {
  if (n_x < 2 || n_y < 2)
    throw std::invalid_argument("UpaConfig: n_x and n_y must be at least 2");
  if (!(spacing > 0.0) || spacing > 0.5)
    throw std::invalid_argument("UpaConfig: spacing must lie in (0, 1/2] wavelengths, got " +
                                std::to_string(spacing));
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw std::invalid_argument("UpaConfig: wavelength must be positive");
}

WavenumberIndexSet::WavenumberIndexSet(UpaConfig config, std::vector<WavenumberIndex> indices)
    : config_(config), indices_(std::move(indices)) {
  if (indices_.empty()) return;
  auto [mnx, mxx] = std::minmax_element(indices_.begin(), indices_.end(),
                                        [](auto& a, auto& b) { return a.lx < b.lx; });
  auto [mny, mxy] = std::minmax_element(indices_.begin(), indices_.end(),
                                        [](auto& a, auto& b) { return a.ly < b.ly; });
  min_x_ = mnx->lx;
  min_y_ = mny->ly;
  span_x_ = mxx->lx - min_x_ + 1;
  span_y_ = mxy->ly - min_y_ + 1;
  lookup_.assign(static_cast<std::size_t>(span_x_) * span_y_, -1);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const auto& w = indices_[i];
    lookup_[static_cast<std::size_t>(w.lx - min_x_) * span_y_ + (w.ly - min_y_)] = static_cast<long>(i);
  }
}

long WavenumberIndexSet::find(int lx, int ly) const {
  const int dx = lx - min_x_;
  const int dy = ly - min_y_;
  if (dx < 0 || dy < 0 || dx >= span_x_ || dy >= span_y_) return -1;
  return lookup_[static_cast<std::size_t>(dx) * span_y_ + dy];
}

bool inside_wavenumber_ellipse(int lx, int ly, double aperture_x, double aperture_y) {
  // (lx/ax)^2 + (ly/ay)^2 <= 1, cleared of denominators.
  const double ax2 = aperture_x * aperture_x;
  const double ay2 = aperture_y * aperture_y;
  return double(lx) * lx * ay2 + double(ly) * ly * ax2 <= ax2 * ay2;
}

WavenumberIndexSet build_index_set(const UpaConfig& cfg) {
  cfg.validate();
  const double ax = cfg.aperture_x();
  const double ay = cfg.aperture_y();
  const int rx = static_cast<int>(std::floor(ax));
  const int ry = static_cast<int>(std::floor(ay));
  std::vector<WavenumberIndex> out;
  out.reserve(static_cast<std::size_t>(std::ceil(kPi * ax * ay)) + 8);
  for (int lx = -rx; lx <= rx; ++lx)
    for (int ly = -ry; ly <= ry; ++ly)
      if (inside_wavenumber_ellipse(lx, ly, ax, ay)) out.push_back({lx, ly});
  return WavenumberIndexSet(cfg, std::move(out));
}

cvec fh_steering_vector(const UpaConfig& cfg, const WavenumberIndex& idx) {
  const double kx = kTwoPi * idx.lx * cfg.spacing / cfg.aperture_x();
  const double ky = kTwoPi * idx.ly * cfg.spacing / cfg.aperture_y();
  cvec a(cfg.element_count());
  for (int nx = 0; nx < cfg.n_x; ++nx)
    for (int ny = 0; ny < cfg.n_y; ++ny)
      a[nx * cfg.n_y + ny] = std::polar(1.0, kx * nx + ky * ny);
  return a;
}

std::size_t antenna_flat_index(const UpaConfig& cfg, int n_x, int n_y) {
  if (n_x < 0 || n_x >= cfg.n_x || n_y < 0 || n_y >= cfg.n_y)
    throw std::out_of_range("antenna index (" + std::to_string(n_x) + ", " + std::to_string(n_y) +
                            ") outside the array");
  return static_cast<std::size_t>(n_x) * cfg.n_y + n_y;
}

std::pair<int, int> antenna_from_flat(const UpaConfig& cfg, std::size_t flat) {
  if (flat >= static_cast<std::size_t>(cfg.element_count()))
    throw std::out_of_range("flat antenna index " + std::to_string(flat) + " outside the array");
  return {static_cast<int>(flat / cfg.n_y), static_cast<int>(flat % cfg.n_y)};
}

}  // namespace hmimo
