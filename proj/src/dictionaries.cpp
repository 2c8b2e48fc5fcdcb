#include "hmimo/dictionaries.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace hmimo {

std::string_view to_string(Domain d) { return d == Domain::angular ? "angular" : "wavenumber"; }

Domain parse_domain(std::string_view s) {
  if (s == "angular") return Domain::angular;
  if (s == "wavenumber") return Domain::wavenumber;
  throw std::invalid_argument("unknown domain '" + std::string(s) + "'");
}

double dictionary_bytes(Eigen::Index n, Eigen::Index m) {
  return static_cast<double>(n) * static_cast<double>(m) * sizeof(cplx);
}

std::vector<WavenumberIndex> angular_labels(const UpaConfig& cfg) {
  std::vector<WavenumberIndex> labels;
  labels.reserve(cfg.element_count());
  for (int a = -(cfg.n_x / 2); a < cfg.n_x - cfg.n_x / 2; ++a)
    for (int b = -(cfg.n_y / 2); b < cfg.n_y - cfg.n_y / 2; ++b) labels.push_back({a, b});
  return labels;
}

namespace {

// Column of exp{j(kx n_x + ky n_y)} / sqrt(N), row-major over antennas.
void fill_plane_wave(const UpaConfig& cfg, double kx, double ky, double norm, Eigen::Ref<cvec> col) {
  for (int nx = 0; nx < cfg.n_x; ++nx)
    for (int ny = 0; ny < cfg.n_y; ++ny) col[nx * cfg.n_y + ny] = std::polar(norm, kx * nx + ky * ny);
}

}  // namespace

Dictionary angular_dictionary(const UpaConfig& cfg) {
  cfg.validate();
  Dictionary d;
  d.domain = Domain::angular;
  d.config = cfg;
  d.labels = angular_labels(cfg);
  const int N = cfg.element_count();
  const double norm = 1.0 / std::sqrt(static_cast<double>(N));
  d.matrix.resize(N, N);
  for (int c = 0; c < N; ++c) {
    // Reduce to the unshifted bin so the phase argument stays small.
    const int ux = (d.labels[c].lx + cfg.n_x) % cfg.n_x;
    const int uy = (d.labels[c].ly + cfg.n_y) % cfg.n_y;
    fill_plane_wave(cfg, kTwoPi * ux / cfg.n_x, kTwoPi * uy / cfg.n_y, norm, d.matrix.col(c));
  }
  return d;
}

Dictionary wavenumber_dictionary(const UpaConfig& cfg, const WavenumberIndexSet& index_set) {
  cfg.validate();
  Dictionary d;
  d.domain = Domain::wavenumber;
  d.config = cfg;
  d.labels = index_set.indices();
  const int N = cfg.element_count();
  const double norm = 1.0 / std::sqrt(static_cast<double>(N));
  d.matrix.resize(N, static_cast<Eigen::Index>(index_set.size()));
  for (std::size_t c = 0; c < index_set.size(); ++c) {
    const auto& l = index_set[c];
    fill_plane_wave(cfg, kTwoPi * l.lx * cfg.spacing / cfg.aperture_x(), kTwoPi * l.ly * cfg.spacing / cfg.aperture_y(),
                    norm, d.matrix.col(static_cast<Eigen::Index>(c)));
  }
  return d;
}

double dirichlet_kernel(int n_points, double gamma) {
  if (n_points < 1) throw std::invalid_argument("dirichlet_kernel: n_points must be positive");
  const double half = gamma / 2.0;
  const double den = n_points * std::sin(half);
  if (std::abs(den) < 1e-12) return std::cos(n_points * half) / std::cos(half);
  return std::sin(n_points * half) / den;
}

namespace {

void check_spacing(double spacing) {
  if (!(spacing > 0.0) || spacing > 0.5)
    throw std::invalid_argument(fmt::format("spacing must lie in (0, 1/2] wavelengths, got {}", spacing));
}

}  // namespace

double mismatch_probability(double spacing) {
  check_spacing(spacing);
  return 1.0 - 2.0 * spacing;
}

double dimensionality_ratio(double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("dimensionality_ratio: spacing must be positive");
  return 1.0 / (kPi * spacing * spacing);
}

cvec to_spatial(const Dictionary& dict, const cvec& coeffs) {
  if (coeffs.size() != dict.cols())
    throw std::invalid_argument(fmt::format("to_spatial: {} coefficients for {} columns", coeffs.size(), dict.cols()));
  return dict.matrix * coeffs;
}

cvec project(const Dictionary& dict, const cvec& spatial) {
  if (spatial.size() != dict.rows())
    throw std::invalid_argument(fmt::format("project: vector length {} for {} rows", spatial.size(), dict.rows()));
  if (dict.domain == Domain::angular) return dict.matrix.adjoint() * spatial;
  return dict.matrix.completeOrthogonalDecomposition().solve(spatial);
}

double captured_power_fraction(const cvec& coeffs, std::size_t k) {
  std::vector<double> p(static_cast<std::size_t>(coeffs.size()));
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) p[i] = std::norm(coeffs[i]);
  double total = 0.0;
  for (double v : p) total += v;
  if (total == 0.0) return 0.0;
  k = std::min(k, p.size());
  std::partial_sort(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(k), p.end(), std::greater<>());
  double top = 0.0;
  for (std::size_t i = 0; i < k; ++i) top += p[i];
  return top / total;
}

}  // namespace hmimo
