#pragma once

#include <string_view>
#include <vector>

#include "hmimo/array_geometry.hpp"
#include "hmimo/types.hpp"

namespace hmimo {

enum class Domain { angular, wavenumber };

std::string_view to_string(Domain d);
Domain parse_domain(std::string_view s);

/// N x M matrix with unit-norm columns and one 2D label per column.
///
/// Angular labels are centered DFT bins n' in [-floor(N_x/2), N_x - floor(N_x/2))
/// (likewise for y), ordered lexicographically. Because the DFT phase is
/// periodic in n', a centered label and its unshifted counterpart
/// n' mod N_x name the same column.
struct Dictionary {
  cmat matrix;
  Domain domain = Domain::wavenumber;
  std::vector<WavenumberIndex> labels;
  UpaConfig config;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

/// Bytes needed to hold an N x M complex double matrix.
double dictionary_bytes(Eigen::Index n, Eigen::Index m);

Dictionary angular_dictionary(const UpaConfig& cfg);
Dictionary wavenumber_dictionary(const UpaConfig& cfg, const WavenumberIndexSet& index_set);

/// Centered angular labels in column order.
std::vector<WavenumberIndex> angular_labels(const UpaConfig& cfg);

/// sin(n gamma / 2) / (n sin(gamma / 2)), equal to +-1 where the denominator vanishes.
double dirichlet_kernel(int n_points, double gamma);

/// Probability 1 - 2 delta / lambda that an FH index misses its DFT sample.
double mismatch_probability(double spacing);

/// N / L = lambda^2 / (pi delta^2).
double dimensionality_ratio(double spacing);

cvec to_spatial(const Dictionary& dict, const cvec& coeffs);

/// Least-squares coefficients (minimum-norm when rank deficient).
cvec project(const Dictionary& dict, const cvec& spatial);

/// Fraction of sum |c|^2 held by the k largest-magnitude entries.
double captured_power_fraction(const cvec& coeffs, std::size_t k);

}  // namespace hmimo
