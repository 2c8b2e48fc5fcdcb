#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "hmimo/channel_model.hpp"
#include "hmimo/dictionaries.hpp"
#include "hmimo/random.hpp"

using namespace hmimo;

namespace {

UpaConfig square(int n, double spacing) { return UpaConfig{n, n, spacing, 1.0}; }

double closed_form_dirichlet(int n, double g) { return std::sin(n * g / 2) / (n * std::sin(g / 2)); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

}  // namespace

TEST(AngularDictionary, Unitary) {
  for (auto c : {square(4, 0.25), UpaConfig{6, 5, 0.25, 1.0}, square(16, 0.25)}) {
    const auto d = angular_dictionary(c);
    const Eigen::Index n = c.element_count();
    ASSERT_EQ(d.cols(), n);
    EXPECT_LT((d.matrix * d.matrix.adjoint() - cmat::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(AngularDictionary, ZeroBinIsConstant) {
  const auto c = square(8, 0.25);
  const auto d = angular_dictionary(c);
  const auto it = std::find(d.labels.begin(), d.labels.end(), WavenumberIndex{0, 0});
  ASSERT_NE(it, d.labels.end());
  const auto col = d.matrix.col(it - d.labels.begin());
  for (Eigen::Index i = 0; i < col.size(); ++i) EXPECT_NEAR(std::abs(col[i] - cplx(1.0 / 8.0, 0.0)), 0.0, 1e-15);
}

TEST(AngularDictionary, TwoByTwoIsDft) {
  const auto d = angular_dictionary(square(2, 0.5));
  ASSERT_EQ(d.labels.size(), 4u);
  for (int r = 0; r < 4; ++r) {
    const int nx = r / 2, ny = r % 2;
    for (int c = 0; c < 4; ++c) {
      const int kx = d.labels[c].lx, ky = d.labels[c].ly;
      const double want = ((nx * kx + ny * ky) % 2 == 0 ? 0.5 : -0.5);
      EXPECT_NEAR(d.matrix(r, c).real(), want, 1e-15);
      EXPECT_NEAR(d.matrix(r, c).imag(), 0.0, 1e-15);
    }
  }
}

TEST(AngularDictionary, CenteredLabels) {
  const auto l = angular_labels(UpaConfig{4, 5, 0.25, 1.0});
  ASSERT_EQ(l.size(), 20u);
  EXPECT_EQ(l.front(), (WavenumberIndex{-2, -2}));
  EXPECT_EQ(l.back(), (WavenumberIndex{1, 2}));
  EXPECT_TRUE(std::is_sorted(l.begin(), l.end()));
}

TEST(WavenumberDictionary, UnitColumnsAndCount) {
  const auto c = square(16, 0.25);
  const auto set = build_index_set(c);
  const auto d = wavenumber_dictionary(c, set);
  EXPECT_EQ(static_cast<std::size_t>(d.cols()), set.size());
  EXPECT_EQ(d.labels, set.indices());
  for (Eigen::Index j = 0; j < d.cols(); ++j) EXPECT_NEAR(d.matrix.col(j).norm(), 1.0, 1e-12);
}

TEST(WavenumberDictionary, ColumnCountNearEllipseArea) {
  const auto c = square(65, 0.25);
  const auto d = wavenumber_dictionary(c, build_index_set(c));
  const double approx = std::floor(kPi * 16.0 * 16.0);
  EXPECT_LT(std::abs(static_cast<double>(d.cols()) - approx) / approx, 0.05);
}

TEST(WavenumberDictionary, GramMatchesDirichletProduct) {
  for (auto c : {square(16, 0.25), UpaConfig{12, 9, 0.2, 1.0}}) {
    const auto set = build_index_set(c);
    const auto d = wavenumber_dictionary(c, set);
    const cmat g = d.matrix.adjoint() * d.matrix;
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t j = 0; j < set.size(); ++j) {
        if (i == j) continue;
        const double gx = 2 * kPi * c.spacing * (set[j].lx - set[i].lx) / c.aperture_x();
        const double gy = 2 * kPi * c.spacing * (set[j].ly - set[i].ly) / c.aperture_y();
        const double want = std::abs(dirichlet_kernel(c.n_x, gx) * dirichlet_kernel(c.n_y, gy));
        EXPECT_NEAR(std::abs(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))), want, 1e-10);
      }
  }
}

TEST(WavenumberDictionary, NearAlignmentAtHalfWavelength) {
  const auto c = square(8, 0.5);
  const auto w = wavenumber_dictionary(c, build_index_set(c));
  const auto a = angular_dictionary(c);
  const Eigen::MatrixXd cross = (a.matrix.adjoint() * w.matrix).cwiseAbs();
  for (Eigen::Index l = 0; l < w.cols(); ++l) EXPECT_GE(cross.col(l).maxCoeff(), 1.0 - 5.0 / c.n_x) << l;
}

TEST(Dirichlet, PeakAndZeros) {
  for (int n : {1, 3, 8, 16}) EXPECT_DOUBLE_EQ(dirichlet_kernel(n, 0.0), 1.0);
  for (int n : {3, 8, 16})
    for (int k = 1; k < n; ++k) EXPECT_NEAR(dirichlet_kernel(n, 2 * kPi * k / n), 0.0, 1e-14);
}

TEST(Dirichlet, KnownValue) {
  EXPECT_NEAR(dirichlet_kernel(8, -kPi / 8), std::sin(-kPi / 2) / (8 * std::sin(-kPi / 16)), 1e-15);
  EXPECT_NEAR(dirichlet_kernel(8, -kPi / 8), 0.6407, 5e-5);
}

TEST(Dirichlet, BoundedAndContinuous) {
  for (int n : {2, 5, 8})
    for (double g = -7.0; g <= 7.0; g += 0.01) {
      const double v = dirichlet_kernel(n, g);
      EXPECT_LE(std::abs(v), 1.0 + 1e-12);
      if (std::abs(std::sin(g / 2)) > 1e-3) {
        EXPECT_NEAR(v, closed_form_dirichlet(n, g), 1e-12);
      }
    }
  // Periodic peaks at 2 pi k take the limiting value.
  EXPECT_NEAR(dirichlet_kernel(8, 2 * kPi), closed_form_dirichlet(8, 2 * kPi + 1e-7), 1e-6);
  EXPECT_NEAR(dirichlet_kernel(7, 2 * kPi), closed_form_dirichlet(7, 2 * kPi + 1e-7), 1e-6);
  EXPECT_THROW(dirichlet_kernel(0, 1.0), std::invalid_argument);
}

TEST(Leakage, MismatchProbability) {
  EXPECT_EQ(mismatch_probability(0.5), 0.0);
  EXPECT_EQ(mismatch_probability(0.25), 0.5);
  EXPECT_EQ(mismatch_probability(0.125), 0.75);
  EXPECT_THROW(mismatch_probability(0.0), std::invalid_argument);
  EXPECT_THROW(mismatch_probability(0.6), std::invalid_argument);
}

TEST(Leakage, DimensionalityRatio) {
  EXPECT_NEAR(dimensionality_ratio(0.5), 4 / kPi, 1e-15);
  EXPECT_NEAR(dimensionality_ratio(0.25), 16 / kPi, 1e-14);
  EXPECT_NEAR(dimensionality_ratio(0.125), 64 / kPi, 1e-13);
  EXPECT_NEAR(dimensionality_ratio(0.5), 1.273, 5e-4);
  EXPECT_NEAR(dimensionality_ratio(0.25), 5.093, 5e-4);
  EXPECT_NEAR(dimensionality_ratio(0.125), 20.37, 5e-3);
}

TEST(Leakage, RatioMatchesLargeArrayCounts) {
  const auto c = square(129, 0.25);
  const double n = c.element_count();
  const double l = static_cast<double>(build_index_set(c).size());
  EXPECT_NEAR(n / l / dimensionality_ratio(0.25), 1.0, 0.03);
}

TEST(Transforms, AngularRoundTrip) {
  const auto c = square(8, 0.25);
  const auto d = angular_dictionary(c);
  Rng rng(3);
  cvec h(c.element_count());
  for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = rng.complex_normal(1.0);
  EXPECT_LT((to_spatial(d, project(d, h)) - h).norm(), 1e-10);
}

TEST(Transforms, WavenumberRecovery) {
  const auto c = square(16, 0.25);
  const auto d = wavenumber_dictionary(c, build_index_set(c));
  Rng rng(4);
  cvec h(d.cols());
  for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = rng.complex_normal(1.0);
  EXPECT_LT((project(d, to_spatial(d, h)) - h).norm(), 1e-8);
}

TEST(Transforms, ZeroAndShapes) {
  const auto c = square(4, 0.25);
  const auto d = angular_dictionary(c);
  EXPECT_EQ(to_spatial(d, cvec::Zero(16)).norm(), 0.0);
  EXPECT_THROW(to_spatial(d, cvec::Zero(15)), std::invalid_argument);
  EXPECT_THROW(project(d, cvec::Zero(17)), std::invalid_argument);
}

TEST(Transforms, CapturedPowerFraction) {
  cvec v(4);
  v << cplx(3, 0), cplx(0, 1), cplx(0, 0), cplx(1, 1);  // powers 9, 1, 0, 2
  EXPECT_DOUBLE_EQ(captured_power_fraction(v, 1), 9.0 / 12.0);
  EXPECT_DOUBLE_EQ(captured_power_fraction(v, 2), 11.0 / 12.0);
  EXPECT_DOUBLE_EQ(captured_power_fraction(v, 10), 1.0);
  EXPECT_EQ(captured_power_fraction(cvec::Zero(3), 1), 0.0);
}

TEST(Transforms, WavenumberConcentratesClusteredPower) {
  const auto c = square(16, 0.25);
  const auto set = build_index_set(c);
  AngularSpectrum spec;
  const double deg = kPi / 180;
  for (auto [t, p] : {std::pair{20.0, 30.0}, {35.0, 150.0}, {25.0, 250.0}, {45.0, 320.0}})
    spec.clusters.push_back({0.25, 300.0, t * deg, p * deg});
  const auto prof = integrate_variances(spec, set, 200000, 1);
  const double total = prof.total();
  const auto k = static_cast<std::size_t>(
      std::count_if(prof.variances.begin(), prof.variances.end(), [&](double v) { return v >= 0.01 * total; }));
  const auto wd = wavenumber_dictionary(c, set);
  const auto ad = angular_dictionary(c);
  std::vector<double> wf, af;
  for (int s = 0; s < 20; ++s) {
    const auto ch = draw_channel(prof, c, 500 + s);
    wf.push_back(captured_power_fraction(project(wd, ch.spatial), k));
    af.push_back(captured_power_fraction(project(ad, ch.spatial), k));
  }
  EXPECT_GT(median(wf), median(af));
}
