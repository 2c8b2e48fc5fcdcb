#include <algorithm>
#include <cmath>
#include <set>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "hmimo/array_geometry.hpp"
#include "hmimo/graphcut_emrf.hpp"
#include "hmimo/max_flow.hpp"

using namespace hmimo;

namespace {

struct Instance {
  EmrfGraph graph;
  UnaryEnergies unary;
};

// Random vertex subset of a small grid with random energies.
Instance random_instance(std::mt19937_64& eng, int max_vertices) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<WavenumberIndex> cells;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) cells.push_back({a, b});
  std::shuffle(cells.begin(), cells.end(), eng);
  const int n = 1 + static_cast<int>(eng() % static_cast<unsigned>(max_vertices));
  cells.resize(static_cast<std::size_t>(n));
  std::sort(cells.begin(), cells.end());
  Instance in;
  in.graph = build_emrf(cells, 2.0 * u(eng));
  in.unary = {rvec(n), rvec(n)};
  for (int i = 0; i < n; ++i) {
    in.unary.plus[i] = 10.0 * u(eng);
    in.unary.minus[i] = 10.0 * u(eng);
  }
  return in;
}

std::pair<double, SupportVector> brute_force(const EmrfGraph& g, const UnaryEnergies& u) {
  const std::size_t n = g.size();
  double best = std::numeric_limits<double>::infinity();
  SupportVector arg;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    SupportVector v;
    for (std::size_t i = 0; i < n; ++i) v.labels.push_back((m >> i) & 1u ? 1 : -1);
    // Energy evaluated here from first principles, not through total_energy.
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += v.labels[i] > 0 ? u.plus[static_cast<Eigen::Index>(i)] : u.minus[static_cast<Eigen::Index>(i)];
    for (const auto& ed : g.edges)
      if (v.labels[ed.a] != v.labels[ed.b]) e += 2.0 * ed.coupling;
    if (e < best) {
      best = e;
      arg = v;
    }
  }
  return {best, arg};
}

}  // namespace

TEST(MaxFlow, TextbookNetwork) {
  MaxFlow mf(6);
  mf.add_edge(0, 1, 16);
  mf.add_edge(0, 2, 13);
  mf.add_edge(1, 2, 10);
  mf.add_edge(2, 1, 4);
  mf.add_edge(1, 3, 12);
  mf.add_edge(3, 2, 9);
  mf.add_edge(2, 4, 14);
  mf.add_edge(4, 3, 7);
  mf.add_edge(3, 5, 20);
  mf.add_edge(4, 5, 4);
  EXPECT_NEAR(mf.solve(0, 5), 23.0, 1e-12);
  const auto side = mf.source_side();
  EXPECT_TRUE(side[0]);
  EXPECT_FALSE(side[5]);
}

TEST(MaxFlow, RejectsBadInput) {
  EXPECT_THROW(MaxFlow(1), std::invalid_argument);
  MaxFlow mf(3);
  EXPECT_THROW(mf.add_edge(0, 3, 1.0), std::out_of_range);
  EXPECT_THROW(mf.add_edge(0, 1, -1.0), std::invalid_argument);
  EXPECT_THROW(mf.source_side(), std::logic_error);
}

TEST(Emrf, SingleVertexHasNoEdges) { EXPECT_TRUE(build_emrf({{0, 0}}, 1.0).edges.empty()); }

TEST(Emrf, ThirteenIndexEllipse) {
  const auto set = build_index_set(UpaConfig{5, 5, 0.5, 1.0});
  const auto g = build_emrf(set.indices(), 0.5);
  EXPECT_EQ(g.edges.size(), 16u);
  const long origin = set.find(0, 0);
  int degree = 0;
  for (const auto& e : g.edges) degree += (e.a == origin) + (e.b == origin);
  EXPECT_EQ(degree, 4);
}

TEST(Emrf, EdgesAreExactlyUnitL1Pairs) {
  const auto set = build_index_set(UpaConfig{16, 16, 0.25, 1.0});
  const auto& v = set.indices();
  const auto g = build_emrf(v, 0.3);
  std::set<std::pair<int, int>> got;
  for (const auto& e : g.edges) {
    EXPECT_NE(e.a, e.b);
    EXPECT_EQ(e.coupling, 0.3);
    EXPECT_TRUE(got.insert({std::min(e.a, e.b), std::max(e.a, e.b)}).second);
  }
  std::set<std::pair<int, int>> want;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (std::abs(v[i].lx - v[j].lx) + std::abs(v[i].ly - v[j].ly) == 1) want.insert({int(i), int(j)});
  EXPECT_EQ(got, want);
}

TEST(Emrf, Validation) {
  EXPECT_THROW(build_emrf({{0, 0}, {0, 1}}, -0.1), std::invalid_argument);
  EXPECT_THROW(build_emrf({{0, 0}, {0, 0}}, 0.1), std::invalid_argument);
}

TEST(Energy, VertexTerms) {
  VertexEvidence ev{cvec::Zero(1), rvec::Constant(1, 0.3), 0.3};
  EXPECT_DOUBLE_EQ(vertex_energy(ev, 0, 1), vertex_energy(ev, 0, -1));

  ev = {cvec::Constant(1, cplx(0.6, 0.8)), rvec::Constant(1, 1.0), 0.1};
  EXPECT_NEAR(vertex_energy(ev, 0, 1), std::log(kPi) + 1.0, 1e-12);
  EXPECT_NEAR(vertex_energy(ev, 0, -1), std::log(0.1 * kPi) + 10.0, 1e-12);
  EXPECT_NEAR(vertex_energy(ev, 0, 1), 2.1447, 5e-5);
  EXPECT_NEAR(vertex_energy(ev, 0, -1), 8.8421, 5e-5);

  double prev = 0.0;
  for (double mag : {1.0, 10.0, 100.0, 1000.0}) {
    ev.evidence[0] = mag;
    const double gap = vertex_energy(ev, 0, 1) - vertex_energy(ev, 0, -1);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, -1e6);
}

TEST(Energy, EdgeTerms) {
  EXPECT_EQ(edge_energy(0.5, 1, 1), 0.0);
  EXPECT_EQ(edge_energy(0.5, -1, -1), 0.0);
  EXPECT_EQ(edge_energy(0.5, 1, -1), 1.0);
  EXPECT_EQ(edge_energy(0.5, -1, 1), edge_energy(0.5, 1, -1));
}

TEST(Energy, UniformLabelsHaveNoEdgeCost) {
  const auto set = build_index_set(UpaConfig{5, 5, 0.5, 1.0});
  const auto g = build_emrf(set.indices(), 0.7);
  const VertexEvidence ev{cvec::Zero(13), rvec::Constant(13, 0.2), 0.2};
  for (int label : {1, -1}) {
    double want = 0.0;
    for (std::size_t i = 0; i < 13; ++i) want += vertex_energy(ev, i, label);
    EXPECT_NEAR(total_energy(g, ev, SupportVector::all(13, label)), want, 1e-12);
    EXPECT_NEAR(want, 13 * std::log(kPi * 0.2), 1e-12);
  }
}

TEST(Energy, SingleFlipLocality) {
  const auto set = build_index_set(UpaConfig{5, 5, 0.5, 1.0});
  const auto g = build_emrf(set.indices(), 0.4);
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  UnaryEnergies un{rvec(13), rvec(13)};
  SupportVector v;
  for (int i = 0; i < 13; ++i) {
    un.plus[i] = 5 * u(eng);
    un.minus[i] = 5 * u(eng);
    v.labels.push_back(u(eng) < 0.5 ? 1 : -1);
  }
  const int flip = static_cast<int>(set.find(0, 0));
  auto disagree = [&](const SupportVector& s) {
    int n = 0;
    for (const auto& e : g.edges)
      if ((e.a == flip || e.b == flip) && s.labels[e.a] != s.labels[e.b]) ++n;
    return n;
  };
  SupportVector w = v;
  w.labels[flip] = -w.labels[flip];
  auto d = [&](const SupportVector& s) { return s.labels[flip] > 0 ? un.plus[flip] : un.minus[flip]; };
  const double want = d(w) - d(v) + 2 * 0.4 * (disagree(w) - disagree(v));
  EXPECT_NEAR(total_energy(g, un, w) - total_energy(g, un, v), want, 1e-12);
}

TEST(MinCut, TwoVertexChain) {
  const auto g = build_emrf({{0, 0}, {0, 1}}, 1.0);
  UnaryEnergies u{rvec(2), rvec(2)};
  u.plus << 0, 3;
  u.minus << 3, 0;
  const auto v = min_cut_support(g, u);
  EXPECT_EQ(v.labels, (std::vector<int>{1, -1}));
  EXPECT_NEAR(total_energy(g, u, v), 2.0, 1e-12);
  EXPECT_NEAR(brute_force(g, u).first, 2.0, 1e-12);
}

TEST(MinCut, ZeroCouplingSeparates) {
  std::mt19937_64 eng(11);
  for (int t = 0; t < 20; ++t) {
    auto in = random_instance(eng, 12);
    for (auto& e : in.graph.edges) e.coupling = 0.0;
    const auto v = min_cut_support(in.graph, in.unary);
    for (std::size_t i = 0; i < in.graph.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (in.unary.plus[k] < in.unary.minus[k]) EXPECT_EQ(v.labels[i], 1);
      if (in.unary.plus[k] > in.unary.minus[k]) EXPECT_EQ(v.labels[i], -1);
    }
  }
}

TEST(MinCut, MatchesBruteForce) {
  std::mt19937_64 eng(2024);
  for (int t = 0; t < 100; ++t) {
    const auto in = random_instance(eng, 12);
    const auto v = min_cut_support(in.graph, in.unary);
    EXPECT_NEAR(total_energy(in.graph, in.unary, v), brute_force(in.graph, in.unary).first, 1e-9) << t;
  }
}

TEST(MinCut, StrongCouplingGivesUniformLabels) {
  std::mt19937_64 eng(5);
  // Connected 3x4 block so a large eta can tie everything together.
  std::vector<WavenumberIndex> cells;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 4; ++b) cells.push_back({a, b});
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 20; ++t) {
    UnaryEnergies un{rvec(12), rvec(12)};
    double spread = 0.0;
    for (int i = 0; i < 12; ++i) {
      un.plus[i] = u(eng);
      un.minus[i] = u(eng);
      spread += std::abs(un.plus[i] - un.minus[i]);
    }
    const auto g = build_emrf(cells, spread);
    const auto v = min_cut_support(g, un);
    const int want = un.plus.sum() <= un.minus.sum() ? 1 : -1;
    for (int l : v.labels) EXPECT_EQ(l, want);
  }
}

TEST(MinCut, ShiftInvariance) {
  std::mt19937_64 eng(8);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int t = 0; t < 30; ++t) {
    auto in = random_instance(eng, 12);
    const auto v = min_cut_support(in.graph, in.unary);
    for (Eigen::Index i = 0; i < in.unary.plus.size(); ++i) {
      const double c = u(eng);
      in.unary.plus[i] += c;
      in.unary.minus[i] += c;
    }
    const auto w = min_cut_support(in.graph, in.unary);
    EXPECT_NEAR(total_energy(in.graph, in.unary, w), total_energy(in.graph, in.unary, v), 1e-9);
  }
}

TEST(MinCut, LocallyAndSampledOptimalAtDeskScale) {
  const auto set = build_index_set(UpaConfig{16, 16, 0.25, 1.0});
  const auto g = build_emrf(set.indices(), 0.6);
  const auto n = static_cast<Eigen::Index>(set.size());
  std::mt19937_64 eng(77);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  UnaryEnergies un{rvec(n), rvec(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    un.plus[i] = u(eng);
    un.minus[i] = u(eng);
  }
  const auto v = min_cut_support(g, un);
  const double e = total_energy(g, un, v);
  for (Eigen::Index i = 0; i < n; ++i) {
    SupportVector w = v;
    w.labels[i] = -w.labels[i];
    EXPECT_GE(total_energy(g, un, w), e - 1e-9);
  }
  for (int t = 0; t < 10000; ++t) {
    SupportVector w;
    for (Eigen::Index i = 0; i < n; ++i) w.labels.push_back(eng() & 1u ? 1 : -1);
    ASSERT_GE(total_energy(g, un, w), e - 1e-9);
  }
}

TEST(MinCut, EvidenceOverload) {
  const auto g = build_emrf({{0, 0}, {0, 1}, {0, 2}}, 0.0);
  VertexEvidence ev{cvec(3), rvec::Constant(3, 4.0), 0.5};
  ev.evidence << 3.0, 0.1, 2.5;
  const auto v = min_cut_support(g, ev);
  EXPECT_EQ(v.labels, (std::vector<int>{1, -1, 1}));
}

TEST(MinCut, FlowNetworkDump) {
  const auto g = build_emrf({{0, 0}, {0, 1}}, 1.0);
  UnaryEnergies u{rvec(2), rvec(2)};
  u.plus << 0, 3;
  u.minus << 3, 0;
  std::ostringstream os;
  write_flow_network(os, g, u);
  EXPECT_EQ(os.str(), "2 0 3\n0 3 0\n2 1 0\n1 3 3\n0 1 2\n1 0 2\n");
}
