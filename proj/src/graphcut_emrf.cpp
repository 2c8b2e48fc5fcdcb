#include "hmimo/graphcut_emrf.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "hmimo/max_flow.hpp"

namespace hmimo {

EmrfGraph build_emrf(const std::vector<WavenumberIndex>& vertices, double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("build_emrf: eta must be nonnegative");
  std::map<WavenumberIndex, int> pos;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (!pos.emplace(vertices[i], static_cast<int>(i)).second)
      throw std::invalid_argument(
          fmt::format("build_emrf: duplicate vertex ({}, {})", vertices[i].lx, vertices[i].ly));
  EmrfGraph g;
  g.vertices = vertices;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto& v = vertices[i];
    for (const WavenumberIndex nb : {WavenumberIndex{v.lx + 1, v.ly}, WavenumberIndex{v.lx, v.ly + 1}}) {
      auto it = pos.find(nb);
      if (it != pos.end()) g.edges.push_back({static_cast<int>(i), it->second, eta});
    }
  }
  return g;
}

std::size_t SupportVector::count_positive() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

double vertex_energy(const VertexEvidence& ev, std::size_t vertex, int label) {
  const double s = label > 0 ? ev.sigma_sq[static_cast<Eigen::Index>(vertex)] : ev.eps_sq;
  return std::log(kPi * s) + std::norm(ev.evidence[static_cast<Eigen::Index>(vertex)]) / s;
}

UnaryEnergies vertex_energies(const VertexEvidence& ev) {
  if (!(ev.eps_sq > 0.0)) throw std::invalid_argument("VertexEvidence: eps_sq must be positive");
  if (ev.sigma_sq.size() != ev.evidence.size())
    throw std::invalid_argument("VertexEvidence: sigma_sq and evidence lengths differ");
  const Eigen::Index n = ev.evidence.size();
  UnaryEnergies u{rvec(n), rvec(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(ev.sigma_sq[i] > 0.0)) throw std::invalid_argument("VertexEvidence: sigma_sq must be positive");
    u.plus[i] = vertex_energy(ev, static_cast<std::size_t>(i), +1);
    u.minus[i] = vertex_energy(ev, static_cast<std::size_t>(i), -1);
  }
  return u;
}

double edge_energy(double eta, int label_a, int label_b) { return -eta * (label_a * label_b - 1); }

double total_energy(const EmrfGraph& graph, const UnaryEnergies& unary, const SupportVector& v) {
  if (v.labels.size() != graph.size()) throw std::invalid_argument("total_energy: label count mismatch");
  double e = 0.0;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    e += v.labels[i] > 0 ? unary.plus[k] : unary.minus[k];
  }
  for (const auto& ed : graph.edges) e += edge_energy(ed.coupling, v.labels[ed.a], v.labels[ed.b]);
  return e;
}

double total_energy(const EmrfGraph& graph, const VertexEvidence& ev, const SupportVector& v) {
  return total_energy(graph, vertex_energies(ev), v);
}

namespace {

struct Terminal {
  double to_source;  // paid when the vertex ends on the sink side (label -1)
  double to_sink;    // paid when the vertex stays on the source side (label +1)
};

Terminal terminal_caps(const UnaryEnergies& u, Eigen::Index i) {
  const double m = std::min(u.plus[i], u.minus[i]);
  Terminal t{u.minus[i] - m, u.plus[i] - m};
  assert(t.to_source >= 0.0 && t.to_sink >= 0.0);
  return t;
}

void check_sizes(const EmrfGraph& graph, const UnaryEnergies& u) {
  if (static_cast<std::size_t>(u.plus.size()) != graph.size() || static_cast<std::size_t>(u.minus.size()) != graph.size())
    throw std::invalid_argument("min_cut_support: energy count does not match the vertex count");
  for (Eigen::Index i = 0; i < u.plus.size(); ++i)
    if (!std::isfinite(u.plus[i]) || !std::isfinite(u.minus[i]))
      throw std::invalid_argument("min_cut_support: non-finite vertex energy");
  for (const auto& e : graph.edges)
    if (!(e.coupling >= 0.0)) throw std::invalid_argument("min_cut_support: negative coupling");
}

}  // namespace

SupportVector min_cut_support(const EmrfGraph& graph, const UnaryEnergies& unary) {
  check_sizes(graph, unary);
  const int n = static_cast<int>(graph.size());
  if (n == 0) return {};
  const int s = n;
  const int t = n + 1;
  MaxFlow mf(n + 2);
  for (int i = 0; i < n; ++i) {
    const Terminal c = terminal_caps(unary, i);
    if (c.to_source > 0.0) mf.add_edge(s, i, c.to_source);
    if (c.to_sink > 0.0) mf.add_edge(i, t, c.to_sink);
  }
  for (const auto& e : graph.edges)
    if (e.coupling > 0.0) mf.add_edge(e.a, e.b, 2.0 * e.coupling, 2.0 * e.coupling);
  mf.solve(s, t);
  const std::vector<bool> side = mf.source_side();
  SupportVector v;
  v.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v.labels[i] = side[i] ? +1 : -1;
  return v;
}

SupportVector min_cut_support(const EmrfGraph& graph, const VertexEvidence& ev) {
  return min_cut_support(graph, vertex_energies(ev));
}

void write_flow_network(std::ostream& os, const EmrfGraph& graph, const UnaryEnergies& unary) {
  check_sizes(graph, unary);
  const int n = static_cast<int>(graph.size());
  for (int i = 0; i < n; ++i) {
    const Terminal c = terminal_caps(unary, i);
    os << fmt::format("{} {} {:.17g}\n", n, i, c.to_source);
    os << fmt::format("{} {} {:.17g}\n", i, n + 1, c.to_sink);
  }
  for (const auto& e : graph.edges) {
    os << fmt::format("{} {} {:.17g}\n", e.a, e.b, 2.0 * e.coupling);
    os << fmt::format("{} {} {:.17g}\n", e.b, e.a, 2.0 * e.coupling);
  }
}

}  // namespace hmimo
