#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hmimo/array_geometry.hpp"
#include "hmimo/types.hpp"

namespace hmimo {

struct EmrfEdge {
  int a;
  int b;
  double coupling;
};

/// Ising-coupled binary field over 2D integer labels; vertices at L1
/// distance 1 are joined.
struct EmrfGraph {
  std::vector<WavenumberIndex> vertices;
  std::vector<EmrfEdge> edges;

  std::size_t size() const { return vertices.size(); }
};

/// Throws on negative eta or duplicate vertex labels.
EmrfGraph build_emrf(const std::vector<WavenumberIndex>& vertices, double eta);

/// Vertex labels in {-1, +1}.
struct SupportVector {
  std::vector<int> labels;

  std::size_t count_positive() const;
  static SupportVector all(std::size_t n, int label) { return {std::vector<int>(n, label)}; }
};

struct VertexEvidence {
  cvec evidence;
  rvec sigma_sq;
  double eps_sq = 1.0;
};

/// Per-vertex data terms D_l(+1) and D_l(-1).
struct UnaryEnergies {
  rvec plus;
  rvec minus;
};

/// Complex Gaussian negative log-density: log(pi s) + |h|^2 / s with s = sigma^2
/// for label +1 and s = eps^2 for label -1.
double vertex_energy(const VertexEvidence& ev, std::size_t vertex, int label);
UnaryEnergies vertex_energies(const VertexEvidence& ev);

/// -eta (a b - 1): 0 for agreeing labels, 2 eta otherwise.
double edge_energy(double eta, int label_a, int label_b);

double total_energy(const EmrfGraph& graph, const UnaryEnergies& unary, const SupportVector& v);
double total_energy(const EmrfGraph& graph, const VertexEvidence& ev, const SupportVector& v);

/// Exact minimizer of total_energy via one s-t min cut (source = +1).
SupportVector min_cut_support(const EmrfGraph& graph, const UnaryEnergies& unary);
SupportVector min_cut_support(const EmrfGraph& graph, const VertexEvidence& ev);

/// Edge list of the s-t network, one "from to capacity" line per arc.
/// Node n is the source and n + 1 the sink.
void write_flow_network(std::ostream& os, const EmrfGraph& graph, const UnaryEnergies& unary);

}  // namespace hmimo
