#pragma once

#include <vector>

namespace hmimo {

/// Dinic max-flow on real capacities. Residual capacities at or below
/// `tolerance()` count as saturated.
class MaxFlow {
 public:
  explicit MaxFlow(int n_nodes);

  int node_count() const { return static_cast<int>(adj_.size()); }

  /// Adds arc from->to with capacity `cap` and the reverse arc with `rev_cap`.
  void add_edge(int from, int to, double cap, double rev_cap = 0.0);

  double solve(int source, int sink);

  /// Nodes reachable from the source in the residual network after solve().
  /// These form the source side of a minimum cut.
  std::vector<bool> source_side() const;

  double tolerance() const { return eps_; }

 private:
  struct Arc {
    int to;
    int rev;
    double cap;
  };

  bool build_levels(int s, int t);
  double push(int u, int t, double limit);

  std::vector<std::vector<Arc>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> iter_;
  double max_cap_ = 0.0;
  double eps_ = 0.0;
  int source_ = -1;
};

}  // namespace hmimo
