#include "hmimo/max_flow.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace hmimo {

MaxFlow::MaxFlow(int n_nodes) {
  if (n_nodes < 2) throw std::invalid_argument("MaxFlow: need at least two nodes");
  adj_.resize(static_cast<std::size_t>(n_nodes));
}

void MaxFlow::add_edge(int from, int to, double cap, double rev_cap) {
  if (from < 0 || to < 0 || from >= node_count() || to >= node_count())
    throw std::out_of_range("MaxFlow::add_edge: node out of range");
  if (!(cap >= 0.0) || !(rev_cap >= 0.0)) throw std::invalid_argument("MaxFlow::add_edge: negative capacity");
  if (from == to) return;
  auto& a = adj_[from];
  auto& b = adj_[to];
  a.push_back({to, static_cast<int>(b.size()), cap});
  b.push_back({from, static_cast<int>(a.size()) - 1, rev_cap});
  max_cap_ = std::max({max_cap_, cap, rev_cap});
}

bool MaxFlow::build_levels(int s, int t) {
  level_.assign(adj_.size(), -1);
  std::queue<int> q;
  level_[s] = 0;
  q.push(s);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (const Arc& e : adj_[u])
      if (e.cap > eps_ && level_[e.to] < 0) {
        level_[e.to] = level_[u] + 1;
        q.push(e.to);
      }
  }
  return level_[t] >= 0;
}

double MaxFlow::push(int u, int t, double limit) {
  if (u == t) return limit;
  for (std::size_t& i = iter_[u]; i < adj_[u].size(); ++i) {
    Arc& e = adj_[u][i];
    if (e.cap <= eps_ || level_[e.to] != level_[u] + 1) continue;
    const double f = push(e.to, t, std::min(limit, e.cap));
    if (f > 0.0) {
      e.cap -= f;
      adj_[e.to][e.rev].cap += f;
      return f;
    }
  }
  return 0.0;
}

double MaxFlow::solve(int source, int sink) {
  if (source == sink) throw std::invalid_argument("MaxFlow::solve: source equals sink");
  source_ = source;
  eps_ = max_cap_ * 1e-12;
  double flow = 0.0;
  while (build_levels(source, sink)) {
    iter_.assign(adj_.size(), 0);
    for (double f; (f = push(source, sink, std::numeric_limits<double>::infinity())) > 0.0;) flow += f;
  }
  return flow;
}

std::vector<bool> MaxFlow::source_side() const {
  std::vector<bool> seen(adj_.size(), false);
  if (source_ < 0) throw std::logic_error("MaxFlow::source_side: solve() has not run");
  std::vector<int> stack{source_};
  seen[source_] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const Arc& e : adj_[u])
      if (e.cap > eps_ && !seen[e.to]) {
        seen[e.to] = true;
        stack.push_back(e.to);
      }
  }
  return seen;
}

}  // namespace hmimo
