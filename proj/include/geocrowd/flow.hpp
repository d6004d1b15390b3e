#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geocrowd/domain.hpp"

namespace geocrowd {

struct FlowEdge {
  int from = 0;
  int to = 0;
  int capacity = 0;
  double cost = 0.0;
  int flow = 0;
};

// Worker/task reduction network. Vertex 0 is the source, workers follow in id
// order, then tasks in id order, and the sink is last. Edges are stored in
// pairs: index 2k is the arc as built, 2k+1 its residual twin.
class FlowNetwork {
 public:
  static constexpr int source = 0;

  FlowNetwork() : adjacency_(2) {}

  int sink() const { return vertex_count() - 1; }
  int vertex_count() const { return static_cast<int>(adjacency_.size()); }
  int worker_vertex(std::size_t i) const { return 1 + static_cast<int>(i); }
  int task_vertex(std::size_t i) const {
    return 1 + static_cast<int>(worker_ids_.size() + i);
  }
  bool is_worker_vertex(int v) const {
    return v >= 1 && v <= static_cast<int>(worker_ids_.size());
  }
  bool is_task_vertex(int v) const {
    return v > static_cast<int>(worker_ids_.size()) && v < sink();
  }

  std::span<const int> worker_ids() const { return worker_ids_; }
  std::span<const int> task_ids() const { return task_ids_; }
  int worker_id_at(int v) const { return worker_ids_[v - 1]; }
  int task_id_at(int v) const {
    return task_ids_[v - 1 - static_cast<int>(worker_ids_.size())];
  }
  Point worker_point_at(int v) const { return worker_points_[v - 1]; }
  Point task_point_at(int v) const {
    return task_points_[v - 1 - static_cast<int>(worker_ids_.size())];
  }

  // Built arcs only (no residual twins).
  std::vector<FlowEdge> arcs() const {
    std::vector<FlowEdge> out;
    for (std::size_t e = 0; e < edges_.size(); e += 2) out.push_back(edges_[e]);
    return out;
  }
  std::size_t arc_count() const { return edges_.size() / 2; }

  // Mutable access for solvers.
  std::vector<FlowEdge>& edges() { return edges_; }
  const std::vector<FlowEdge>& edges() const { return edges_; }
  const std::vector<int>& out_edges(int v) const { return adjacency_[v]; }

  void reset_flow() {
    for (auto& e : edges_) e.flow = 0;
  }

  void set_parties(std::vector<int> worker_ids, std::vector<Point> worker_pts,
                   std::vector<int> task_ids, std::vector<Point> task_pts) {
    worker_ids_ = std::move(worker_ids);
    worker_points_ = std::move(worker_pts);
    task_ids_ = std::move(task_ids);
    task_points_ = std::move(task_pts);
    adjacency_.assign(worker_ids_.size() + task_ids_.size() + 2, {});
    edges_.clear();
  }

  void add_arc(int from, int to, int capacity, double cost) {
    int e = static_cast<int>(edges_.size());
    edges_.push_back({from, to, capacity, cost, 0});
    edges_.push_back({to, from, 0, -cost, 0});
    adjacency_[from].push_back(e);
    adjacency_[to].push_back(e + 1);
  }

  // Orders each adjacency list by head vertex id so searches break ties
  // toward lower ids.
  void finalize() {
    for (auto& list : adjacency_) {
      std::stable_sort(list.begin(), list.end(), [&](int a, int b) {
        return edges_[a].to < edges_[b].to;
      });
    }
  }

 private:
  std::vector<int> worker_ids_;
  std::vector<Point> worker_points_;
  std::vector<int> task_ids_;
  std::vector<Point> task_points_;
  std::vector<FlowEdge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

struct FlowResult {
  int value = 0;
  double cost = 0.0;
  std::vector<AssignmentPair> pairs;
};

template <typename CostFn>
  requires std::invocable<CostFn, const Worker&, const Task&>
FlowNetwork build_network(const SlotSnapshot& snap, CostFn&& edge_cost) {
  auto wi = order_by_id(std::span<const Worker>(snap.workers));
  auto ti = order_by_id(std::span<const Task>(snap.tasks));

  std::vector<int> wids, tids;
  std::vector<Point> wpts, tpts;
  for (auto i : wi) {
    wids.push_back(snap.workers[i].id);
    wpts.push_back(snap.workers[i].location);
  }
  for (auto j : ti) {
    tids.push_back(snap.tasks[j].id);
    tpts.push_back(snap.tasks[j].location);
  }

  FlowNetwork net;
  net.set_parties(std::move(wids), std::move(wpts), std::move(tids),
                  std::move(tpts));
  for (std::size_t a = 0; a < wi.size(); ++a) {
    const Worker& w = snap.workers[wi[a]];
    if (w.capacity > 0) net.add_arc(FlowNetwork::source, net.worker_vertex(a), w.capacity, 0.0);
  }
  for (std::size_t a = 0; a < wi.size(); ++a) {
    const Worker& w = snap.workers[wi[a]];
    for (std::size_t b = 0; b < ti.size(); ++b) {
      const Task& t = snap.tasks[ti[b]];
      if (feasible(w, t, snap.slot, snap.geometry)) {
        net.add_arc(net.worker_vertex(a), net.task_vertex(b), 1,
                    static_cast<double>(edge_cost(w, t)));
      }
    }
  }
  for (std::size_t b = 0; b < ti.size(); ++b) {
    int need = snap.tasks[ti[b]].remaining_answers();
    if (need > 0) net.add_arc(net.task_vertex(b), net.sink(), need, 0.0);
  }
  net.finalize();
  return net;
}

inline FlowNetwork build_network(const SlotSnapshot& snap) {
  return build_network(snap, [](const Worker&, const Task&) { return 0.0; });
}

namespace detail {

inline FlowResult decode_flow(const FlowNetwork& net) {
  FlowResult r;
  for (const FlowEdge& e : net.arcs()) {
    r.cost += e.flow * e.cost;
    if (e.from == FlowNetwork::source) r.value += e.flow;
    if (net.is_worker_vertex(e.from) && net.is_task_vertex(e.to) && e.flow > 0) {
      r.pairs.push_back({net.worker_id_at(e.from), net.task_id_at(e.to), 1.0,
                         distance(net.worker_point_at(e.from),
                                  net.task_point_at(e.to))});
    }
  }
  std::sort(r.pairs.begin(), r.pairs.end(), [](const auto& a, const auto& b) {
    return std::pair(a.worker_id, a.task_id) < std::pair(b.worker_id, b.task_id);
  });
  return r;
}

inline void augment(FlowNetwork& net, const std::vector<int>& parent_edge) {
  auto& edges = net.edges();
  int bottleneck = std::numeric_limits<int>::max();
  for (int v = net.sink(); v != FlowNetwork::source;) {
    const FlowEdge& e = edges[parent_edge[v]];
    bottleneck = std::min(bottleneck, e.capacity - e.flow);
    v = e.from;
  }
  for (int v = net.sink(); v != FlowNetwork::source;) {
    int id = parent_edge[v];
    edges[id].flow += bottleneck;
    edges[id ^ 1].flow -= bottleneck;
    v = edges[id].from;
  }
}

}  // namespace detail

// Edmonds-Karp: shortest augmenting paths by breadth-first search, neighbours
// visited in ascending vertex id.
inline FlowResult max_flow(FlowNetwork& net) {
  net.reset_flow();
  const int n = net.vertex_count();
  auto& edges = net.edges();
  std::vector<int> parent(n);
  while (true) {
    std::fill(parent.begin(), parent.end(), -1);
    std::queue<int> q;
    q.push(FlowNetwork::source);
    std::vector<char> seen(n, 0);
    seen[FlowNetwork::source] = 1;
    while (!q.empty() && !seen[net.sink()]) {
      int u = q.front();
      q.pop();
      for (int id : net.out_edges(u)) {
        const FlowEdge& e = edges[id];
        if (!seen[e.to] && e.capacity - e.flow > 0) {
          seen[e.to] = 1;
          parent[e.to] = id;
          q.push(e.to);
        }
      }
    }
    if (!seen[net.sink()]) break;
    detail::augment(net, parent);
  }
  return detail::decode_flow(net);
}

// Successive shortest augmenting paths with Johnson potentials. Every
// augmentation follows a cheapest residual path, so the final flow has
// maximum value and minimum cost among maximum flows.
inline FlowResult min_cost_max_flow(FlowNetwork& net) {
  constexpr double kTie = 1e-12;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  net.reset_flow();
  const int n = net.vertex_count();
  auto& edges = net.edges();
  std::vector<double> potential(n, 0.0);
  std::vector<double> dist(n);
  std::vector<int> parent(n);

  while (true) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[FlowNetwork::source] = 0.0;
    pq.emplace(0.0, FlowNetwork::source);
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u] + kTie) continue;
      for (int id : net.out_edges(u)) {
        const FlowEdge& e = edges[id];
        if (e.capacity - e.flow <= 0) continue;
        double reduced = e.cost + potential[u] - potential[e.to];
        double nd = dist[u] + std::max(reduced, 0.0);
        if (nd < dist[e.to] - kTie) {
          dist[e.to] = nd;
          parent[e.to] = id;
          pq.emplace(nd, e.to);
        }
      }
    }
    if (parent[net.sink()] < 0) break;
    for (int v = 0; v < n; ++v) {
      if (dist[v] < kInf) potential[v] += dist[v];
    }
    detail::augment(net, parent);
  }
  return detail::decode_flow(net);
}

// Capacity bounds and conservation on the current flow. Returns a description
// of the first problem found.
inline std::optional<std::string> check_flow(const FlowNetwork& net) {
  std::vector<long long> balance(net.vertex_count(), 0);
  for (const FlowEdge& e : net.arcs()) {
    if (e.flow < 0 || e.flow > e.capacity) {
      return "edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
             " carries " + std::to_string(e.flow) + " of capacity " +
             std::to_string(e.capacity);
    }
    balance[e.from] -= e.flow;
    balance[e.to] += e.flow;
  }
  for (int v = 1; v < net.sink(); ++v) {
    if (balance[v] != 0) {
      return "vertex " + std::to_string(v) + " is unbalanced by " +
             std::to_string(balance[v]);
    }
  }
  if (balance[FlowNetwork::source] != -balance[net.sink()]) {
    return "source outflow differs from sink inflow";
  }
  return std::nullopt;
}

}  // namespace geocrowd
