#pragma once

// Exact s-t max-flow / min-cut on real capacities.
//
// The solver grows two search trees (from the source and from the sink),
// augments along the path found where they touch, and re-attaches orphaned
// nodes instead of restarting the search. Trees persist between augmentations,
// which suits the shallow, sparse graphs that fusion moves produce.

#include <cstdint>
#include <deque>
#include <limits>
#include <ostream>
#include <vector>

#include "textline/core.hpp"

namespace textline {

inline constexpr double kInfiniteCapacity = std::numeric_limits<double>::infinity();

class FlowNetwork {
 public:
  using Node = std::size_t;

  struct Arc {
    Node from;
    Node to;
    double capacity;
  };

  FlowNetwork(std::size_t n_nodes, Node source, Node sink) : n_(n_nodes), source_(source), sink_(sink) {
    if (source >= n_nodes || sink >= n_nodes) throw Error("terminal out of range");
    if (source == sink) throw Error("source and sink must differ");
  }

  Node add_node() { return n_++; }

  // Capacity must be non-negative and finite, or kInfiniteCapacity.
  std::size_t add_arc(Node from, Node to, double capacity) {
    if (from >= n_ || to >= n_) throw Error("arc endpoint out of range");
    if (!(capacity >= 0.0) || std::isnan(capacity)) throw Error("arc capacity must be non-negative");
    arcs_.push_back({from, to, capacity});
    return arcs_.size() - 1;
  }

  std::size_t node_count() const { return n_; }
  Node source() const { return source_; }
  Node sink() const { return sink_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  // Sum of capacities of arcs leaving `side` (side[v] = true means source side).
  double cut_capacity(const std::vector<bool>& side) const {
    double total = 0.0;
    for (const auto& a : arcs_)
      if (side[a.from] && !side[a.to]) total += a.capacity;
    return total;
  }

  // DIMACS max-flow text; infinite arcs are written with a capacity exceeding
  // the sum of all finite capacities.
  void write_dimacs(std::ostream& os) const {
    double finite_sum = 1.0;
    for (const auto& a : arcs_)
      if (std::isfinite(a.capacity)) finite_sum += a.capacity;
    os << "p max " << n_ << ' ' << arcs_.size() << '\n';
    os << "n " << source_ + 1 << " s\n";
    os << "n " << sink_ + 1 << " t\n";
    for (const auto& a : arcs_)
      os << "a " << a.from + 1 << ' ' << a.to + 1 << ' ' << (std::isfinite(a.capacity) ? a.capacity : finite_sum)
         << '\n';
  }

 private:
  std::size_t n_;
  Node source_;
  Node sink_;
  std::vector<Arc> arcs_;
};

struct MaxFlowResult {
  double flow = 0.0;
  std::vector<bool> source_side;  // nodes reachable from the source in the residual graph
};

namespace detail {

class SearchTreeSolver {
 public:
  explicit SearchTreeSolver(const FlowNetwork& net)
      : s_(net.source()), t_(net.sink()), first_(net.node_count(), kNone), tree_(net.node_count(), Tree::Free),
        parent_(net.node_count(), kNone), active_flag_(net.node_count(), false) {
    residual_.reserve(2 * net.arcs().size());
    for (const auto& a : net.arcs()) {
      add_half(a.from, a.to, a.capacity);
      add_half(a.to, a.from, 0.0);
    }
  }

  MaxFlowResult run() {
    tree_[s_] = Tree::Source;
    tree_[t_] = Tree::Sink;
    activate(s_);
    activate(t_);
    double flow = 0.0;
    for (;;) {
      std::size_t bridge = grow();
      if (bridge == kNone) break;
      flow += augment(bridge);
      adopt();
    }
    return {flow, reachable_from_source()};
  }

 private:
  enum class Tree : std::uint8_t { Free, Source, Sink };
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  void add_half(std::size_t from, std::size_t to, double cap) {
    head_.push_back(to);
    tail_.push_back(from);
    residual_.push_back(cap);
    next_.push_back(first_[from]);
    first_[from] = head_.size() - 1;
  }

  static std::size_t sister(std::size_t a) { return a ^ 1U; }

  void activate(std::size_t v) {
    if (!active_flag_[v]) {
      active_flag_[v] = true;
      active_.push_back(v);
    }
  }

  // Returns an arc from the source tree into the sink tree, or kNone.
  std::size_t grow() {
    while (!active_.empty()) {
      std::size_t p = active_.front();
      if (tree_[p] == Tree::Free) {
        active_.pop_front();
        active_flag_[p] = false;
        continue;
      }
      for (std::size_t a = first_[p]; a != kNone; a = next_[a]) {
        std::size_t q = head_[a];
        // Arc used for traversal: p->q for the source tree, q->p for the sink tree.
        std::size_t arc = tree_[p] == Tree::Source ? a : sister(a);
        if (!(residual_[arc] > 0.0)) continue;
        if (tree_[q] == Tree::Free) {
          tree_[q] = tree_[p];
          parent_[q] = arc;
          activate(q);
        } else if (tree_[q] != tree_[p]) {
          return arc;
        }
      }
      active_.pop_front();
      active_flag_[p] = false;
    }
    return kNone;
  }

  double augment(std::size_t bridge) {
    // bridge runs from a source-tree node to a sink-tree node
    double bottleneck = residual_[bridge];
    for (std::size_t v = tail_[bridge]; v != s_; v = tail_[parent_[v]])
      bottleneck = std::min(bottleneck, residual_[parent_[v]]);
    for (std::size_t v = head_[bridge]; v != t_; v = head_[parent_[v]])
      bottleneck = std::min(bottleneck, residual_[parent_[v]]);
    if (!std::isfinite(bottleneck)) throw Error("unbounded cut");

    push(bridge, bottleneck);
    for (std::size_t v = tail_[bridge]; v != s_;) {
      std::size_t a = parent_[v];
      std::size_t up = tail_[a];
      push(a, bottleneck);
      if (!(residual_[a] > 0.0)) make_orphan(v);
      v = up;
    }
    for (std::size_t v = head_[bridge]; v != t_;) {
      std::size_t a = parent_[v];
      std::size_t down = head_[a];
      push(a, bottleneck);
      if (!(residual_[a] > 0.0)) make_orphan(v);
      v = down;
    }
    return bottleneck;
  }

  void push(std::size_t a, double amount) {
    if (std::isfinite(residual_[a])) residual_[a] -= amount;
    if (std::isfinite(residual_[sister(a)])) residual_[sister(a)] += amount;
  }

  void make_orphan(std::size_t v) {
    parent_[v] = kNone;
    orphans_.push_back(v);
  }

  bool rooted(std::size_t v) const {
    while (v != s_ && v != t_) {
      if (parent_[v] == kNone) return false;
      v = tree_[v] == Tree::Source ? tail_[parent_[v]] : head_[parent_[v]];
    }
    return true;
  }

  void adopt() {
    while (!orphans_.empty()) {
      std::size_t o = orphans_.front();
      orphans_.pop_front();
      Tree side = tree_[o];
      std::size_t found = kNone;
      for (std::size_t a = first_[o]; a != kNone && found == kNone; a = next_[a]) {
        std::size_t q = head_[a];
        if (tree_[q] != side) continue;
        std::size_t arc = side == Tree::Source ? sister(a) : a;  // q->o or o->q
        if (!(residual_[arc] > 0.0)) continue;
        if (rooted(q)) found = arc;  // o has no parent, so q's path cannot pass through o
      }
      if (found != kNone) {
        parent_[o] = found;
        continue;
      }
      for (std::size_t a = first_[o]; a != kNone; a = next_[a]) {
        std::size_t q = head_[a];
        if (tree_[q] != side) continue;
        std::size_t arc = side == Tree::Source ? sister(a) : a;
        if (residual_[arc] > 0.0) activate(q);
        if (parent_[q] != kNone) {
          std::size_t pa = parent_[q];
          std::size_t up = side == Tree::Source ? tail_[pa] : head_[pa];
          if (up == o) make_orphan(q);
        }
      }
      tree_[o] = Tree::Free;
    }
  }

  std::vector<bool> reachable_from_source() const {
    std::vector<bool> seen(first_.size(), false);
    std::vector<std::size_t> stack{s_};
    seen[s_] = true;
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t a = first_[v]; a != kNone; a = next_[a]) {
        if (residual_[a] > 0.0 && !seen[head_[a]]) {
          seen[head_[a]] = true;
          stack.push_back(head_[a]);
        }
      }
    }
    return seen;
  }

  std::size_t s_;
  std::size_t t_;
  std::vector<std::size_t> head_;
  std::vector<std::size_t> tail_;
  std::vector<std::size_t> next_;
  std::vector<double> residual_;
  std::vector<std::size_t> first_;
  std::vector<Tree> tree_;
  std::vector<std::size_t> parent_;
  std::vector<bool> active_flag_;
  std::deque<std::size_t> active_;
  std::deque<std::size_t> orphans_;
};

}  // namespace detail

// Throws Error("unbounded cut") when every s-t cut contains an infinite arc.
inline MaxFlowResult max_flow(const FlowNetwork& net) {
  detail::SearchTreeSolver solver(net);
  return solver.run();
}

}  // namespace textline
