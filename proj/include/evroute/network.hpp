#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace evroute {

/// 1-based node identifier, as used in every instance file and report.
using NodeId = int;

struct Node {
  NodeId id = 0;
  bool has_charger = true;
  double price = 0.0;  // money per energy unit
};

struct Arc {
  NodeId from = 0;
  NodeId to = 0;
  double distance = 0.0;     // miles
  double travel_time = 0.0;  // minutes
  double energy = 0.0;       // energy units, negative on recuperation
  // Whether travel_time / energy were given explicitly in the instance rather
  // than derived from the distance.
  bool explicit_time = false;
  bool explicit_energy = false;
};

/// Battery and charger characteristics of one vehicle (or one subflow).
struct ChargingSpec {
  double capacity = 0.0;              // B
  double initial_energy = 0.0;        // E_1
  double charge_time_per_unit = 0.0;  // g, minutes per energy unit
};

/// An ordered origin-to-destination node sequence.
struct Path {
  std::vector<NodeId> nodes;

  [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
  [[nodiscard]] bool empty() const noexcept { return nodes.empty(); }
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Path&, const Path&) = default;
  friend auto operator<=>(const Path& a, const Path& b) { return a.nodes <=> b.nodes; }
};

struct PathMetrics {
  double total_time = 0.0;
  double total_energy = 0.0;
  double total_distance = 0.0;
};

/// Immutable directed graph. Arcs keep their insertion order; adjacency
/// lists are sorted by the opposite endpoint so traversals are lexicographic.
class Network {
 public:
  Network() = default;

  /// Builds the graph and checks structural invariants (contiguous ids,
  /// endpoints exist, no parallel arcs or self loops). Throws ValidationError.
  Network(std::vector<Node> nodes, std::vector<Arc> arcs, NodeId origin, NodeId destination);

  [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<Arc>& arcs() const noexcept { return arcs_; }
  [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::size_t arc_count() const noexcept { return arcs_.size(); }
  [[nodiscard]] NodeId origin() const noexcept { return origin_; }
  [[nodiscard]] NodeId destination() const noexcept { return destination_; }

  [[nodiscard]] const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id - 1)); }
  [[nodiscard]] const Arc& arc(std::size_t index) const { return arcs_.at(index); }

  /// Arc indices leaving `id`, sorted by head node.
  [[nodiscard]] const std::vector<std::size_t>& out_arcs(NodeId id) const {
    return out_.at(static_cast<std::size_t>(id - 1));
  }
  /// Arc indices entering `id`, sorted by tail node.
  [[nodiscard]] const std::vector<std::size_t>& in_arcs(NodeId id) const {
    return in_.at(static_cast<std::size_t>(id - 1));
  }

  [[nodiscard]] std::optional<std::size_t> find_arc(NodeId from, NodeId to) const;
  /// Like find_arc but throws InvalidArgumentError when the arc is missing.
  [[nodiscard]] std::size_t arc_index(NodeId from, NodeId to) const;

  /// Arc indices along `p`; throws InvalidArgumentError if p is not a path.
  [[nodiscard]] std::vector<std::size_t> path_arcs(const Path& p) const;

  [[nodiscard]] bool contains(NodeId id) const noexcept {
    return id >= 1 && static_cast<std::size_t>(id) <= nodes_.size();
  }

  /// Nodes that lie on at least one origin->destination walk.
  [[nodiscard]] std::vector<bool> useful_nodes() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  NodeId origin_ = 1;
  NodeId destination_ = 1;
};

/// Checks that `p` starts at the origin, ends at the destination, is simple
/// and follows existing arcs. Throws InvalidArgumentError otherwise.
void check_path(const Network& net, const Path& p);

/// Componentwise sums of travel time, energy and distance along `p`.
PathMetrics path_metrics(const Network& net, const Path& p);

/// All simple origin->destination paths in lexicographic node order.
/// Throws LimitExceededError when more than `max_paths` exist.
std::vector<Path> enumerate_simple_paths(const Network& net, std::size_t max_paths = 1'000'000);

/// Per-arc weight used by the path searches below.
using ArcWeight = std::function<double(const Arc&)>;

/// Up to k loopless origin->destination paths in nondecreasing weight order
/// (Yen). Weights must be nonnegative.
std::vector<Path> k_shortest_paths(const Network& net, const ArcWeight& weight, std::size_t k);

}  // namespace evroute
