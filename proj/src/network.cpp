#include "evroute/network.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "evroute/errors.hpp"

namespace evroute {

std::string Path::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) os << '-';
    os << nodes[i];
  }
  return os.str();
}

Network::Network(std::vector<Node> nodes, std::vector<Arc> arcs, NodeId origin, NodeId destination)
    : nodes_(std::move(nodes)), arcs_(std::move(arcs)), origin_(origin), destination_(destination) {
  if (nodes_.empty()) throw ValidationError("network has no nodes");
  std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != static_cast<NodeId>(i + 1)) {
      throw ValidationError("node ids must be unique and contiguous 1..n (problem near id " +
                            std::to_string(nodes_[i].id) + ")");
    }
    if (nodes_[i].price < 0.0) {
      throw ValidationError("node " + std::to_string(nodes_[i].id) + " has a negative price");
    }
  }
  if (!contains(origin_)) throw ValidationError("origin " + std::to_string(origin_) + " is not a node");
  if (!contains(destination_)) {
    throw ValidationError("destination " + std::to_string(destination_) + " is not a node");
  }

  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t i = 0; i < arcs_.size(); ++i) {
    const Arc& a = arcs_[i];
    if (!contains(a.from) || !contains(a.to)) {
      throw ValidationError("arc (" + std::to_string(a.from) + "," + std::to_string(a.to) +
                            ") references an unknown node");
    }
    if (a.from == a.to) throw ValidationError("self loop at node " + std::to_string(a.from));
    if (!seen.emplace(a.from, a.to).second) {
      throw ValidationError("duplicate arc (" + std::to_string(a.from) + "," + std::to_string(a.to) + ")");
    }
    out_[static_cast<std::size_t>(a.from - 1)].push_back(i);
    in_[static_cast<std::size_t>(a.to - 1)].push_back(i);
  }
  for (auto& list : out_) {
    std::sort(list.begin(), list.end(), [this](std::size_t x, std::size_t y) { return arcs_[x].to < arcs_[y].to; });
  }
  for (auto& list : in_) {
    std::sort(list.begin(), list.end(),
              [this](std::size_t x, std::size_t y) { return arcs_[x].from < arcs_[y].from; });
  }
}

std::optional<std::size_t> Network::find_arc(NodeId from, NodeId to) const {
  if (!contains(from)) return std::nullopt;
  for (std::size_t idx : out_arcs(from)) {
    if (arcs_[idx].to == to) return idx;
  }
  return std::nullopt;
}

std::size_t Network::arc_index(NodeId from, NodeId to) const {
  auto idx = find_arc(from, to);
  if (!idx) {
    throw InvalidArgumentError("no arc (" + std::to_string(from) + "," + std::to_string(to) + ")");
  }
  return *idx;
}

std::vector<std::size_t> Network::path_arcs(const Path& p) const {
  std::vector<std::size_t> out;
  if (p.nodes.size() > 1) out.reserve(p.nodes.size() - 1);
  for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) out.push_back(arc_index(p.nodes[i], p.nodes[i + 1]));
  return out;
}

std::vector<bool> Network::useful_nodes() const {
  const std::size_t n = nodes_.size();
  std::vector<bool> fwd(n, false), bwd(n, false);
  std::vector<NodeId> stack{origin_};
  fwd[static_cast<std::size_t>(origin_ - 1)] = true;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (std::size_t a : out_arcs(u)) {
      auto v = static_cast<std::size_t>(arcs_[a].to - 1);
      if (!fwd[v]) {
        fwd[v] = true;
        stack.push_back(arcs_[a].to);
      }
    }
  }
  stack = {destination_};
  bwd[static_cast<std::size_t>(destination_ - 1)] = true;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (std::size_t a : in_arcs(u)) {
      auto v = static_cast<std::size_t>(arcs_[a].from - 1);
      if (!bwd[v]) {
        bwd[v] = true;
        stack.push_back(arcs_[a].from);
      }
    }
  }
  std::vector<bool> useful(n);
  for (std::size_t i = 0; i < n; ++i) useful[i] = fwd[i] && bwd[i];
  return useful;
}

void check_path(const Network& net, const Path& p) {
  if (p.nodes.empty()) throw InvalidArgumentError("empty path");
  if (p.nodes.front() != net.origin()) {
    throw InvalidArgumentError("path " + p.to_string() + " does not start at the origin");
  }
  if (p.nodes.back() != net.destination()) {
    throw InvalidArgumentError("path " + p.to_string() + " does not end at the destination");
  }
  std::vector<bool> seen(net.node_count(), false);
  for (NodeId id : p.nodes) {
    if (!net.contains(id)) throw InvalidArgumentError("path visits unknown node " + std::to_string(id));
    auto i = static_cast<std::size_t>(id - 1);
    if (seen[i]) throw InvalidArgumentError("path " + p.to_string() + " is not simple");
    seen[i] = true;
  }
  (void)net.path_arcs(p);
}

PathMetrics path_metrics(const Network& net, const Path& p) {
  check_path(net, p);
  PathMetrics m;
  for (std::size_t idx : net.path_arcs(p)) {
    const Arc& a = net.arc(idx);
    m.total_time += a.travel_time;
    m.total_energy += a.energy;
    m.total_distance += a.distance;
  }
  return m;
}

std::vector<Path> enumerate_simple_paths(const Network& net, std::size_t max_paths) {
  std::vector<Path> result;
  const auto useful = net.useful_nodes();
  if (!useful[static_cast<std::size_t>(net.origin() - 1)]) return result;

  std::vector<bool> on_path(net.node_count(), false);
  Path current;
  current.nodes.push_back(net.origin());
  on_path[static_cast<std::size_t>(net.origin() - 1)] = true;

  // Explicit stack of (node, next out-arc position) keeps deep graphs off the
  // call stack.
  std::vector<std::pair<NodeId, std::size_t>> frames{{net.origin(), 0}};
  if (net.origin() == net.destination()) return {current};

  while (!frames.empty()) {
    auto& [u, pos] = frames.back();
    const auto& outs = net.out_arcs(u);
    if (pos == outs.size()) {
      on_path[static_cast<std::size_t>(u - 1)] = false;
      current.nodes.pop_back();
      frames.pop_back();
      continue;
    }
    NodeId v = net.arc(outs[pos++]).to;
    auto vi = static_cast<std::size_t>(v - 1);
    if (on_path[vi] || !useful[vi]) continue;
    if (v == net.destination()) {
      if (result.size() == max_paths) {
        throw LimitExceededError("more than " + std::to_string(max_paths) + " simple paths");
      }
      current.nodes.push_back(v);
      result.push_back(current);
      current.nodes.pop_back();
      continue;
    }
    on_path[vi] = true;
    current.nodes.push_back(v);
    frames.emplace_back(v, 0);
  }
  return result;
}

namespace {

// Dijkstra on nonnegative weights with banned nodes/arcs; returns the
// lexicographically smallest among equal-weight predecessors' choices.
std::optional<std::pair<double, Path>> restricted_shortest_path(const Network& net, const ArcWeight& weight,
                                                                NodeId source, const std::vector<bool>& banned_node,
                                                                const std::vector<bool>& banned_arc) {
  const std::size_t n = net.node_count();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<NodeId> pred(n, 0);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(source - 1)] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[static_cast<std::size_t>(u - 1)]) continue;
    for (std::size_t a : net.out_arcs(u)) {
      if (banned_arc[a]) continue;
      NodeId v = net.arc(a).to;
      auto vi = static_cast<std::size_t>(v - 1);
      if (banned_node[vi]) continue;
      double nd = du + weight(net.arc(a));
      if (nd < dist[vi] || (nd == dist[vi] && u < pred[vi])) {
        bool improved = nd < dist[vi];
        dist[vi] = nd;
        pred[vi] = u;
        if (improved) heap.emplace(nd, v);
      }
    }
  }
  auto di = static_cast<std::size_t>(net.destination() - 1);
  if (dist[di] == inf) return std::nullopt;
  Path p;
  for (NodeId v = net.destination(); v != source; v = pred[static_cast<std::size_t>(v - 1)]) p.nodes.push_back(v);
  p.nodes.push_back(source);
  std::reverse(p.nodes.begin(), p.nodes.end());
  return std::make_pair(dist[di], p);
}

double path_weight(const Network& net, const ArcWeight& weight, const Path& p) {
  double w = 0.0;
  for (std::size_t a : net.path_arcs(p)) w += weight(net.arc(a));
  return w;
}

}  // namespace

std::vector<Path> k_shortest_paths(const Network& net, const ArcWeight& weight, std::size_t k) {
  std::vector<Path> accepted;
  if (k == 0) return accepted;
  const std::size_t n = net.node_count();
  std::vector<bool> no_nodes(n, false), no_arcs(net.arc_count(), false);
  auto first = restricted_shortest_path(net, weight, net.origin(), no_nodes, no_arcs);
  if (!first) return accepted;
  accepted.push_back(first->second);

  std::set<std::pair<double, Path>> candidates;
  while (accepted.size() < k) {
    const Path& last = accepted.back();
    for (std::size_t i = 0; i + 1 < last.nodes.size(); ++i) {
      NodeId spur = last.nodes[i];
      Path root;
      root.nodes.assign(last.nodes.begin(), last.nodes.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      std::vector<bool> banned_arc(net.arc_count(), false);
      for (const Path& p : accepted) {
        if (p.nodes.size() > i + 1 && std::equal(root.nodes.begin(), root.nodes.end(), p.nodes.begin())) {
          banned_arc[net.arc_index(p.nodes[i], p.nodes[i + 1])] = true;
        }
      }
      std::vector<bool> banned_node(n, false);
      for (std::size_t j = 0; j < i; ++j) banned_node[static_cast<std::size_t>(root.nodes[j] - 1)] = true;
      auto spur_path = restricted_shortest_path(net, weight, spur, banned_node, banned_arc);
      if (!spur_path) continue;
      Path total = root;
      total.nodes.insert(total.nodes.end(), spur_path->second.nodes.begin() + 1, spur_path->second.nodes.end());
      candidates.emplace(path_weight(net, weight, total), std::move(total));
    }
    // Drop candidates already accepted (possible when different spurs rebuild
    // the same path).
    while (!candidates.empty() &&
           std::find(accepted.begin(), accepted.end(), candidates.begin()->second) != accepted.end()) {
      candidates.erase(candidates.begin());
    }
    if (candidates.empty()) break;
    accepted.push_back(candidates.begin()->second);
    candidates.erase(candidates.begin());
  }
  return accepted;
}

}  // namespace evroute
