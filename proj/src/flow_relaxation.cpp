#include "evroute/flow_relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "evroute/errors.hpp"

namespace evroute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSaturationMargin = 1e-9;
constexpr double kPositiveFlow = 1e-12;
constexpr double kConservationTol = 1e-6;

// Neumaier compensated summation.
class Sum {
 public:
  void add(double v) {
    if (std::isinf(v)) {
      inf_ += v;
      return;
    }
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return inf_ != 0.0 ? inf_ : sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  double inf_ = 0.0;
};

struct Route {
  Path path;
  std::vector<std::size_t> arcs;
};

// Dijkstra on nonnegative per-arc weights. Equal labels keep the
// predecessor with the smaller id. Returns nullopt-like empty route when the
// destination has no finite label.
Route shortest_route(const Network& net, const std::vector<double>& w) {
  const std::size_t n = net.node_count();
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> pred_arc(n, SIZE_MAX);
  std::vector<bool> done(n, false);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(net.origin() - 1)] = 0.0;
  heap.emplace(0.0, net.origin());
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    const auto ui = static_cast<std::size_t>(u - 1);
    if (done[ui]) continue;
    done[ui] = true;
    for (auto a : net.out_arcs(u)) {
      const auto vi = static_cast<std::size_t>(net.arc(a).to - 1);
      if (done[vi]) continue;
      const double nd = du + w[a];
      if (!std::isfinite(nd)) continue;
      const bool tie_smaller = nd == dist[vi] && pred_arc[vi] != SIZE_MAX && u < net.arc(pred_arc[vi]).from;
      if (nd < dist[vi] || tie_smaller) {
        dist[vi] = nd;
        pred_arc[vi] = a;
        heap.emplace(nd, net.arc(a).to);
      }
    }
  }
  Route r;
  const auto di = static_cast<std::size_t>(net.destination() - 1);
  if (!std::isfinite(dist[di])) return r;
  NodeId v = net.destination();
  r.path.nodes.push_back(v);
  while (v != net.origin()) {
    const auto a = pred_arc[static_cast<std::size_t>(v - 1)];
    r.arcs.push_back(a);
    v = net.arc(a).from;
    r.path.nodes.push_back(v);
  }
  std::reverse(r.path.nodes.begin(), r.path.nodes.end());
  std::reverse(r.arcs.begin(), r.arcs.end());
  return r;
}

struct ActivePath {
  Route route;
  double flow = 0.0;
};

std::vector<double> loads_of(const std::vector<ActivePath>& active, std::size_t arcs) {
  std::vector<Sum> sums(arcs);
  for (const auto& p : active) {
    for (auto a : p.route.arcs) sums[a].add(p.flow);
  }
  std::vector<double> x(arcs);
  for (std::size_t a = 0; a < arcs; ++a) x[a] = std::min(1.0, sums[a].value());
  return x;
}

double route_cost(const Route& r, const std::vector<double>& g) {
  Sum s;
  for (auto a : r.arcs) s.add(g[a]);
  return s.value();
}

// Exact minimiser of the objective along x + s * dir for s in [0, smax],
// given dir in {-1, 0, 1} on the listed arcs.
double line_search(const Network& net, const CongestionParams& cp, const std::vector<double>& x,
                   const std::vector<std::pair<std::size_t, double>>& dir, double smax) {
  auto slope = [&](double s) {
    Sum acc;
    for (const auto& [a, da] : dir) acc.add(da * relaxed_arc_marginal(net.arc(a).distance, x[a] + s * da, cp));
    return acc.value();
  };
  auto curvature = [&](double s) {
    Sum acc;
    for (const auto& [a, da] : dir) acc.add(relaxed_arc_curvature(net.arc(a).distance, x[a] + s * da, cp));
    return acc.value();
  };
  if (slope(smax) <= 0.0) return smax;
  double lo = 0.0;
  double hi = smax;
  double s = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double d1 = slope(s);
    if (d1 == 0.0) return s;
    if (d1 < 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, smax)) break;
    const double d2 = curvature(s);
    double next = (std::isfinite(d1) && std::isfinite(d2) && d2 > 0.0) ? s - d1 / d2 : kInf;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool tiny = std::abs(next - s) <= 1e-14 * std::max(1.0, smax);
    s = next;
    if (tiny) break;
  }
  return std::clamp(s, lo, hi);
}

// Two paths through a common node v can trade suffixes without changing any
// arc flow. When both traded paths already carry flow, moving the smaller of
// the two flows over removes a path. Moves are taken only toward routes with
// fewer hops (lower sum of squared hop counts), so the result is independent
// of the order in which the solver discovered its paths.
std::vector<PathFlow> reduce_path_flows(std::vector<PathFlow> flows) {
  auto hops2 = [](const Path& p) {
    const double h = static_cast<double>(p.size()) - 1.0;
    return h * h;
  };
  auto find = [&](const Path& p) {
    return std::find_if(flows.begin(), flows.end(), [&](const PathFlow& f) { return f.path == p; });
  };
  bool moved = true;
  while (moved) {
    moved = false;
    std::sort(flows.begin(), flows.end(), [](const PathFlow& a, const PathFlow& b) { return a.path < b.path; });
    for (std::size_t i = 0; i < flows.size() && !moved; ++i) {
      for (std::size_t j = i + 1; j < flows.size() && !moved; ++j) {
        const auto& a = flows[i].path.nodes;
        const auto& b = flows[j].path.nodes;
        for (std::size_t ia = 1; ia + 1 < a.size() && !moved; ++ia) {
          const auto jb = std::find(b.begin() + 1, b.end() - 1, a[ia]);
          if (jb == b.end() - 1) continue;
          Path p;
          Path q;
          p.nodes.assign(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(ia));
          p.nodes.insert(p.nodes.end(), jb, b.end());
          q.nodes.assign(b.begin(), jb);
          q.nodes.insert(q.nodes.end(), a.begin() + static_cast<std::ptrdiff_t>(ia), a.end());
          if (p == flows[i].path || p == flows[j].path) continue;
          auto ip = find(p);
          auto iq = find(q);
          if (ip == flows.end() || iq == flows.end()) continue;
          if (hops2(p) + hops2(q) >= hops2(flows[i].path) + hops2(flows[j].path)) continue;
          const double delta = std::min(flows[i].fraction, flows[j].fraction);
          ip->fraction += delta;
          iq->fraction += delta;
          flows[i].fraction -= delta;
          flows[j].fraction -= delta;
          moved = true;
        }
      }
    }
    std::erase_if(flows, [](const PathFlow& f) { return f.fraction <= 0.0; });
  }
  std::sort(flows.begin(), flows.end(), [](const PathFlow& a, const PathFlow& b) {
    if (a.fraction != b.fraction) return a.fraction > b.fraction;
    return a.path < b.path;
  });
  return flows;
}

}  // namespace

double relaxed_arc_cost(double distance, double x, const CongestionParams& cp) {
  if (distance == 0.0 || x <= 0.0) return 0.0;
  if (x >= 1.0) return kInf;
  const double a = distance * cp.inflow_rate / cp.free_flow_speed;
  const double b = cp.eg * distance * cp.inflow_rate;
  return a * x * congestion_factor(x, cp.p_exp, cp.q_exp) + b * x;
}

double relaxed_arc_marginal(double distance, double x, const CongestionParams& cp) {
  if (distance == 0.0) return 0.0;
  if (x >= 1.0) return kInf;
  x = std::max(x, 0.0);
  const double a = distance * cp.inflow_rate / cp.free_flow_speed;
  const double b = cp.eg * distance * cp.inflow_rate;
  const double p = cp.p_exp;
  const double q = cp.q_exp;
  const double u = fast_pow(x, p);
  return a * fast_pow(1.0 - u, -q - 1.0) * ((1.0 - u) + p * q * u) + b;
}

double relaxed_arc_curvature(double distance, double x, const CongestionParams& cp) {
  if (distance == 0.0) return 0.0;
  if (x >= 1.0) return kInf;
  x = std::max(x, 0.0);
  const double a = distance * cp.inflow_rate / cp.free_flow_speed;
  const double p = cp.p_exp;
  const double q = cp.q_exp;
  const double u = fast_pow(x, p);
  const double bracket = (q + 1.0) * (1.0 - u + p * q * u) + (p * q - 1.0) * (1.0 - u);
  return a * p * fast_pow(x, p - 1.0) * fast_pow(1.0 - u, -q - 2.0) * bracket;
}

FlowParts flow_objective_parts(std::span<const double> x, const Network& net, const CongestionParams& cp) {
  if (x.size() != net.arc_count()) throw InvalidArgumentError("flow vector size does not match arc count");
  Sum travel;
  Sum charging;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double d = net.arc(a).distance;
    if (x[a] <= 0.0 || d == 0.0) continue;
    const double free_time = d * cp.inflow_rate / cp.free_flow_speed;
    travel.add(free_time * x[a] * congestion_factor(x[a], cp.p_exp, cp.q_exp));
    charging.add(cp.eg * d * cp.inflow_rate * x[a]);
  }
  return {travel.value(), charging.value()};
}

double flow_objective(std::span<const double> x, const Network& net, const CongestionParams& cp) {
  return flow_objective_parts(x, net, cp).total();
}

FlowSolution solve_flow(const Network& net, const CongestionParams& cp, const FlowOptions& opts) {
  cp.validate();
  if (!(opts.tol > 0.0)) throw InvalidArgumentError("tolerance must be positive");
  if (opts.max_iter < 0) throw InvalidArgumentError("max_iter must be nonnegative");
  const std::size_t m = net.arc_count();

  std::vector<double> g(m);
  for (std::size_t a = 0; a < m; ++a) g[a] = relaxed_arc_marginal(net.arc(a).distance, 0.0, cp);
  Route start = shortest_route(net, g);
  if (start.path.empty()) throw InfeasibleError("destination is unreachable from the origin");

  std::vector<ActivePath> active{{std::move(start), 1.0}};
  FlowSolution sol;
  std::vector<double> x = loads_of(active, m);
  double f = flow_objective(x, net, cp);
  sol.history.push_back(f);

  for (;;) {
    for (std::size_t a = 0; a < m; ++a) g[a] = relaxed_arc_marginal(net.arc(a).distance, x[a], cp);
    Route toward = shortest_route(net, g);
    if (toward.path.empty()) {
      sol.saturated = true;
      sol.converged = true;
      sol.gap = 0.0;
      break;
    }
    const double toward_cost = route_cost(toward, g);

    Sum weighted;
    std::size_t away = 0;
    double away_cost = -kInf;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const double c = route_cost(active[i].route, g);
      weighted.add(active[i].flow * c);
      if (c > away_cost || (c == away_cost && active[i].route.path < active[away].route.path)) {
        away_cost = c;
        away = i;
      }
    }
    const double gap = weighted.value() - toward_cost;
    sol.gap = std::isfinite(f) ? std::max(0.0, gap) / f : kInf;
    if (std::isfinite(f) && sol.gap <= opts.tol) {
      sol.converged = true;
      break;
    }
    if (active[away].route.path == toward.path) {
      sol.converged = std::isfinite(f);
      break;
    }
    if (sol.iterations >= opts.max_iter) break;

    std::vector<double> delta(m, 0.0);
    for (auto a : toward.arcs) delta[a] += 1.0;
    for (auto a : active[away].route.arcs) delta[a] -= 1.0;
    std::vector<std::pair<std::size_t, double>> dir;
    double smax = active[away].flow;
    for (std::size_t a = 0; a < m; ++a) {
      if (delta[a] == 0.0) continue;
      dir.emplace_back(a, delta[a]);
      if (delta[a] > 0.0) smax = std::min(smax, (1.0 - kSaturationMargin - x[a]) / delta[a]);
    }
    if (!(smax > 0.0)) break;
    const double s = line_search(net, cp, x, dir, smax);
    if (!(s > 0.0)) break;

    const bool drop = s >= active[away].flow;
    if (drop) {
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(away));
    } else {
      active[away].flow -= s;
    }
    auto it = std::find_if(active.begin(), active.end(),
                           [&](const ActivePath& p) { return p.route.path == toward.path; });
    if (it == active.end()) {
      active.push_back({std::move(toward), s});
    } else {
      it->flow += s;
    }
    ++sol.iterations;
    x = loads_of(active, m);
    f = flow_objective(x, net, cp);
    sol.history.push_back(f);
  }

  sol.x = std::move(x);
  sol.parts = flow_objective_parts(sol.x, net, cp);
  sol.objective = sol.parts.total();
  for (const auto& p : active) sol.path_flows.push_back({p.route.path, p.flow});
  sol.path_flows = reduce_path_flows(std::move(sol.path_flows));
  return sol;
}

std::vector<double> flow_imbalance(std::span<const double> x, const Network& net) {
  if (x.size() != net.arc_count()) throw InvalidArgumentError("flow vector size does not match arc count");
  std::vector<double> b(net.node_count(), 0.0);
  for (std::size_t a = 0; a < x.size(); ++a) {
    b[static_cast<std::size_t>(net.arc(a).from - 1)] += x[a];
    b[static_cast<std::size_t>(net.arc(a).to - 1)] -= x[a];
  }
  return b;
}

namespace {

void check_conservation(std::span<const double> x, const Network& net) {
  const auto b = flow_imbalance(x, net);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto id = static_cast<NodeId>(i + 1);
    const double want = id == net.origin() ? 1.0 : id == net.destination() ? -1.0 : 0.0;
    if (std::abs(b[i] - want) > kConservationTol) {
      throw InvalidArgumentError("flow is not conserved at node " + std::to_string(id));
    }
  }
  for (double v : x) {
    if (v < -kConservationTol || v > 1.0 + kConservationTol) throw InvalidArgumentError("arc flow outside [0, 1]");
  }
}

// Widest origin-destination path over arcs with residual above the
// threshold. Equal bottlenecks keep the predecessor with the smaller id.
Route widest_route(const Network& net, const std::vector<double>& residual) {
  const std::size_t n = net.node_count();
  std::vector<double> width(n, 0.0);
  std::vector<std::size_t> pred_arc(n, SIZE_MAX);
  std::vector<bool> done(n, false);
  auto cmp = [](const std::pair<double, NodeId>& a, const std::pair<double, NodeId>& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  };
  std::priority_queue<std::pair<double, NodeId>, std::vector<std::pair<double, NodeId>>, decltype(cmp)> heap(cmp);
  width[static_cast<std::size_t>(net.origin() - 1)] = kInf;
  heap.emplace(kInf, net.origin());
  while (!heap.empty()) {
    const auto [wu, u] = heap.top();
    heap.pop();
    const auto ui = static_cast<std::size_t>(u - 1);
    if (done[ui]) continue;
    done[ui] = true;
    for (auto a : net.out_arcs(u)) {
      if (residual[a] <= kPositiveFlow) continue;
      const auto vi = static_cast<std::size_t>(net.arc(a).to - 1);
      if (done[vi]) continue;
      const double nw = std::min(wu, residual[a]);
      const bool tie_smaller = nw == width[vi] && pred_arc[vi] != SIZE_MAX && u < net.arc(pred_arc[vi]).from;
      if (nw > width[vi] || tie_smaller) {
        width[vi] = nw;
        pred_arc[vi] = a;
        heap.emplace(nw, net.arc(a).to);
      }
    }
  }
  Route r;
  if (pred_arc[static_cast<std::size_t>(net.destination() - 1)] == SIZE_MAX) return r;
  NodeId v = net.destination();
  r.path.nodes.push_back(v);
  while (v != net.origin()) {
    const auto a = pred_arc[static_cast<std::size_t>(v - 1)];
    r.arcs.push_back(a);
    v = net.arc(a).from;
    r.path.nodes.push_back(v);
  }
  std::reverse(r.path.nodes.begin(), r.path.nodes.end());
  std::reverse(r.arcs.begin(), r.arcs.end());
  return r;
}

}  // namespace

Decomposition decompose_paths(std::span<const double> x, const Network& net) {
  check_conservation(x, net);
  std::vector<double> residual(x.begin(), x.end());
  for (auto& v : residual) v = std::max(0.0, v);
  Decomposition out;
  for (;;) {
    Route r = widest_route(net, residual);
    if (r.path.empty()) break;
    double bottleneck = kInf;
    for (auto a : r.arcs) bottleneck = std::min(bottleneck, residual[a]);
    for (auto a : r.arcs) residual[a] -= bottleneck;
    // Zero the bottleneck arcs exactly so round-off cannot revive them.
    for (auto a : r.arcs) {
      if (residual[a] <= kPositiveFlow) residual[a] = 0.0;
    }
    out.paths.push_back({std::move(r.path), bottleneck});
  }
  Sum left;
  for (double v : residual) {
    if (v > kPositiveFlow) left.add(v);
  }
  out.cyclic_flow = left.value();
  if (out.cyclic_flow > kConservationTol) {
    out.warnings.push_back("stripped cyclic flow of total arc volume " + std::to_string(out.cyclic_flow));
  }
  return out;
}

double SubflowFlowEnergy::total_recharge() const {
  Sum s;
  for (double r : recharge) s.add(r);
  return s.value();
}

double SubflowFlowEnergy::total_consumption() const {
  Sum s;
  for (double e : arc_consumption) s.add(e);
  return s.value();
}

FlowEnergy reconstruct_flow_energy(const FlowSolution& sol, const Network& net, const CongestionParams& cp,
                                   std::span<const ChargingSpec> specs) {
  const std::size_t n = net.node_count();
  const std::size_t m = net.arc_count();
  if (sol.x.size() != m) throw InvalidArgumentError("flow vector size does not match arc count");
  auto positive = [&](std::size_t a) { return sol.x[a] > kPositiveFlow; };

  // Kahn's algorithm on the positive-flow subgraph, smallest id first.
  std::vector<int> indeg(n, 0);
  for (std::size_t a = 0; a < m; ++a) {
    if (positive(a)) ++indeg[static_cast<std::size_t>(net.arc(a).to - 1)];
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push(static_cast<NodeId>(i + 1));
  }
  std::vector<NodeId> order;
  while (!ready.empty()) {
    const NodeId u = ready.top();
    ready.pop();
    order.push_back(u);
    for (auto a : net.out_arcs(u)) {
      if (!positive(a)) continue;
      if (--indeg[static_cast<std::size_t>(net.arc(a).to - 1)] == 0) ready.push(net.arc(a).to);
    }
  }
  if (order.size() != n) throw InvalidArgumentError("positive flow contains a cycle");

  FlowEnergy out;
  for (const auto& spec : specs) {
    SubflowFlowEnergy s;
    s.arc_energy.assign(m, 0.0);
    s.arc_consumption.assign(m, 0.0);
    s.recharge.assign(n, 0.0);
    s.initial_energy = spec.initial_energy;
    for (std::size_t a = 0; a < m; ++a) {
      if (positive(a)) s.arc_consumption[a] = net.arc(a).energy * cp.subflow_rate() * sol.x[a];
    }
    for (NodeId u : order) {
      const auto ui = static_cast<std::size_t>(u - 1);
      Sum in;
      if (u == net.origin()) in.add(spec.initial_energy);
      for (auto a : net.in_arcs(u)) {
        if (positive(a)) in.add(s.arc_energy[a] - s.arc_consumption[a]);
      }
      double level = in.value();
      if (level < 0.0) {
        if (u != net.destination() && !net.node(u).has_charger) {
          throw InfeasibleError("node " + std::to_string(u) + " has no charger but its inflow runs short by " +
                                std::to_string(-level));
        }
        s.recharge[ui] = -level;
        level = 0.0;
      }
      if (u == net.destination()) {
        s.terminal_energy = level;
        continue;
      }
      Sum outflow;
      for (auto a : net.out_arcs(u)) {
        if (positive(a)) outflow.add(sol.x[a]);
      }
      const double total = outflow.value();
      if (total <= 0.0) continue;
      for (auto a : net.out_arcs(u)) {
        if (positive(a)) s.arc_energy[a] = level * sol.x[a] / total;
      }
    }
    out.subflows.push_back(std::move(s));
  }
  return out;
}

bool verify_lemma5(const FlowEnergy& energy) {
  for (const auto& s : energy.subflows) {
    const double lhs = s.total_recharge();
    const double rhs = s.total_consumption() + s.terminal_energy - s.initial_energy;
    if (std::abs(lhs - rhs) > 1e-9) return false;
    for (double e : s.arc_energy) {
      if (e < 0.0) return false;
    }
    for (double r : s.recharge) {
      if (r < 0.0) return false;
    }
  }
  return true;
}

}  // namespace evroute
