#include "evroute/single_vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "evroute/errors.hpp"

namespace evroute {

namespace {

constexpr double kEnergyTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string at_node(const LegProfile& /*leg*/, std::size_t pos) {
  return "path position " + std::to_string(pos + 1);
}

}  // namespace

double RechargeSchedule::total() const { return std::accumulate(recharge.begin(), recharge.end(), 0.0); }

double RechargeSchedule::cost(const LegProfile& leg) const {
  double c = 0.0;
  for (std::size_t i = 0; i < recharge.size(); ++i) c += leg.price[i] * recharge[i];
  return c;
}

double RoutePlan::total_recharge() const { return std::accumulate(recharges.begin(), recharges.end(), 0.0); }

LegProfile leg_profile(const Network& net, const Path& p) {
  check_path(net, p);
  LegProfile leg;
  for (std::size_t a : net.path_arcs(p)) leg.arc_energy.push_back(net.arc(a).energy);
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const Node& node = net.node(p.nodes[i]);
    bool last = i + 1 == p.nodes.size();
    leg.can_charge.push_back(node.has_charger && !last);
    leg.price.push_back(node.price);
  }
  return leg;
}

RechargeSchedule apply_recharges(const LegProfile& leg, double capacity, double initial_energy,
                                 std::vector<double> recharge) {
  const std::size_t n = leg.node_count();
  if (recharge.size() != n || leg.arc_energy.size() + 1 != n) {
    throw InvalidArgumentError("recharge vector does not match the path length");
  }
  RechargeSchedule s;
  s.recharge = std::move(recharge);
  s.residual.assign(n, 0.0);
  double e = initial_energy;
  for (std::size_t i = 0; i < n; ++i) {
    s.residual[i] = e;
    double r = s.recharge[i];
    if (r < -kEnergyTol) throw InfeasibleError("negative recharge at " + at_node(leg, i));
    if (r > kEnergyTol && !leg.can_charge[i]) throw InfeasibleError("no charger at " + at_node(leg, i));
    if (e + r > capacity + kEnergyTol) throw InfeasibleError("recharge overfills the battery at " + at_node(leg, i));
    if (i + 1 == n) break;
    double next = e + r - leg.arc_energy[i];
    if (next < -kEnergyTol) throw InfeasibleError("energy runs out after " + at_node(leg, i));
    next = std::max(next, 0.0);
    if (next > capacity) {
      s.discarded += next - capacity;
      next = capacity;
    }
    e = next;
  }
  return s;
}

RechargeSchedule min_feasible_recharge(const LegProfile& leg, double capacity, double initial_energy) {
  const std::size_t n = leg.node_count();
  const std::size_t m = leg.arc_energy.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (leg.arc_energy[i] > capacity) {
      throw InfeasibleError("arc energy exceeds battery capacity after " + at_node(leg, i));
    }
  }
  // need[i]: minimum energy on departure from node i that carries the vehicle
  // to the next charger (or the end) without recharging.
  std::vector<double> need(n, 0.0);
  for (std::size_t i = m; i-- > 0;) {
    double downstream = (i + 1 < n && !leg.can_charge[i + 1]) ? need[i + 1] : 0.0;
    need[i] = std::max(0.0, leg.arc_energy[i] + downstream);
    if (need[i] > capacity + kEnergyTol) {
      throw InfeasibleError("stretch without chargers from " + at_node(leg, i) + " exceeds battery capacity");
    }
  }
  std::vector<double> r(n, 0.0);
  double e = initial_energy;
  for (std::size_t i = 0; i < m; ++i) {
    if (leg.can_charge[i]) r[i] = std::min(std::max(0.0, need[i] - e), capacity - e);
    double next = e + r[i] - leg.arc_energy[i];
    if (next < -kEnergyTol) throw InfeasibleError("energy runs out after " + at_node(leg, i));
    e = std::min(std::max(next, 0.0), capacity);
  }
  return apply_recharges(leg, capacity, initial_energy, std::move(r));
}

RechargeSchedule min_feasible_recharge(const Path& p, const Network& net, const ChargingSpec& spec) {
  return min_feasible_recharge(leg_profile(net, p), spec.capacity, spec.initial_energy);
}

namespace {

// One parcel of energy in the tank. Purchased parcels stay provisional until
// they are burnt; provisional ones can be returned when cheaper energy shows
// up, which is what makes the greedy exact.
struct Parcel {
  bool purchased = false;
  double price = 0.0;
  std::size_t station = 0;
  double amount = 0.0;
};

// Free energy (initial charge, recuperation) burns first and is returned last.
bool burns_before(const Parcel& a, const Parcel& b) {
  if (a.purchased != b.purchased) return !a.purchased;
  if (a.price != b.price) return a.price < b.price;
  return a.station < b.station;
}

}  // namespace

RechargeSchedule price_optimal_recharge(const LegProfile& leg, double capacity, double initial_energy) {
  const std::size_t n = leg.node_count();
  const std::size_t m = leg.arc_energy.size();
  // Validates reachability with the same errors the minimal policy raises.
  (void)min_feasible_recharge(leg, capacity, initial_energy);

  std::vector<double> committed(n, 0.0);
  std::vector<Parcel> tank;
  if (initial_energy > 0.0) tank.push_back({false, 0.0, 0, initial_energy});
  auto level = [&tank] {
    double s = 0.0;
    for (const Parcel& p : tank) s += p.amount;
    return s;
  };

  for (std::size_t i = 0; i < m; ++i) {
    if (leg.can_charge[i]) {
      std::erase_if(tank, [&](const Parcel& p) { return p.purchased && p.price > leg.price[i]; });
      double room = capacity - level();
      if (room > 0.0) tank.push_back({true, leg.price[i], i, room});
    }
    std::sort(tank.begin(), tank.end(), burns_before);
    double e = leg.arc_energy[i];
    if (e >= 0.0) {
      for (Parcel& p : tank) {
        if (e <= 0.0) break;
        double take = std::min(p.amount, e);
        p.amount -= take;
        e -= take;
        if (p.purchased) committed[p.station] += take;
      }
      if (e > kEnergyTol) throw InfeasibleError("energy runs out after " + at_node(leg, i));
      std::erase_if(tank, [](const Parcel& p) { return p.amount <= 0.0; });
    } else {
      tank.push_back({false, 0.0, 0, -e});
      std::sort(tank.begin(), tank.end(), burns_before);
      double excess = level() - capacity;
      // Return the most expensive provisional energy first, then spill.
      for (auto it = tank.rbegin(); it != tank.rend() && excess > 0.0; ++it) {
        double drop = std::min(it->amount, excess);
        it->amount -= drop;
        excess -= drop;
      }
      std::erase_if(tank, [](const Parcel& p) { return p.amount <= 0.0; });
    }
  }
  return apply_recharges(leg, capacity, initial_energy, std::move(committed));
}

RechargeSchedule price_optimal_recharge(const Path& p, const Network& net, const ChargingSpec& spec) {
  return price_optimal_recharge(leg_profile(net, p), spec.capacity, spec.initial_energy);
}

Path shortest_path_combined(const Network& net, double g) {
  const std::size_t n = net.node_count();
  auto weight = [&net, g](std::size_t a) { return net.arc(a).travel_time + net.arc(a).energy * g; };

  // Distances to the destination (Bellman-Ford on the reversed graph).
  std::vector<double> h(n, kInf);
  h[static_cast<std::size_t>(net.destination() - 1)] = 0.0;
  bool changed = true;
  for (std::size_t round = 0; round + 1 < n && changed; ++round) {
    changed = false;
    for (std::size_t a = 0; a < net.arc_count(); ++a) {
      auto u = static_cast<std::size_t>(net.arc(a).from - 1);
      auto v = static_cast<std::size_t>(net.arc(a).to - 1);
      if (h[v] == kInf) continue;
      double cand = weight(a) + h[v];
      if (cand < h[u]) {
        h[u] = cand;
        changed = true;
      }
    }
  }
  // Nodes that can still improve reach a negative cycle that reaches the
  // destination; it only matters if the origin can get there.
  std::vector<bool> unbounded(n, false);
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    auto u = static_cast<std::size_t>(net.arc(a).from - 1);
    auto v = static_cast<std::size_t>(net.arc(a).to - 1);
    if (h[v] != kInf && weight(a) + h[v] < h[u] - 1e-12 * (1.0 + std::abs(h[u]))) unbounded[u] = true;
  }
  if (std::any_of(unbounded.begin(), unbounded.end(), [](bool b) { return b; })) {
    std::vector<bool> reach(n, false);
    std::vector<NodeId> stack{net.origin()};
    reach[static_cast<std::size_t>(net.origin() - 1)] = true;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      if (unbounded[static_cast<std::size_t>(u - 1)]) {
        throw NegativeCycleError("negative cycle of tau + g*e reachable on an origin-destination walk");
      }
      for (std::size_t a : net.out_arcs(u)) {
        auto v = static_cast<std::size_t>(net.arc(a).to - 1);
        if (!reach[v]) {
          reach[v] = true;
          stack.push_back(net.arc(a).to);
        }
      }
    }
  }
  if (h[static_cast<std::size_t>(net.origin() - 1)] == kInf) {
    throw InfeasibleError("destination unreachable from origin");
  }

  // Lexicographically smallest simple path over tight arcs.
  auto tight = [&](std::size_t a) {
    auto u = static_cast<std::size_t>(net.arc(a).from - 1);
    auto v = static_cast<std::size_t>(net.arc(a).to - 1);
    if (h[v] == kInf) return false;
    return std::abs(weight(a) + h[v] - h[u]) <= 1e-12 * (1.0 + std::abs(h[u]) + std::abs(weight(a)));
  };
  Path path{{net.origin()}};
  std::vector<bool> on_path(n, false);
  on_path[static_cast<std::size_t>(net.origin() - 1)] = true;
  std::vector<std::size_t> cursor{0};
  while (path.nodes.back() != net.destination()) {
    NodeId u = path.nodes.back();
    const auto& outs = net.out_arcs(u);
    std::size_t& pos = cursor.back();
    bool advanced = false;
    while (pos < outs.size()) {
      std::size_t a = outs[pos++];
      NodeId v = net.arc(a).to;
      if (on_path[static_cast<std::size_t>(v - 1)] || !tight(a)) continue;
      on_path[static_cast<std::size_t>(v - 1)] = true;
      path.nodes.push_back(v);
      cursor.push_back(0);
      advanced = true;
      break;
    }
    if (!advanced) {
      if (path.nodes.size() == 1) throw InfeasibleError("no simple shortest path found");
      on_path[static_cast<std::size_t>(u - 1)] = false;
      path.nodes.pop_back();
      cursor.pop_back();
    }
  }
  return path;
}

namespace {

struct Label {
  double time = 0.0;
  double energy = 0.0;
  std::vector<NodeId> nodes;
  std::vector<std::uint64_t> visited;
};

bool subset(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] & ~b[i]) != 0) return false;
  }
  return true;
}

bool dominates(const Label& a, const Label& b) {
  if (a.time > b.time || a.energy < b.energy || !subset(a.visited, b.visited)) return false;
  if (a.time < b.time || a.energy > b.energy) return true;
  return a.nodes <= b.nodes;
}

}  // namespace

std::optional<Path> energy_feasible_shortest_path(const Network& net, const ChargingSpec& spec) {
  const std::size_t n = net.node_count();
  const std::size_t words = (n + 63) / 64;
  auto mark = [](std::vector<std::uint64_t>& bits, NodeId id) {
    auto i = static_cast<std::size_t>(id - 1);
    bits[i / 64] |= std::uint64_t{1} << (i % 64);
  };
  auto marked = [](const std::vector<std::uint64_t>& bits, NodeId id) {
    auto i = static_cast<std::size_t>(id - 1);
    return (bits[i / 64] >> (i % 64)) & 1U;
  };
  const auto useful = net.useful_nodes();

  // Labels are kept in a pool; the heap orders them by (time, node sequence).
  std::vector<Label> pool;
  auto cmp = [&pool](std::size_t x, std::size_t y) {
    if (pool[x].time != pool[y].time) return pool[x].time > pool[y].time;
    return pool[x].nodes > pool[y].nodes;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
  std::vector<std::vector<std::size_t>> frontier(n);

  Label start;
  start.energy = spec.initial_energy;
  start.nodes = {net.origin()};
  start.visited.assign(words, 0);
  mark(start.visited, net.origin());
  pool.push_back(start);
  heap.push(0);
  frontier[static_cast<std::size_t>(net.origin() - 1)].push_back(0);

  std::vector<bool> dead;
  dead.push_back(false);
  while (!heap.empty()) {
    std::size_t id = heap.top();
    heap.pop();
    if (dead[id]) continue;
    NodeId u = pool[id].nodes.back();
    if (u == net.destination()) return Path{pool[id].nodes};
    for (std::size_t a : net.out_arcs(u)) {
      const Arc& arc = net.arc(a);
      if (!useful[static_cast<std::size_t>(arc.to - 1)] || marked(pool[id].visited, arc.to)) continue;
      if (pool[id].energy < arc.energy - kEnergyTol) continue;
      Label next;
      next.time = pool[id].time + arc.travel_time;
      next.energy = std::min(spec.capacity, std::max(0.0, pool[id].energy - arc.energy));
      next.nodes = pool[id].nodes;
      next.nodes.push_back(arc.to);
      next.visited = pool[id].visited;
      mark(next.visited, arc.to);

      auto& bucket = frontier[static_cast<std::size_t>(arc.to - 1)];
      bool dominated = std::any_of(bucket.begin(), bucket.end(),
                                   [&](std::size_t other) { return !dead[other] && dominates(pool[other], next); });
      if (dominated) continue;
      for (std::size_t other : bucket) {
        if (!dead[other] && dominates(next, pool[other])) dead[other] = true;
      }
      std::erase_if(bucket, [&](std::size_t other) { return dead[other]; });
      pool.push_back(std::move(next));
      dead.push_back(false);
      bucket.push_back(pool.size() - 1);
      heap.push(pool.size() - 1);
    }
  }
  return std::nullopt;
}

namespace {

RechargeSchedule recharge_with(RechargePolicy policy, const LegProfile& leg, const ChargingSpec& spec) {
  return policy == RechargePolicy::PriceOptimal
             ? price_optimal_recharge(leg, spec.capacity, spec.initial_energy)
             : min_feasible_recharge(leg, spec.capacity, spec.initial_energy);
}

RoutePlan make_plan(const Network& net, const Path& p, const LegProfile& leg, RechargeSchedule s,
                    const ChargingSpec& spec) {
  RoutePlan plan;
  plan.path = p;
  plan.arc_energy = leg.arc_energy;
  plan.travel_time = path_metrics(net, p).total_time;
  plan.charging_cost = s.cost(leg);
  plan.recharges = std::move(s.recharge);
  plan.residuals = std::move(s.residual);
  plan.discarded = s.discarded;
  plan.charge_time = spec.charge_time_per_unit * plan.total_recharge();
  plan.objective = plan.travel_time + plan.charge_time;
  return plan;
}

}  // namespace

RoutePlan plan_route(const Network& net, const ChargingSpec& spec, RechargePolicy policy) {
  std::optional<RoutePlan> no_charge;
  if (auto p = energy_feasible_shortest_path(net, spec)) {
    LegProfile leg = leg_profile(net, *p);
    no_charge = make_plan(net, *p, leg, apply_recharges(leg, spec.capacity, spec.initial_energy,
                                                        std::vector<double>(leg.node_count(), 0.0)),
                          spec);
    no_charge->zero_recharge = true;
  }

  std::optional<RoutePlan> charged;
  const double g = spec.charge_time_per_unit;
  Path best = shortest_path_combined(net, g);
  try {
    LegProfile leg = leg_profile(net, best);
    charged = make_plan(net, best, leg, recharge_with(policy, leg, spec), spec);
  } catch (const InfeasibleError&) {
    // Missing chargers can make the combined-weight path unusable; fall back
    // to the cheapest feasible simple path.
    std::vector<std::pair<double, Path>> ranked;
    for (Path& p : enumerate_simple_paths(net)) {
      double w = 0.0;
      for (std::size_t a : net.path_arcs(p)) w += net.arc(a).travel_time + net.arc(a).energy * g;
      ranked.emplace_back(w, std::move(p));
    }
    std::sort(ranked.begin(), ranked.end());
    for (const auto& [w, p] : ranked) {
      try {
        LegProfile leg = leg_profile(net, p);
        charged = make_plan(net, p, leg, recharge_with(policy, leg, spec), spec);
        break;
      } catch (const InfeasibleError&) {
      }
    }
  }

  if (!charged && !no_charge) throw InfeasibleError("no path admits a feasible recharge plan");
  if (!charged) return *no_charge;
  if (no_charge && no_charge->objective <= charged->objective) return *no_charge;
  return *charged;
}

bool verify_lemma1(const RoutePlan& plan, const ChargingSpec& spec) {
  const std::size_t n = plan.path.size();
  if (n == 0 || plan.recharges.size() != n || plan.residuals.size() != n || plan.arc_energy.size() + 1 != n) {
    return false;
  }
  if (std::abs(plan.residuals.front() - spec.initial_energy) > kEnergyTol) return false;
  double lhs = -plan.discarded;
  for (std::size_t i = 0; i + 1 < n; ++i) lhs += plan.recharges[i] - plan.arc_energy[i];
  lhs += plan.recharges.back();
  double rhs = plan.residuals.back() - plan.residuals.front();
  if (std::abs(lhs - rhs) > kEnergyTol) return false;
  // The dynamics must also hold step by step (catches stale residuals).
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double next = plan.residuals[i] + plan.recharges[i] - plan.arc_energy[i];
    next = std::min(next, spec.capacity);
    if (std::abs(next - plan.residuals[i + 1]) > kEnergyTol) return false;
  }
  return true;
}

}  // namespace evroute
