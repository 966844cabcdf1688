#include "evroute/baseline_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <random>
#include <tuple>

#include "evroute/errors.hpp"

namespace evroute {

namespace {

constexpr double kEnergyTol = 1e-9;

enum class EventKind { ArriveNode, EnterArc };

struct Event {
  double time = 0.0;
  std::size_t vehicle = 0;
  EventKind kind = EventKind::ArriveNode;
  NodeId node = 0;      // for ArriveNode
  std::size_t arc = 0;  // for EnterArc, and the arc just left for ArriveNode

  friend bool operator>(const Event& a, const Event& b) {
    return std::tie(a.time, a.vehicle) > std::tie(b.time, b.vehicle);
  }
};

struct Vehicle {
  double start = 0.0;
  double energy = 0.0;
  double initial = 0.0;
  double recharged = 0.0;
  double consumed = 0.0;
  double discarded = 0.0;
  double travel = 0.0;
  double charge = 0.0;
  Path path;
  std::size_t forced = SIZE_MAX;  // index into forced routes
  std::size_t hop = 0;
};

}  // namespace

SimConfig SimConfig::from(const ModelParams& params) {
  SimConfig cfg;
  cfg.arrival_rate = params.inflow_rate;
  cfg.capacity = params.capacity;
  cfg.charge_time_per_unit = params.charge_time_per_unit;
  cfg.initial_energy = {InitialEnergyLaw::Kind::Fixed, params.initial_energy, params.initial_energy};
  return cfg;
}

void SimConfig::validate() const {
  if (!(arrival_rate > 0.0)) throw ValidationError("arrival rate must be positive");
  if (vehicles == 0) throw ValidationError("vehicle count must be positive");
  if (!(capacity > 0.0)) throw ValidationError("capacity must be positive");
  if (!(charge_time_per_unit >= 0.0)) throw ValidationError("g must be nonnegative");
  if (!(window > 0.0)) throw ValidationError("density window must be positive");
  if (!(max_density > 0.0 && max_density < 1.0)) throw ValidationError("max density must lie in (0, 1)");
  if (initial_energy.lo < 0.0 || initial_energy.lo > capacity) {
    throw ValidationError("initial energy must lie in [0, B]");
  }
  if (initial_energy.kind == InitialEnergyLaw::Kind::Uniform &&
      (initial_energy.hi < initial_energy.lo || initial_energy.hi > capacity)) {
    throw ValidationError("uniform initial energy bounds must satisfy lo <= hi <= B");
  }
  double total = 0.0;
  for (const auto& r : forced_routes) {
    if (r.fraction < 0.0) throw ValidationError("forced route fractions must be nonnegative");
    total += r.fraction;
  }
  if (!forced_routes.empty() && !(total > 0.0)) throw ValidationError("forced route fractions sum to zero");
}

SimReport simulate_round_robin(const Network& net, const CongestionParams& cp, const SimConfig& cfg) {
  cp.validate();
  cfg.validate();
  for (const auto& r : cfg.forced_routes) check_path(net, r.path);

  const auto useful = net.useful_nodes();
  std::vector<std::vector<std::size_t>> eligible(net.node_count());
  for (const auto& node : net.nodes()) {
    for (auto a : net.out_arcs(node.id)) {
      if (useful[static_cast<std::size_t>(net.arc(a).to - 1)]) eligible[static_cast<std::size_t>(node.id - 1)].push_back(a);
    }
  }
  std::vector<std::vector<std::size_t>> forced_arcs;
  double forced_total = 0.0;
  for (const auto& r : cfg.forced_routes) {
    forced_arcs.push_back(net.path_arcs(r.path));
    forced_total += r.fraction;
  }
  std::vector<std::size_t> forced_assigned(cfg.forced_routes.size(), 0);

  std::mt19937_64 rng(cfg.seed);
  std::exponential_distribution<double> gap(cfg.arrival_rate);
  std::uniform_real_distribution<double> energy_law(cfg.initial_energy.lo, cfg.initial_energy.hi);

  std::vector<Vehicle> vehicles(cfg.vehicles);
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  double clock = 0.0;
  for (std::size_t v = 0; v < cfg.vehicles; ++v) {
    clock += gap(rng);
    auto& veh = vehicles[v];
    veh.start = clock;
    veh.initial = cfg.initial_energy.kind == InitialEnergyLaw::Kind::Uniform ? energy_law(rng) : cfg.initial_energy.lo;
    veh.energy = veh.initial;
    if (!cfg.forced_routes.empty()) {
      // Smooth weighted rotation: the route furthest behind its share goes next.
      std::size_t pick = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < cfg.forced_routes.size(); ++i) {
        const double lag = cfg.forced_routes[i].fraction / forced_total * static_cast<double>(v + 1) -
                           static_cast<double>(forced_assigned[i]);
        if (lag > best) {
          best = lag;
          pick = i;
        }
      }
      ++forced_assigned[pick];
      veh.forced = pick;
    }
    events.push({clock, v, EventKind::ArriveNode, net.origin(), SIZE_MAX});
  }

  SimReport report;
  report.arc_choices.assign(net.arc_count(), 0);
  report.min_energy = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> rotation(net.node_count(), 0);
  std::vector<std::deque<double>> entries(net.arc_count());
  std::map<Path, std::size_t> routes;
  double sum_travel = 0.0;
  double sum_charge = 0.0;
  const std::size_t hop_limit = 4 * net.node_count();

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    auto& veh = vehicles[ev.vehicle];

    if (ev.kind == EventKind::EnterArc) {
      const Arc& arc = net.arc(ev.arc);
      const double t0 = arc.travel_time;
      const double span = cfg.window * t0;
      auto& q = entries[ev.arc];
      while (!q.empty() && q.front() <= ev.time - span) q.pop_front();
      const double density = std::min(static_cast<double>(q.size()) / (cfg.arrival_rate * span), cfg.max_density);
      q.push_back(ev.time);
      const double tt = t0 * congestion_factor(density, cp.p_exp, cp.q_exp);
      veh.travel += tt;
      events.push({ev.time + tt, ev.vehicle, EventKind::ArriveNode, arc.to, ev.arc});
      continue;
    }

    if (ev.arc != SIZE_MAX) {
      const Arc& arc = net.arc(ev.arc);
      double next = veh.energy - arc.energy;
      veh.consumed += arc.energy;
      if (next > cfg.capacity) {
        veh.discarded += next - cfg.capacity;
        next = cfg.capacity;
        ++report.clamp_events;
      }
      veh.energy = next;
    }
    report.min_energy = std::min(report.min_energy, veh.energy);
    veh.path.nodes.push_back(ev.node);

    if (ev.node == net.destination()) {
      const double expected = veh.initial + veh.recharged - veh.consumed - veh.discarded;
      if (std::abs(expected - veh.energy) > kEnergyTol * std::max(1.0, std::abs(expected)) || veh.energy < -kEnergyTol) {
        ++report.energy_violations;
      }
      ++report.vehicles_completed;
      sum_travel += veh.travel;
      sum_charge += veh.charge;
      ++routes[veh.path];
      continue;
    }

    std::size_t arc_index = SIZE_MAX;
    if (veh.forced != SIZE_MAX) {
      arc_index = forced_arcs[veh.forced][veh.hop];
    } else {
      const auto& options = eligible[static_cast<std::size_t>(ev.node - 1)];
      auto& turn = rotation[static_cast<std::size_t>(ev.node - 1)];
      if (!options.empty() && veh.hop < hop_limit) {
        arc_index = options[turn % options.size()];
        ++turn;
      }
    }
    if (arc_index == SIZE_MAX) {
      ++report.vehicles_stranded;
      continue;
    }
    ++veh.hop;
    ++report.arc_choices[arc_index];
    const Arc& arc = net.arc(arc_index);
    if (arc.energy > cfg.capacity) {
      ++report.vehicles_stranded;
      continue;
    }
    const double need = std::max(0.0, arc.energy - veh.energy);
    if (need > 0.0 && !net.node(ev.node).has_charger) {
      ++report.vehicles_stranded;
      continue;
    }
    // Topping up to exactly the arc energy keeps the arrival level at 0 without rounding below it.
    if (need > 0.0) veh.energy = arc.energy;
    veh.recharged += need;
    const double wait = cfg.charge_time_per_unit * need;
    veh.charge += wait;
    events.push({ev.time + wait, ev.vehicle, EventKind::EnterArc, 0, arc_index});
  }

  if (report.vehicles_completed > 0) {
    const auto n = static_cast<double>(report.vehicles_completed);
    report.mean_travel_time = sum_travel / n;
    report.mean_charge_time = sum_charge / n;
    report.mean_total_time = report.mean_travel_time + report.mean_charge_time;
  }
  if (!std::isfinite(report.min_energy)) report.min_energy = 0.0;
  for (const auto& [p, c] : routes) report.route_counts.push_back({p, c});
  return report;
}

PolicyComparison compare_policies(const Network& net, const CongestionParams& cp, const SimConfig& cfg,
                                  const FlowOptions& flow_opts) {
  PolicyComparison out;
  out.baseline = simulate_round_robin(net, cp, cfg);
  out.optimal = solve_flow(net, cp, flow_opts);
  out.optimal_objective = out.optimal.objective / cp.inflow_rate;
  if (out.baseline.vehicles_completed == 0) throw InfeasibleError("no simulated vehicle reached the destination");
  out.improvement_pct =
      (out.baseline.mean_total_time - out.optimal_objective) / out.baseline.mean_total_time * 100.0;
  return out;
}

}  // namespace evroute
