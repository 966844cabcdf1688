#pragma once

#include <cstdint>
#include <vector>

#include "evroute/congestion.hpp"
#include "evroute/flow_relaxation.hpp"
#include "evroute/instance.hpp"
#include "evroute/network.hpp"

namespace evroute {

struct InitialEnergyLaw {
  enum class Kind { Fixed, Uniform };
  Kind kind = Kind::Fixed;
  double lo = 0.0;  // the fixed value, or the lower bound
  double hi = 0.0;
};

struct SimConfig {
  double arrival_rate = 1.0;  // Poisson arrivals per minute at the origin
  std::size_t vehicles = 10000;
  std::uint64_t seed = 1;
  InitialEnergyLaw initial_energy;
  double capacity = 100.0;             // B
  double charge_time_per_unit = 1.0;   // g
  // Density on an arc is the number of entries during the last
  // window * t0 minutes divided by arrival_rate * window * t0, where t0 is
  // the free-flow traversal time. This is the calibration knob.
  double window = 3.0;
  double max_density = 0.95;
  // Test hook: when nonempty, vehicles follow these routes in the given
  // proportions instead of the per-node rotation.
  std::vector<PathFlow> forced_routes;

  static SimConfig from(const ModelParams& params);
  /// Throws ValidationError on out-of-range values.
  void validate() const;
};

struct RouteCount {
  Path path;
  std::size_t count = 0;
};

struct SimReport {
  std::size_t vehicles_completed = 0;
  std::size_t vehicles_stranded = 0;
  double mean_total_time = 0.0;
  double mean_travel_time = 0.0;
  double mean_charge_time = 0.0;
  std::vector<RouteCount> route_counts;  // lexicographic by path
  std::vector<std::size_t> arc_choices;  // departures per arc index
  std::size_t clamp_events = 0;          // arrivals where energy was capped at B
  std::size_t energy_violations = 0;     // per-vehicle balance failures
  double min_energy = 0.0;               // lowest energy seen at any event
};

/// Discrete-event run of the uncontrolled policy: every node rotates through
/// its outgoing arcs that can still reach the destination, and every vehicle
/// charges exactly the shortfall for the next arc before leaving a node.
/// Arc travel time is t0 / (1 - k^p)^q with the windowed density k capped at
/// max_density. Same config and seed give the same report.
SimReport simulate_round_robin(const Network& net, const CongestionParams& cp, const SimConfig& cfg);

struct PolicyComparison {
  SimReport baseline;
  FlowSolution optimal;
  double optimal_objective = 0.0;  // per vehicle: flow objective / R
  double improvement_pct = 0.0;
};

/// Baseline simulation against the relaxed optimum on the same instance.
PolicyComparison compare_policies(const Network& net, const CongestionParams& cp, const SimConfig& cfg,
                                  const FlowOptions& flow_opts = {});

}  // namespace evroute
