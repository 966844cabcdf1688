#pragma once

#include <optional>
#include <vector>

#include "evroute/network.hpp"

namespace evroute {

enum class RechargePolicy { MinimalTotal, PriceOptimal };

/// Energy view of one path: what each arc consumes and where charging is
/// possible. Node-indexed vectors have one entry per path node; arc_energy
/// has one fewer.
struct LegProfile {
  std::vector<double> arc_energy;
  std::vector<bool> can_charge;
  std::vector<double> price;

  [[nodiscard]] std::size_t node_count() const noexcept { return can_charge.size(); }
};

/// Builds the LegProfile of `p`. The final node never charges.
LegProfile leg_profile(const Network& net, const Path& p);

/// Recharge amounts and the resulting residual energies along a path.
struct RechargeSchedule {
  std::vector<double> recharge;  // r_i, one per path node (last is 0)
  std::vector<double> residual;  // E_i on arrival at each path node
  // Recuperated energy lost because the battery was already full.
  double discarded = 0.0;

  [[nodiscard]] double total() const;
  [[nodiscard]] double cost(const LegProfile& leg) const;
};

/// Runs the energy dynamics E_{i+1} = min(B, E_i + r_i - e_i) for given
/// recharges. Throws InfeasibleError if energy would go negative, a charge
/// would overfill the battery, or a node without charger is asked to charge.
RechargeSchedule apply_recharges(const LegProfile& leg, double capacity, double initial_energy,
                                 std::vector<double> recharge);

/// Just-in-time charging: at each charger top up exactly what the stretch to
/// the next charger needs. Minimises the total recharge.
RechargeSchedule min_feasible_recharge(const LegProfile& leg, double capacity, double initial_energy);
RechargeSchedule min_feasible_recharge(const Path& p, const Network& net, const ChargingSpec& spec);

/// Cheapest recharge plan for the given station prices (capacitated
/// gas-station structure). Among cost-optimal plans it also minimises the
/// total recharge, so charging time is unaffected by the pricing.
RechargeSchedule price_optimal_recharge(const LegProfile& leg, double capacity, double initial_energy);
RechargeSchedule price_optimal_recharge(const Path& p, const Network& net, const ChargingSpec& spec);

struct RoutePlan {
  Path path;
  std::vector<double> arc_energy;  // e along the path, for bookkeeping checks
  std::vector<double> recharges;
  std::vector<double> residuals;
  double discarded = 0.0;
  double travel_time = 0.0;
  double charge_time = 0.0;
  double charging_cost = 0.0;
  double objective = 0.0;  // travel_time + charge_time
  bool zero_recharge = false;  // selected without any recharging

  [[nodiscard]] double total_recharge() const;
};

/// Minimum-weight path for w = tau + g * e, tolerating negative weights.
/// Ties go to the lexicographically smallest node sequence. Throws
/// NegativeCycleError when a negative cycle sits on an origin-destination walk.
Path shortest_path_combined(const Network& net, double g);

/// Minimum-time path that needs no recharging at all, with energy kept in
/// [0, B] at every node. Returns nullopt when none exists.
std::optional<Path> energy_feasible_shortest_path(const Network& net, const ChargingSpec& spec);

/// Route and recharge plan minimising travel plus charging time.
RoutePlan plan_route(const Network& net, const ChargingSpec& spec, RechargePolicy policy);

/// Checks sum(r_i - e_i) - discarded == E_n - E_1 to 1e-9, and that the
/// residuals start at the given initial energy.
bool verify_lemma1(const RoutePlan& plan, const ChargingSpec& spec);

}  // namespace evroute
