#pragma once

#include <span>
#include <string>
#include <vector>

#include "evroute/congestion.hpp"
#include "evroute/network.hpp"

namespace evroute {

/// Cost of the combined flow on one arc as a function of its fraction x:
/// d R x / (v_f (1 - x^p)^q) + eg d R x. +infinity for x >= 1 when d > 0.
double relaxed_arc_cost(double distance, double x, const CongestionParams& cp);
/// First derivative of relaxed_arc_cost in x (the marginal cost).
double relaxed_arc_marginal(double distance, double x, const CongestionParams& cp);
/// Second derivative of relaxed_arc_cost in x.
double relaxed_arc_curvature(double distance, double x, const CongestionParams& cp);

struct FlowParts {
  double travel = 0.0;    // congestion time on arcs
  double charging = 0.0;  // time at charging stations
  [[nodiscard]] double total() const { return travel + charging; }
};

/// Objective of a combined arc-flow vector indexed like Network::arcs().
FlowParts flow_objective_parts(std::span<const double> x, const Network& net, const CongestionParams& cp);
double flow_objective(std::span<const double> x, const Network& net, const CongestionParams& cp);

struct PathFlow {
  Path path;
  double fraction = 0.0;
};

struct FlowSolution {
  std::vector<double> x;  // per arc, in [0, 1]
  double objective = 0.0;
  FlowParts parts;
  // Active paths of the solver, largest fraction first. Path splits of a
  // given arc flow are not unique; among equivalent splits over the active
  // paths, flow is shifted toward routes with fewer hops.
  std::vector<PathFlow> path_flows;
  int iterations = 0;
  double gap = 0.0;  // final duality gap relative to the objective
  bool converged = false;
  // Every origin-destination path crosses an arc that carries the whole
  // flow, so the optimum itself is +infinity.
  bool saturated = false;
  std::vector<double> history;  // objective after each iteration, starting with the initial point
};

struct FlowOptions {
  double tol = 1e-6;
  int max_iter = 10000;
};

/// System-optimal combined flow by a pairwise conditional-gradient method in
/// path space: each iteration moves flow from the costliest active path to
/// the marginal-cost shortest path with an exact line search. Starts from
/// the free-flow shortest path. Returns the best iterate with
/// converged = false when max_iter is reached.
FlowSolution solve_flow(const Network& net, const CongestionParams& cp, const FlowOptions& opts = {});

/// Net outflow minus inflow at every node, indexed by node id - 1.
std::vector<double> flow_imbalance(std::span<const double> x, const Network& net);

struct Decomposition {
  std::vector<PathFlow> paths;  // extraction order
  double cyclic_flow = 0.0;     // flow left on cycles and discarded
  std::vector<std::string> warnings;
};

/// Splits a conserving unit flow into paths by repeatedly extracting the
/// widest (maximum bottleneck) origin-destination path. Throws
/// InvalidArgumentError when x does not conserve flow within 1e-6.
Decomposition decompose_paths(std::span<const double> x, const Network& net);

/// Energy bookkeeping of one subflow over the relaxed flow.
struct SubflowFlowEnergy {
  std::vector<double> arc_energy;       // E_ij: energy carried onto each arc
  std::vector<double> arc_consumption;  // e_ij * (R/N) * x_ij
  std::vector<double> recharge;         // r_i per node, indexed by id - 1
  double initial_energy = 0.0;
  double terminal_energy = 0.0;  // energy left at the destination

  [[nodiscard]] double total_recharge() const;
  [[nodiscard]] double total_consumption() const;
};

struct FlowEnergy {
  std::vector<SubflowFlowEnergy> subflows;
};

/// Forward pass over the positive-flow arcs in topological order. Each node
/// gathers the residual energy of its incoming arcs, charges the minimum
/// needed to make it nonnegative, and splits what it sends on pro rata to
/// the outgoing flow. Deficits on arcs into the destination are settled at
/// the destination. Throws InfeasibleError when a node without charger runs
/// short and InvalidArgumentError when the positive flow has a cycle.
FlowEnergy reconstruct_flow_energy(const FlowSolution& sol, const Network& net, const CongestionParams& cp,
                                   std::span<const ChargingSpec> specs);

/// sum r = sum e(x) + terminal - initial, per subflow, within 1e-9.
bool verify_lemma5(const FlowEnergy& energy);

}  // namespace evroute
