#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evroute/congestion.hpp"
#include "evroute/network.hpp"
#include "evroute/single_vehicle.hpp"

namespace evroute {

/// Minutes subflow k spends on an arc of length `distance` when it routes
/// `own_fraction` of itself there and `load` subflows use the arc:
/// d * x * (R/N) / (v_f * (1 - (load/N)^p)^q). +infinity once load reaches N.
double arc_time(double distance, double own_fraction, double load, const CongestionParams& cp);

/// One end-to-end path per subflow plus the induced per-arc subflow counts.
struct SubflowAssignment {
  std::vector<Path> paths;
  std::vector<double> arc_loads;  // indexed like Network::arcs()

  /// Builds the assignment and its loads; validates every path.
  static SubflowAssignment from_paths(const Network& net, std::vector<Path> paths);
};

/// Time-on-arcs and time-at-chargers parts of the subflow objective.
struct ObjectiveParts {
  double travel = 0.0;
  double charging = 0.0;
  [[nodiscard]] double total() const { return travel + charging; }
};

/// Objective for given per-arc subflow counts. Saturated arcs contribute
/// +infinity to the travel part.
ObjectiveParts objective_from_loads(std::span<const double> loads, const Network& net, const CongestionParams& cp);

/// Total elapsed time of all subflows: sum over arcs and subflows of
/// arc_time + eg * d * (R/N) * x. +infinity if any used arc is saturated.
double evaluate_assignment(const SubflowAssignment& a, const Network& net, const CongestionParams& cp);

struct MultiSolution {
  SubflowAssignment assignment;
  std::vector<Path> routes;  // distinct paths used, lexicographic
  std::vector<int> route_counts;
  double objective = 0.0;
  ObjectiveParts parts;
  bool saturated = false;
  // Per subflow, along its own path.
  std::vector<LegProfile> legs;
  std::vector<RechargeSchedule> recharges;
  std::uint64_t evaluations = 0;
};

struct CandidateOptions {
  // Full simple-path enumeration is used up to this many paths; beyond it
  // the k cheapest free-flow paths are used instead.
  std::size_t max_enumerated_paths = 2000;
  std::size_t k_shortest = 50;
};

/// Candidate route universe for the subflow solvers, lexicographic.
std::vector<Path> candidate_paths(const Network& net, const CongestionParams& cp, const CandidateOptions& opts = {});

/// Per-subflow charging data for N identical subflows. The subflow energy
/// store is an aggregate, so it has no capacity bound.
std::vector<ChargingSpec> homogeneous_subflows(int subflows, double initial_energy, double charge_time_per_unit);

/// Energy profile of a subflow on `p`: arc energies scaled by R / N.
LegProfile subflow_leg(const Network& net, const Path& p, const CongestionParams& cp);

/// Recharge plan per subflow along its assigned path.
std::vector<RechargeSchedule> recharge_for_subflows(const SubflowAssignment& a, const Network& net,
                                                    const CongestionParams& cp, std::span<const ChargingSpec> specs,
                                                    RechargePolicy policy = RechargePolicy::MinimalTotal);

struct ExactOptions {
  CandidateOptions candidates;
  std::uint64_t max_compositions = 20'000'000;
  int threads = 1;
  RechargePolicy policy = RechargePolicy::MinimalTotal;
};

/// Global optimum over all ways of spreading N identical subflows across the
/// candidate paths. Ties go to the lexicographically smallest count vector.
/// Throws InvalidArgumentError for heterogeneous subflows and
/// LimitExceededError when the composition count exceeds the cap.
MultiSolution solve_exact(const Network& net, const CongestionParams& cp, std::span<const ChargingSpec> specs,
                          const ExactOptions& opts = {});

/// Number of compositions of n into k nonnegative parts, saturating at
/// UINT64_MAX.
std::uint64_t composition_count(int n, std::size_t k);

struct LocalSearchOptions {
  CandidateOptions candidates;
  std::uint64_t seed = 42;
  int restarts = 20;
  RechargePolicy policy = RechargePolicy::MinimalTotal;
};

/// Best-of-restarts steepest descent over single-subflow path moves.
/// Supports heterogeneous subflows.
MultiSolution solve_local_search(const Network& net, const CongestionParams& cp, std::span<const ChargingSpec> specs,
                                 const LocalSearchOptions& opts = {});

/// Per subflow: sum(r - e) - discarded == E_n - E_1 within 1e-9.
bool verify_subflow_balance(const MultiSolution& sol, std::span<const ChargingSpec> specs);

/// Per subflow: positive total recharge implies E_n == 0 within 1e-9.
bool verify_subflow_terminal(const MultiSolution& sol);

}  // namespace evroute
