#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "evroute/congestion.hpp"
#include "evroute/instance.hpp"
#include "evroute/network.hpp"

namespace testing_support {

using evroute::Instance;
using evroute::Network;
using evroute::Path;

std::string data_path(const std::string& file);
Instance fig1();

/// Distance of an arc of the reference network, looked up from its table.
double fig1_distance(int from, int to);

/// Path from a "1-4-7" label.
Path path_of(const std::string& label);

// ---------------------------------------------------------------- oracles

/// All simple origin-destination paths by plain recursion over the arc list.
std::vector<std::vector<int>> oracle_simple_paths(const Network& net);

/// Sum of (tau + g * e) along a node sequence.
double oracle_combined_weight(const Network& net, const std::vector<int>& nodes, double g);

/// Dense two-phase simplex: minimise c.x subject to A x <= b, x >= 0.
/// Returns +inf when infeasible. Bland's rule, no degeneracy tricks needed
/// for the small programs used here.
double oracle_lp_min(const std::vector<double>& c, const std::vector<std::vector<double>>& a,
                     const std::vector<double>& b, std::vector<double>* x = nullptr);

/// Cheapest recharge cost along a path profile, as a linear program with
/// free disposal of surplus energy.
double oracle_price_optimal_cost(const std::vector<double>& arc_energy, const std::vector<bool>& can_charge,
                                 const std::vector<double>& price, double capacity, double initial_energy);

/// Objective of the relaxed problem for given path fractions, evaluated from
/// scratch with the closed-form arc cost.
double oracle_path_flow_objective(const Network& net, const evroute::CongestionParams& cp,
                                  const std::vector<std::vector<int>>& paths, const std::vector<double>& fractions);

/// Minimum of the relaxed objective over a grid on the simplex of path
/// fractions with the given number of divisions.
double oracle_simplex_grid(const Network& net, const evroute::CongestionParams& cp,
                           const std::vector<std::vector<int>>& paths, int divisions);

// ---------------------------------------------------------------- generators

struct RandomNetworkOptions {
  int min_nodes = 3;
  int max_nodes = 10;
  double arc_probability = 0.45;
  bool allow_back_arcs = false;
  double min_distance = 0.5;
  double max_distance = 9.0;
  // When set, arc energies are drawn from [energy_lo, energy_hi] and given
  // explicitly; otherwise e = e_rate * d.
  bool explicit_energy = false;
  double energy_lo = -3.0;
  double energy_hi = 8.0;
  double no_charger_probability = 0.0;
  double capacity = 20.0;
};

/// Random instance whose destination is reachable from the origin.
Instance random_instance(std::mt19937_64& rng, const RandomNetworkOptions& opts);

/// Line network 1 -> 2 -> ... with the given arc energies and unit times.
Instance line_instance(const std::vector<double>& energies, double capacity, double initial_energy,
                       const std::vector<double>& prices = {});

}  // namespace testing_support
