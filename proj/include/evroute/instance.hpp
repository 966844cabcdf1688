#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evroute/network.hpp"

namespace evroute {

/// Global parameters from the instance `params` block.
struct ModelParams {
  double free_flow_speed = 1.0;  // v_f, miles per minute
  double inflow_rate = 1.0;      // R, vehicles per minute
  double p_exp = 2.0;
  double q_exp = 2.0;
  double energy_rate = 1.0;           // e, energy per mile
  double charge_time_per_unit = 1.0;  // g, minutes per energy unit
  double capacity = 100.0;            // B
  double initial_energy = 0.0;        // E_1

  [[nodiscard]] ChargingSpec charging() const {
    return {capacity, initial_energy, charge_time_per_unit};
  }
  /// The e*g product that weights charging time per mile.
  [[nodiscard]] double eg() const { return energy_rate * charge_time_per_unit; }
};

struct Instance {
  std::string name;
  Network network;
  ModelParams params;
  std::vector<std::string> warnings;
};

/// Raw arc record as written in an instance document. Missing optional
/// attributes are derived from the distance during resolution.
struct ArcSpec {
  NodeId from = 0;
  NodeId to = 0;
  std::optional<double> distance;
  std::optional<double> travel_time;
  std::optional<double> energy;
};

/// Fills derived travel times (d / v_f) and energies (e * d), builds the
/// network and runs full validation. Throws ValidationError.
Instance make_instance(std::string name, std::vector<Node> nodes, const std::vector<ArcSpec>& arcs,
                       NodeId origin, NodeId destination, const ModelParams& params);

/// Checks instance-level invariants: positive travel times, arc energy below
/// the battery capacity, destination reachable, parameter ranges. Returns
/// non-fatal warnings; throws ValidationError.
std::vector<std::string> validate_instance(const Network& net, const ModelParams& params);

/// Parses an instance document. Throws ParseError / ValidationError.
Instance parse_instance(const std::string& text);

/// Reads and parses an instance file.
Instance load_network(const std::filesystem::path& file);

/// Canonical serialization; parse_instance(save_instance(x)) reproduces x.
std::string save_instance(const Instance& instance);

/// Returns a copy with different global parameters; derived arc attributes
/// are recomputed and the result revalidated.
Instance with_params(const Instance& instance, const ModelParams& params);

}  // namespace evroute
