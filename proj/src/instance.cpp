#include "evroute/instance.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evroute/errors.hpp"

namespace evroute {

using nlohmann::json;

namespace {

std::string arc_label(NodeId from, NodeId to) {
  return "(" + std::to_string(from) + "," + std::to_string(to) + ")";
}

void check_params(const ModelParams& p) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  require(std::isfinite(p.free_flow_speed) && p.free_flow_speed > 0.0, "v_f must be positive");
  require(std::isfinite(p.inflow_rate) && p.inflow_rate > 0.0, "R must be positive");
  require(p.p_exp > 0.0 && p.q_exp > 0.0, "p_exp and q_exp must be positive");
  require(std::isfinite(p.energy_rate), "e_rate must be finite");
  require(p.charge_time_per_unit >= 0.0, "g must be nonnegative");
  require(p.capacity > 0.0, "B must be positive");
  require(p.initial_energy >= 0.0 && p.initial_energy <= p.capacity, "E1 must lie in [0, B]");
}

std::vector<Arc> resolve_arcs(const std::vector<ArcSpec>& specs, const ModelParams& params) {
  std::vector<Arc> arcs;
  arcs.reserve(specs.size());
  for (const ArcSpec& s : specs) {
    Arc a;
    a.from = s.from;
    a.to = s.to;
    if (!s.distance && !s.travel_time) {
      throw ValidationError("arc " + arc_label(s.from, s.to) + " needs a distance or an explicit tau");
    }
    if (!s.distance && !s.energy) {
      throw ValidationError("arc " + arc_label(s.from, s.to) + " needs a distance or an explicit energy");
    }
    a.explicit_time = s.travel_time.has_value();
    a.explicit_energy = s.energy.has_value();
    a.travel_time = s.travel_time ? *s.travel_time : *s.distance / params.free_flow_speed;
    a.distance = s.distance ? *s.distance : a.travel_time * params.free_flow_speed;
    a.energy = s.energy ? *s.energy : params.energy_rate * a.distance;
    if (a.distance < 0.0) throw ValidationError("arc " + arc_label(a.from, a.to) + " has a negative distance");
    arcs.push_back(a);
  }
  return arcs;
}

std::vector<ArcSpec> specs_of(const Network& net) {
  std::vector<ArcSpec> specs;
  for (const Arc& a : net.arcs()) {
    ArcSpec s{a.from, a.to, a.distance, std::nullopt, std::nullopt};
    if (a.explicit_time) s.travel_time = a.travel_time;
    if (a.explicit_energy) s.energy = a.energy;
    specs.push_back(s);
  }
  return specs;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return it->get<T>();
}

}  // namespace

std::vector<std::string> validate_instance(const Network& net, const ModelParams& params) {
  check_params(params);
  std::vector<std::string> warnings;
  for (const Arc& a : net.arcs()) {
    if (!(a.travel_time > 0.0) || !std::isfinite(a.travel_time)) {
      throw ValidationError("arc " + arc_label(a.from, a.to) + " has nonpositive travel time");
    }
    if (!std::isfinite(a.energy)) throw ValidationError("arc " + arc_label(a.from, a.to) + " has non-finite energy");
    if (a.energy >= params.capacity) {
      throw ValidationError("arc energy exceeds battery capacity on " + arc_label(a.from, a.to));
    }
  }
  if (net.origin() == net.destination()) throw ValidationError("origin and destination coincide");
  if (!net.useful_nodes()[static_cast<std::size_t>(net.origin() - 1)]) {
    throw ValidationError("network is disconnected: destination unreachable from origin");
  }
  if (!net.in_arcs(net.origin()).empty()) {
    warnings.push_back("origin has incoming arcs; they can never be used by a simple path");
  }
  return warnings;
}

Instance make_instance(std::string name, std::vector<Node> nodes, const std::vector<ArcSpec>& arcs, NodeId origin,
                       NodeId destination, const ModelParams& params) {
  check_params(params);
  Instance inst;
  inst.name = std::move(name);
  inst.params = params;
  inst.network = Network(std::move(nodes), resolve_arcs(arcs, params), origin, destination);
  inst.warnings = validate_instance(inst.network, params);
  return inst;
}

Instance with_params(const Instance& instance, const ModelParams& params) {
  return make_instance(instance.name, instance.network.nodes(), specs_of(instance.network), instance.network.origin(),
                       instance.network.destination(), params);
}

Instance parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed instance document: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw ParseError("instance document must be an object");
    const json meta = doc.value("meta", json::object());
    const json params_doc = doc.value("params", json::object());
    if (!doc.contains("nodes") || !doc["nodes"].is_array()) throw ParseError("missing 'nodes' array");
    if (!doc.contains("arcs") || !doc["arcs"].is_array()) throw ParseError("missing 'arcs' array");

    ModelParams params;
    params.free_flow_speed = get_or(params_doc, "v_f", params.free_flow_speed);
    params.inflow_rate = get_or(params_doc, "R", params.inflow_rate);
    params.p_exp = get_or(params_doc, "p_exp", params.p_exp);
    params.q_exp = get_or(params_doc, "q_exp", params.q_exp);
    params.energy_rate = get_or(params_doc, "e_rate", params.energy_rate);
    params.charge_time_per_unit = get_or(params_doc, "g", params.charge_time_per_unit);
    params.capacity = get_or(params_doc, "B", params.capacity);
    params.initial_energy = get_or(params_doc, "E1", params.initial_energy);

    std::vector<Node> nodes;
    for (const json& n : doc["nodes"]) {
      if (!n.is_object() || !n.contains("id")) throw ParseError("node entries need an 'id'");
      nodes.push_back({n["id"].get<NodeId>(), get_or(n, "charger", true), get_or(n, "price", 0.0)});
    }
    std::vector<ArcSpec> arcs;
    for (const json& a : doc["arcs"]) {
      if (!a.is_object() || !a.contains("from") || !a.contains("to")) {
        throw ParseError("arc entries need 'from' and 'to'");
      }
      ArcSpec s;
      s.from = a["from"].get<NodeId>();
      s.to = a["to"].get<NodeId>();
      if (a.contains("distance")) s.distance = a["distance"].get<double>();
      if (a.contains("tau")) s.travel_time = a["tau"].get<double>();
      if (a.contains("energy")) s.energy = a["energy"].get<double>();
      arcs.push_back(s);
    }
    NodeId origin = get_or(meta, "origin", 1);
    NodeId destination = get_or(meta, "destination", static_cast<NodeId>(nodes.size()));
    return make_instance(get_or<std::string>(meta, "name", "unnamed"), std::move(nodes), arcs, origin, destination,
                         params);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid instance document: ") + e.what());
  }
}

Instance load_network(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open instance file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string save_instance(const Instance& instance) {
  const Network& net = instance.network;
  const ModelParams& p = instance.params;
  json doc;
  doc["meta"] = {{"name", instance.name}, {"origin", net.origin()}, {"destination", net.destination()}};
  doc["params"] = {{"v_f", p.free_flow_speed}, {"R", p.inflow_rate},   {"p_exp", p.p_exp},
                   {"q_exp", p.q_exp},         {"e_rate", p.energy_rate}, {"g", p.charge_time_per_unit},
                   {"B", p.capacity},          {"E1", p.initial_energy}};
  json nodes = json::array();
  for (const Node& n : net.nodes()) nodes.push_back({{"id", n.id}, {"charger", n.has_charger}, {"price", n.price}});
  doc["nodes"] = nodes;
  json arcs = json::array();
  for (const Arc& a : net.arcs()) {
    json entry = {{"from", a.from}, {"to", a.to}, {"distance", a.distance}};
    if (a.explicit_time) entry["tau"] = a.travel_time;
    if (a.explicit_energy) entry["energy"] = a.energy;
    arcs.push_back(entry);
  }
  doc["arcs"] = arcs;
  return doc.dump(2) + "\n";
}

}  // namespace evroute
