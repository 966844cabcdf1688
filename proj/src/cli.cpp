#include "evroute/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>

#include <CLI11.hpp>

#include "evroute/baseline_sim.hpp"
#include "evroute/errors.hpp"
#include "evroute/flow_relaxation.hpp"
#include "evroute/instance.hpp"
#include "evroute/multi_subflow.hpp"
#include "evroute/single_vehicle.hpp"

namespace evroute::cli {

using nlohmann::json;

void to_json(json& j, const RunRecord& r) {
  j = json{{"command", r.command},
           {"instance", r.instance},
           {"parameters", r.parameters},
           {"result", r.result},
           {"wall_time", r.wall_time}};
}

void from_json(const json& j, RunRecord& r) {
  j.at("command").get_to(r.command);
  j.at("instance").get_to(r.instance);
  j.at("parameters").get_to(r.parameters);
  r.result = j.at("result");
  j.at("wall_time").get_to(r.wall_time);
  if (r.wall_time < 0.0) throw ParseError("wall_time must be nonnegative");
}

std::string dump_records(const std::vector<RunRecord>& records) { return json(records).dump(2) + "\n"; }

std::vector<RunRecord> parse_records(const std::string& text) {
  try {
    return json::parse(text).get<std::vector<RunRecord>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed run record: ") + e.what());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

namespace {

std::string render(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return std::to_string(std::get<long long>(c));
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

std::string emit_table(const Table& table, TableFormat format) {
  std::ostringstream os;
  const std::size_t cols = table.columns.size();
  for (const auto& row : table.rows) {
    if (row.size() != cols) throw InvalidArgumentError("table row width does not match the header");
  }
  if (format == TableFormat::Csv) {
    for (std::size_t c = 0; c < cols; ++c) os << (c ? "," : "") << csv_quote(table.columns[c]);
    os << "\n";
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < cols; ++c) os << (c ? "," : "") << csv_quote(render(row[c]));
      os << "\n";
    }
    return os.str();
  }
  std::vector<std::size_t> width(cols);
  std::vector<std::vector<std::string>> cells;
  for (std::size_t c = 0; c < cols; ++c) width[c] = table.columns[c].size();
  for (const auto& row : table.rows) {
    auto& out = cells.emplace_back();
    for (std::size_t c = 0; c < cols; ++c) {
      out.push_back(render(row[c]));
      width[c] = std::max(width[c], out.back().size());
    }
  }
  auto line = [&](const std::vector<std::string>& v, const std::vector<bool>& right) {
    std::string s;
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) s += "  ";
      const std::string pad(width[c] - v[c].size(), ' ');
      s += right[c] ? pad + v[c] : v[c] + pad;
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  std::vector<bool> right(cols, false);
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < cols; ++c) right[c] = !std::holds_alternative<std::string>(row[c]);
  }
  os << line(table.columns, right);
  std::string rule;
  for (std::size_t c = 0; c < cols; ++c) rule += (c ? "  " : "") + std::string(width[c], '-');
  os << rule << "\n";
  for (const auto& row : cells) os << line(row, right);
  return os.str();
}

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgumentError("cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw InvalidArgumentError("empty value list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_list(text)) {
    if (v != std::floor(v) || v < 1 || v > 1e6) throw InvalidArgumentError("subflow counts must be positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

InitialEnergyLaw parse_energy_law(const std::string& text, double fallback) {
  if (text.empty()) return {InitialEnergyLaw::Kind::Fixed, fallback, fallback};
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::vector<double> args =
      colon == std::string::npos ? std::vector<double>{} : parse_list(text.substr(colon + 1));
  if (kind == "fixed" && args.size() == 1) return {InitialEnergyLaw::Kind::Fixed, args[0], args[0]};
  if (kind == "uniform" && args.size() == 2) return {InitialEnergyLaw::Kind::Uniform, args[0], args[1]};
  throw InvalidArgumentError("initial energy law must be fixed:X or uniform:LO,HI");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string route_summary(const std::vector<Path>& routes, const std::vector<int>& counts) {
  std::string s;
  for (std::size_t i = 0; i < routes.size(); ++i) {
    if (i) s += "; ";
    s += routes[i].to_string() + " x" + std::to_string(counts[i]);
  }
  return s;
}

// Options shared by several subcommands; unset optionals leave the
// instance value in place.
struct Common {
  std::string instance;
  std::string out_file;
  std::string format = "text";
  std::optional<double> eg;
  std::optional<double> e1;
  std::optional<double> battery;
  std::optional<double> g;
};

struct Options {
  Common common;
  std::string policy = "minimal";
  std::string subflows = "10";
  std::string method = "exact";
  std::uint64_t seed = 42;
  int restarts = 20;
  std::uint64_t max_compositions = 20'000'000;
  int threads = 1;
  double tol = 1e-6;
  int max_iter = 10000;
  std::string param = "eg";
  std::string values = "0.1,1,10";
  std::size_t vehicles = 10000;
  std::uint64_t sim_seed = 1;
  double calibration = 3.0;
  std::string initial_energy;
  int repeats = 5;
};

void add_common(CLI::App* sub, Common& c, bool energy_flags) {
  sub->add_option("instance", c.instance, "Instance file")->required();
  sub->add_option("--out", c.out_file, "Write the run record(s) as JSON to this file");
  sub->add_option("--format", c.format, "Table format")->check(CLI::IsMember({"text", "csv"}));
  sub->add_option("--eg", c.eg, "Override the e*g product (changes g)");
  if (energy_flags) {
    sub->add_option("--e1", c.e1, "Initial energy");
    sub->add_option("--battery", c.battery, "Battery capacity B");
    sub->add_option("--g", c.g, "Charging minutes per energy unit");
  }
}

Instance load(const Common& c, std::map<std::string, std::string>& params) {
  Instance inst = load_network(c.instance);
  ModelParams p = inst.params;
  bool changed = false;
  if (c.battery) {
    p.capacity = *c.battery;
    params["battery"] = format_number(*c.battery);
    changed = true;
  }
  if (c.g) {
    p.charge_time_per_unit = *c.g;
    params["g"] = format_number(*c.g);
    changed = true;
  }
  if (c.eg) {
    if (!(p.energy_rate > 0.0)) throw InvalidArgumentError("--eg needs a positive energy rate in the instance");
    p.charge_time_per_unit = *c.eg / p.energy_rate;
    params["eg"] = format_number(*c.eg);
    changed = true;
  }
  if (changed) inst = with_params(inst, p);
  return inst;
}

TableFormat table_format(const Common& c) { return c.format == "csv" ? TableFormat::Csv : TableFormat::Text; }

void write_records(const Common& c, const std::vector<RunRecord>& records) {
  if (c.out_file.empty()) return;
  std::ofstream f(c.out_file);
  if (!f) throw InvalidArgumentError("cannot write " + c.out_file);
  f << dump_records(records);
}

int cmd_solve_single(const Options& o, std::ostream& out) {
  RunRecord rec{"solve-single", "", {}, {}, 0.0};
  Instance inst = load(o.common, rec.parameters);
  rec.instance = inst.name;
  ChargingSpec spec = inst.params.charging();
  if (o.common.e1) {
    spec.initial_energy = *o.common.e1;
    rec.parameters["e1"] = format_number(*o.common.e1);
  }
  if (spec.initial_energy < 0.0 || spec.initial_energy > spec.capacity) {
    throw ValidationError("initial energy must lie in [0, B]");
  }
  rec.parameters["policy"] = o.policy;
  const auto policy = o.policy == "price" ? RechargePolicy::PriceOptimal : RechargePolicy::MinimalTotal;

  const auto t0 = std::chrono::steady_clock::now();
  const RoutePlan plan = plan_route(inst.network, spec, policy);
  rec.wall_time = seconds_since(t0);

  out << "instance: " << inst.name << "\n";
  out << "case: " << (plan.zero_recharge ? "no recharging needed" : "recharging") << "\n";
  out << "path: " << plan.path.to_string() << "\n";
  out << "objective: " << format_number(plan.objective) << "\n";
  out << "travel time: " << format_number(plan.travel_time) << "\n";
  out << "charge time: " << format_number(plan.charge_time) << "\n";
  out << "charging cost: " << format_number(plan.charging_cost) << "\n\n";
  Table t{{"node", "charger", "recharge", "residual"}, {}};
  for (std::size_t i = 0; i < plan.path.size(); ++i) {
    const NodeId id = plan.path.nodes[i];
    t.rows.push_back({static_cast<long long>(id), std::string(inst.network.node(id).has_charger ? "yes" : "no"),
                      plan.recharges[i], plan.residuals[i]});
  }
  out << emit_table(t, table_format(o.common));

  rec.result = {{"path", plan.path.to_string()},
                {"objective", number(plan.objective)},
                {"travel_time", number(plan.travel_time)},
                {"charge_time", number(plan.charge_time)},
                {"charging_cost", number(plan.charging_cost)},
                {"zero_recharge", plan.zero_recharge},
                {"recharges", numbers(plan.recharges)},
                {"residuals", numbers(plan.residuals)},
                {"discarded", number(plan.discarded)}};
  write_records(o.common, {rec});
  return kOk;
}

RunRecord solve_multi_once(const Options& o, const Instance& inst, int n, MultiSolution& sol) {
  RunRecord rec{"solve-multi", inst.name, {}, {}, 0.0};
  rec.parameters["subflows"] = std::to_string(n);
  rec.parameters["method"] = o.method;
  const double e1 = o.common.e1.value_or(0.0);
  rec.parameters["e1"] = format_number(e1);
  const auto cp = CongestionParams::from(inst.params, n);
  const auto specs = homogeneous_subflows(n, e1, inst.params.charge_time_per_unit);
  const auto t0 = std::chrono::steady_clock::now();
  if (o.method == "local") {
    rec.parameters["seed"] = std::to_string(o.seed);
    rec.parameters["restarts"] = std::to_string(o.restarts);
    LocalSearchOptions lo;
    lo.seed = o.seed;
    lo.restarts = o.restarts;
    sol = solve_local_search(inst.network, cp, specs, lo);
  } else {
    rec.parameters["threads"] = std::to_string(o.threads);
    ExactOptions eo;
    eo.max_compositions = o.max_compositions;
    eo.threads = o.threads;
    sol = solve_exact(inst.network, cp, specs, eo);
  }
  rec.wall_time = seconds_since(t0);

  json routes = json::array();
  for (std::size_t i = 0; i < sol.routes.size(); ++i) {
    routes.push_back({{"path", sol.routes[i].to_string()}, {"count", sol.route_counts[i]}});
  }
  json subflows = json::array();
  for (std::size_t k = 0; k < sol.recharges.size(); ++k) {
    subflows.push_back({{"path", sol.assignment.paths[k].to_string()},
                        {"recharges", numbers(sol.recharges[k].recharge)},
                        {"residuals", numbers(sol.recharges[k].residual)}});
  }
  rec.result = {{"objective", number(sol.objective)},
                {"travel_time", number(sol.parts.travel)},
                {"charge_time", number(sol.parts.charging)},
                {"saturated", sol.saturated},
                {"routes", routes},
                {"subflows", subflows},
                {"evaluations", sol.evaluations}};
  return rec;
}

int cmd_solve_multi(const Options& o, std::ostream& out) {
  std::map<std::string, std::string> overrides;
  const Instance inst = load(o.common, overrides);
  const auto ns = parse_int_list(o.subflows);
  Table t{{"N", "objective", "time_on_paths", "time_at_stations", "routes"}, {}};
  std::vector<RunRecord> records;
  std::vector<int> saturated;
  for (int n : ns) {
    MultiSolution sol;
    RunRecord rec = solve_multi_once(o, inst, n, sol);
    rec.parameters.insert(overrides.begin(), overrides.end());
    records.push_back(std::move(rec));
    t.rows.push_back({static_cast<long long>(n), sol.objective, sol.parts.travel, sol.parts.charging,
                      route_summary(sol.routes, sol.route_counts)});
    if (sol.saturated) saturated.push_back(n);
  }
  out << "instance: " << inst.name << "\n";
  out << "method: " << o.method << "\n\n";
  out << emit_table(t, table_format(o.common));
  for (int n : saturated) {
    out << "\nN=" << n << " objective: saturated (+inf)\n"
        << "note: every assignment drives some arc to jam density; solvers that model this with a big-M\n"
        << "constant report a large finite number instead.\n";
  }
  write_records(o.common, records);
  return kOk;
}

CongestionParams flow_params(const Instance& inst) { return CongestionParams::from(inst.params, 1); }

json flow_json(const FlowSolution& sol) {
  json paths = json::array();
  for (const auto& pf : sol.path_flows) paths.push_back({{"path", pf.path.to_string()}, {"fraction", pf.fraction}});
  return {{"objective", number(sol.objective)},
          {"time_on_paths", number(sol.parts.travel)},
          {"time_at_stations", number(sol.parts.charging)},
          {"iterations", sol.iterations},
          {"gap", number(sol.gap)},
          {"converged", sol.converged},
          {"saturated", sol.saturated},
          {"x", numbers(sol.x)},
          {"path_flows", paths}};
}

int cmd_solve_flow(const Options& o, std::ostream& out) {
  RunRecord rec{"solve-flow", "", {}, {}, 0.0};
  const Instance inst = load(o.common, rec.parameters);
  rec.instance = inst.name;
  rec.parameters["tol"] = format_number(o.tol);
  rec.parameters["max_iter"] = std::to_string(o.max_iter);
  const auto cp = flow_params(inst);
  const auto t0 = std::chrono::steady_clock::now();
  const FlowSolution sol = solve_flow(inst.network, cp, {o.tol, o.max_iter});
  rec.wall_time = seconds_since(t0);

  const ChargingSpec spec{std::numeric_limits<double>::infinity(), 0.0, inst.params.charge_time_per_unit};
  const FlowEnergy energy = reconstruct_flow_energy(sol, inst.network, cp, std::span(&spec, 1));

  out << "instance: " << inst.name << "\n";
  out << "objective: " << format_number(sol.objective) << "\n";
  out << "time on paths: " << format_number(sol.parts.travel) << "\n";
  out << "time at stations: " << format_number(sol.parts.charging) << "\n";
  out << "iterations: " << sol.iterations << "\n";
  out << "relative gap: " << (sol.gap < 1e-4 ? std::to_string(sol.gap) : format_number(sol.gap)) << "\n";
  out << "converged: " << (sol.converged ? "yes" : "no") << "\n";
  out << "total recharge: " << format_number(energy.subflows.front().total_recharge()) << "\n\n";
  Table t{{"route", "share_pct"}, {}};
  for (const auto& pf : sol.path_flows) t.rows.push_back({pf.path.to_string(), pf.fraction * 100.0});
  out << emit_table(t, table_format(o.common));

  rec.result = flow_json(sol);
  rec.result["total_recharge"] = number(energy.subflows.front().total_recharge());
  write_records(o.common, {rec});
  return sol.converged ? kOk : kNotConverged;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  if (o.param != "eg") throw InvalidArgumentError("only --param eg is supported");
  std::map<std::string, std::string> overrides;
  const Instance base = load(o.common, overrides);
  if (!(base.params.energy_rate > 0.0)) throw InvalidArgumentError("sweeping eg needs a positive energy rate");
  Table t{{"eg", "total", "paths", "stations", "route", "fraction"}, {}};
  std::vector<RunRecord> records;
  bool converged = true;
  for (double eg : parse_list(o.values)) {
    ModelParams p = base.params;
    p.charge_time_per_unit = eg / p.energy_rate;
    const auto cp = CongestionParams::from(p, 1);
    RunRecord rec{"sweep", base.name, {{"param", "eg"}, {"value", format_number(eg)}}, {}, 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    const FlowSolution sol = solve_flow(base.network, cp, {o.tol, o.max_iter});
    rec.wall_time = seconds_since(t0);
    converged = converged && sol.converged;
    for (const auto& pf : sol.path_flows) {
      t.rows.push_back({eg, sol.objective, sol.parts.travel, sol.parts.charging, pf.path.to_string(), pf.fraction});
    }
    rec.result = flow_json(sol);
    records.push_back(std::move(rec));
  }
  out << emit_table(t, table_format(o.common));
  write_records(o.common, records);
  return converged ? kOk : kNotConverged;
}

SimConfig sim_config(const Options& o, const Instance& inst, std::map<std::string, std::string>& params) {
  SimConfig cfg = SimConfig::from(inst.params);
  cfg.vehicles = o.vehicles;
  cfg.seed = o.sim_seed;
  cfg.window = o.calibration;
  cfg.initial_energy = parse_energy_law(o.initial_energy, o.common.e1.value_or(inst.params.initial_energy));
  params["vehicles"] = std::to_string(o.vehicles);
  params["seed"] = std::to_string(o.sim_seed);
  params["calibration"] = format_number(o.calibration);
  if (!o.initial_energy.empty()) params["initial_energy"] = o.initial_energy;
  return cfg;
}

json sim_json(const SimReport& r) {
  json routes = json::array();
  for (const auto& rc : r.route_counts) routes.push_back({{"path", rc.path.to_string()}, {"count", rc.count}});
  return {{"vehicles_completed", r.vehicles_completed},
          {"vehicles_stranded", r.vehicles_stranded},
          {"mean_total_time", number(r.mean_total_time)},
          {"mean_travel_time", number(r.mean_travel_time)},
          {"mean_charge_time", number(r.mean_charge_time)},
          {"clamp_events", r.clamp_events},
          {"energy_violations", r.energy_violations},
          {"routes", routes}};
}

void print_sim(const SimReport& r, const Common& c, std::ostream& out) {
  out << "vehicles completed: " << r.vehicles_completed << "\n";
  out << "vehicles stranded: " << r.vehicles_stranded << "\n";
  out << "mean total time: " << format_number(r.mean_total_time) << "\n";
  out << "mean travel time: " << format_number(r.mean_travel_time) << "\n";
  out << "mean charge time: " << format_number(r.mean_charge_time) << "\n\n";
  Table t{{"route", "vehicles"}, {}};
  for (const auto& rc : r.route_counts) t.rows.push_back({rc.path.to_string(), static_cast<long long>(rc.count)});
  out << emit_table(t, table_format(c));
}

int cmd_simulate(const Options& o, std::ostream& out) {
  RunRecord rec{"simulate-baseline", "", {}, {}, 0.0};
  const Instance inst = load(o.common, rec.parameters);
  rec.instance = inst.name;
  const SimConfig cfg = sim_config(o, inst, rec.parameters);
  const auto t0 = std::chrono::steady_clock::now();
  const SimReport r = simulate_round_robin(inst.network, flow_params(inst), cfg);
  rec.wall_time = seconds_since(t0);
  out << "instance: " << inst.name << "\n";
  print_sim(r, o.common, out);
  rec.result = sim_json(r);
  write_records(o.common, {rec});
  return kOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  RunRecord rec{"compare", "", {}, {}, 0.0};
  const Instance inst = load(o.common, rec.parameters);
  rec.instance = inst.name;
  const SimConfig cfg = sim_config(o, inst, rec.parameters);
  const auto t0 = std::chrono::steady_clock::now();
  const PolicyComparison cmp = compare_policies(inst.network, flow_params(inst), cfg, {o.tol, o.max_iter});
  rec.wall_time = seconds_since(t0);
  out << "instance: " << inst.name << "\n";
  print_sim(cmp.baseline, o.common, out);
  out << "\noptimal objective: " << format_number(cmp.optimal_objective) << "\n";
  out << "improvement: " << format_number(cmp.improvement_pct) << "%\n";
  rec.result = {{"baseline", sim_json(cmp.baseline)},
                {"optimal_objective", number(cmp.optimal_objective)},
                {"improvement_pct", number(cmp.improvement_pct)}};
  write_records(o.common, {rec});
  return cmp.optimal.converged ? kOk : kNotConverged;
}

int cmd_bench(const Options& o, std::ostream& out) {
  std::map<std::string, std::string> overrides;
  const Instance inst = load(o.common, overrides);
  const auto ns = parse_int_list(o.subflows);
  if (ns.size() != 1) throw InvalidArgumentError("bench takes a single subflow count");
  if (o.repeats < 1) throw InvalidArgumentError("--repeats must be at least 1");
  const int n = ns.front();

  // Minimum over repetitions filters scheduler noise.
  double exact_time = std::numeric_limits<double>::infinity();
  MultiSolution exact;
  RunRecord exact_rec;
  Options eo = o;
  eo.method = "exact";
  for (int r = 0; r < o.repeats; ++r) {
    RunRecord rec = solve_multi_once(eo, inst, n, exact);
    if (rec.wall_time < exact_time) {
      exact_time = rec.wall_time;
      exact_rec = std::move(rec);
    }
  }
  exact_rec.command = "bench";
  exact_rec.parameters["solver"] = "exact";

  const auto cp = flow_params(inst);
  RunRecord flow_rec{"bench", inst.name, {{"solver", "flow"}, {"tol", format_number(o.tol)}}, {}, 0.0};
  double flow_time = std::numeric_limits<double>::infinity();
  FlowSolution flow;
  const int flow_repeats = std::max(o.repeats, 50);
  for (int r = 0; r < flow_repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    flow = solve_flow(inst.network, cp, {o.tol, o.max_iter});
    flow_time = std::min(flow_time, seconds_since(t0));
  }
  flow_rec.wall_time = flow_time;
  flow_rec.result = flow_json(flow);
  const double ratio = exact_time / flow_time;

  Table t{{"solver", "objective", "wall_time_s"}, {}};
  t.rows.push_back({std::string("exact N=") + std::to_string(n), exact.objective, exact_time});
  t.rows.push_back({std::string("flow relaxation"), flow.objective, flow_time});
  out << "instance: " << inst.name << "\n\n";
  out << emit_table(t, table_format(o.common));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", ratio);
  out << "\nspeedup: " << buf << "x\n";
  write_records(o.common, {exact_rec, flow_rec});
  return flow.converged ? kOk : kNotConverged;
}

constexpr const char* kFooter =
    "Exit codes:\n"
    "  0  success\n"
    "  1  unexpected internal error\n"
    "  2  usage error (unknown flag, bad argument)\n"
    "  3  instance cannot be read, parsed or validated (ParseError, ValidationError)\n"
    "  4  infeasible plan or negative cycle (InfeasibleError, NegativeCycleError)\n"
    "  5  solver did not converge within its iteration limit\n"
    "  6  enumeration cap exceeded (LimitExceededError)\n";

int exit_code_for(const Error& e) {
  const std::string& n = e.name();
  if (n == "ParseError" || n == "ValidationError") return kInvalidInput;
  if (n == "InfeasibleError" || n == "NegativeCycleError") return kInfeasible;
  if (n == "LimitExceededError") return kLimitExceeded;
  if (n == "InvalidArgumentError") return kUsage;
  return kFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-aware routing of battery-powered vehicles", "evroute"};
  app.footer(kFooter);
  app.require_subcommand(1);
  Options o;

  auto* single = app.add_subcommand("solve-single", "Route and recharge plan for one vehicle");
  add_common(single, o.common, true);
  single->add_option("--policy", o.policy, "Recharge policy")->check(CLI::IsMember({"minimal", "price"}));

  auto* multi = app.add_subcommand("solve-multi", "Route N congestion-coupled subflows");
  add_common(multi, o.common, false);
  multi->add_option("--subflows", o.subflows, "Subflow count N, or a comma list")->required();
  multi->add_option("--method", o.method, "Solver")->check(CLI::IsMember({"exact", "local"}));
  multi->add_option("--seed", o.seed, "Local search seed");
  multi->add_option("--restarts", o.restarts, "Local search restarts");
  multi->add_option("--max-compositions", o.max_compositions, "Exact solver enumeration cap");
  multi->add_option("--threads", o.threads, "Exact solver worker threads")->check(CLI::Range(1, 256));
  multi->add_option("--e1", o.common.e1, "Initial energy of every subflow");

  auto* flow = app.add_subcommand("solve-flow", "Relaxed flow optimum and route split");
  add_common(flow, o.common, false);
  flow->add_option("--tol", o.tol, "Relative gap tolerance");
  flow->add_option("--max-iter", o.max_iter, "Iteration limit");

  auto* sweep = app.add_subcommand("sweep", "Relaxed optimum over a parameter grid (CSV)");
  add_common(sweep, o.common, false);
  sweep->add_option("--param", o.param, "Swept parameter")->check(CLI::IsMember({"eg"}));
  sweep->add_option("--values", o.values, "Comma separated values");
  sweep->add_option("--tol", o.tol, "Relative gap tolerance");
  sweep->add_option("--max-iter", o.max_iter, "Iteration limit");

  auto add_sim = [&](CLI::App* sub) {
    add_common(sub, o.common, false);
    sub->add_option("--vehicles", o.vehicles, "Simulated vehicles");
    sub->add_option("--seed", o.sim_seed, "Arrival process seed");
    sub->add_option("--calibration", o.calibration, "Density window in free-flow traversal times");
    sub->add_option("--initial-energy", o.initial_energy, "fixed:X or uniform:LO,HI");
    sub->add_option("--e1", o.common.e1, "Fixed initial energy");
  };
  auto* sim = app.add_subcommand("simulate-baseline", "Simulate uncontrolled round-robin routing");
  add_sim(sim);
  auto* compare = app.add_subcommand("compare", "Round-robin baseline against the relaxed optimum");
  add_sim(compare);
  compare->add_option("--tol", o.tol, "Relative gap tolerance");

  auto* bench = app.add_subcommand("bench", "Wall time of the exact solver against the flow relaxation");
  add_common(bench, o.common, false);
  bench->add_option("--subflows", o.subflows, "Subflow count N");
  bench->add_option("--repeats", o.repeats, "Timing repetitions (minimum is reported)");
  bench->add_option("--threads", o.threads, "Exact solver worker threads")->check(CLI::Range(1, 256));
  bench->add_option("--tol", o.tol, "Relative gap tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (sweep->parsed() && sweep->count("--format") == 0) o.common.format = "csv";
  try {
    if (single->parsed()) return cmd_solve_single(o, out);
    if (multi->parsed()) return cmd_solve_multi(o, out);
    if (flow->parsed()) return cmd_solve_flow(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    if (compare->parsed()) return cmd_compare(o, out);
    if (bench->parsed()) return cmd_bench(o, out);
  } catch (const Error& e) {
    err << "error: " << e.name() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace evroute::cli
