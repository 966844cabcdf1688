#include "evroute/multi_subflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "evroute/errors.hpp"

namespace evroute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBalanceTol = 1e-9;

// Ranking key: objective first, then the free-flow objective so that
// saturated assignments still have an order.
struct Score {
  double objective = kInf;
  double free_flow = kInf;
};

bool better(const Score& a, const Score& b) {
  if (a.objective != b.objective) return a.objective < b.objective;
  if (std::isinf(a.objective)) return a.free_flow < b.free_flow;
  return false;
}

Score score_loads(std::span<const double> loads, const Network& net, const CongestionParams& cp) {
  Score s;
  s.objective = objective_from_loads(loads, net, cp).total();
  if (std::isinf(s.objective)) {
    const double share = cp.subflow_rate();
    double ff = 0.0;
    for (std::size_t a = 0; a < loads.size(); ++a) {
      if (loads[a] <= 0.0) continue;
      ff += loads[a] * share * net.arc(a).distance * (1.0 / cp.free_flow_speed + cp.eg);
    }
    s.free_flow = ff;
  }
  return s;
}

std::vector<std::vector<std::size_t>> incidence(const Network& net, const std::vector<Path>& paths) {
  std::vector<std::vector<std::size_t>> inc;
  inc.reserve(paths.size());
  for (const auto& p : paths) inc.push_back(net.path_arcs(p));
  return inc;
}

bool same_spec(const ChargingSpec& a, const ChargingSpec& b) {
  return a.capacity == b.capacity && a.initial_energy == b.initial_energy &&
         a.charge_time_per_unit == b.charge_time_per_unit;
}

void check_specs(const CongestionParams& cp, std::span<const ChargingSpec> specs) {
  cp.validate();
  if (specs.size() != static_cast<std::size_t>(cp.subflows)) {
    throw InvalidArgumentError("expected " + std::to_string(cp.subflows) + " subflow specs, got " +
                               std::to_string(specs.size()));
  }
}

MultiSolution finish(const Network& net, const CongestionParams& cp, std::span<const ChargingSpec> specs,
                     std::vector<Path> paths, RechargePolicy policy, std::uint64_t evaluations) {
  MultiSolution sol;
  sol.assignment = SubflowAssignment::from_paths(net, std::move(paths));
  sol.parts = objective_from_loads(sol.assignment.arc_loads, net, cp);
  sol.objective = sol.parts.total();
  sol.saturated = std::isinf(sol.objective);
  sol.evaluations = evaluations;

  std::map<Path, int> counts;
  for (const auto& p : sol.assignment.paths) ++counts[p];
  for (const auto& [p, c] : counts) {
    sol.routes.push_back(p);
    sol.route_counts.push_back(c);
  }
  for (const auto& p : sol.assignment.paths) sol.legs.push_back(subflow_leg(net, p, cp));
  sol.recharges = recharge_for_subflows(sol.assignment, net, cp, specs, policy);
  return sol;
}

}  // namespace

double arc_time(double distance, double own_fraction, double load, const CongestionParams& cp) {
  if (own_fraction <= 0.0 || load <= 0.0) return 0.0;
  const double factor = congestion_factor(load / cp.subflows, cp.p_exp, cp.q_exp);
  return distance * own_fraction * cp.subflow_rate() / cp.free_flow_speed * factor;
}

SubflowAssignment SubflowAssignment::from_paths(const Network& net, std::vector<Path> paths) {
  SubflowAssignment a;
  a.arc_loads.assign(net.arc_count(), 0.0);
  for (const auto& p : paths) {
    check_path(net, p);
    for (auto idx : net.path_arcs(p)) a.arc_loads[idx] += 1.0;
  }
  a.paths = std::move(paths);
  return a;
}

ObjectiveParts objective_from_loads(std::span<const double> loads, const Network& net, const CongestionParams& cp) {
  ObjectiveParts parts;
  const double share = cp.subflow_rate();
  for (std::size_t a = 0; a < loads.size(); ++a) {
    const double load = loads[a];
    if (load <= 0.0) continue;
    const double d = net.arc(a).distance;
    parts.travel += load * arc_time(d, 1.0, load, cp);
    parts.charging += cp.eg * d * share * load;
  }
  return parts;
}

double evaluate_assignment(const SubflowAssignment& a, const Network& net, const CongestionParams& cp) {
  if (a.paths.size() != static_cast<std::size_t>(cp.subflows)) {
    throw InvalidArgumentError("assignment has " + std::to_string(a.paths.size()) + " paths for " +
                               std::to_string(cp.subflows) + " subflows");
  }
  return objective_from_loads(a.arc_loads, net, cp).total();
}

std::vector<Path> candidate_paths(const Network& net, const CongestionParams& cp, const CandidateOptions& opts) {
  try {
    return enumerate_simple_paths(net, opts.max_enumerated_paths);
  } catch (const LimitExceededError&) {
    const double eg = cp.eg;
    const double vf = cp.free_flow_speed;
    auto paths = k_shortest_paths(
        net, [eg, vf](const Arc& arc) { return arc.distance * (1.0 / vf + eg); }, opts.k_shortest);
    std::sort(paths.begin(), paths.end());
    return paths;
  }
}

std::vector<ChargingSpec> homogeneous_subflows(int subflows, double initial_energy, double charge_time_per_unit) {
  if (subflows < 1) throw InvalidArgumentError("subflow count must be at least 1");
  ChargingSpec spec{kInf, initial_energy, charge_time_per_unit};
  return std::vector<ChargingSpec>(static_cast<std::size_t>(subflows), spec);
}

LegProfile subflow_leg(const Network& net, const Path& p, const CongestionParams& cp) {
  LegProfile leg = leg_profile(net, p);
  for (auto& e : leg.arc_energy) e *= cp.subflow_rate();
  return leg;
}

std::vector<RechargeSchedule> recharge_for_subflows(const SubflowAssignment& a, const Network& net,
                                                    const CongestionParams& cp, std::span<const ChargingSpec> specs,
                                                    RechargePolicy policy) {
  if (specs.size() != a.paths.size()) throw InvalidArgumentError("one charging spec per subflow is required");
  std::vector<RechargeSchedule> out;
  out.reserve(a.paths.size());
  for (std::size_t k = 0; k < a.paths.size(); ++k) {
    const LegProfile leg = subflow_leg(net, a.paths[k], cp);
    const auto& s = specs[k];
    out.push_back(policy == RechargePolicy::PriceOptimal ? price_optimal_recharge(leg, s.capacity, s.initial_energy)
                                                         : min_feasible_recharge(leg, s.capacity, s.initial_energy));
  }
  return out;
}

std::uint64_t composition_count(int n, std::size_t k) {
  if (k == 0) return n == 0 ? 1 : 0;
  // C(n + k - 1, k - 1) with r = min(n, k - 1) multiplicative steps.
  const std::uint64_t top = static_cast<std::uint64_t>(n) + k - 1;
  const std::uint64_t r = std::min<std::uint64_t>(static_cast<std::uint64_t>(n), k - 1);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    const std::uint64_t num = top - r + i;
    // c * num / i is exact at every step; guard the product.
    const std::uint64_t g = std::gcd(c, i);
    const std::uint64_t cg = c / g;
    const std::uint64_t ig = i / g;
    const std::uint64_t numg = num / ig;
    if (numg != 0 && cg > kMax / numg) return kMax;
    c = cg * numg;
  }
  return c;
}

namespace {

struct ExactSearch {
  ExactSearch(const Network& net_, const CongestionParams& cp_, const std::vector<std::vector<std::size_t>>& inc_,
              int n_)
      : net(net_), cp(cp_), inc(inc_), n(n_) {}

  const Network& net;
  const CongestionParams& cp;
  const std::vector<std::vector<std::size_t>>& inc;
  int n = 0;

  std::vector<double> loads;
  std::vector<int> counts;
  std::vector<int> best_counts;
  Score best;
  std::uint64_t evaluations = 0;

  void add(std::size_t path, int delta) {
    for (auto a : inc[path]) loads[a] += delta;
  }

  void consider() {
    ++evaluations;
    const Score s = score_loads(loads, net, cp);
    // Counts arrive in lexicographic order, so a strict improvement keeps the
    // smallest vector among ties.
    if (best_counts.empty() || better(s, best)) {
      best = s;
      best_counts = counts;
    }
  }

  void recurse(std::size_t j, int remaining) {
    const std::size_t last = inc.size() - 1;
    if (j == last) {
      counts[j] = remaining;
      add(j, remaining);
      consider();
      add(j, -remaining);
      counts[j] = 0;
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[j] = c;
      recurse(j + 1, remaining - c);
      add(j, 1);
    }
    add(j, -(remaining + 1));
    counts[j] = 0;
  }

  // Enumerates compositions whose first entry is in `firsts`.
  void run(const std::vector<int>& firsts) {
    loads.assign(net.arc_count(), 0.0);
    counts.assign(inc.size(), 0);
    for (int c0 : firsts) {
      if (inc.size() == 1) {
        if (c0 != n) continue;
        counts[0] = n;
        add(0, n);
        consider();
        add(0, -n);
        continue;
      }
      counts[0] = c0;
      add(0, c0);
      recurse(1, n - c0);
      add(0, -c0);
    }
  }
};

}  // namespace

MultiSolution solve_exact(const Network& net, const CongestionParams& cp, std::span<const ChargingSpec> specs,
                          const ExactOptions& opts) {
  check_specs(cp, specs);
  for (const auto& s : specs) {
    if (!same_spec(s, specs.front())) {
      throw InvalidArgumentError("exact solver requires identical subflows; use local search instead");
    }
  }
  const auto paths = candidate_paths(net, cp, opts.candidates);
  const auto count = composition_count(cp.subflows, paths.size());
  if (count > opts.max_compositions) {
    throw LimitExceededError(std::to_string(count) + " compositions exceed the cap of " +
                             std::to_string(opts.max_compositions));
  }
  const auto inc = incidence(net, paths);
  const int n = cp.subflows;

  const int threads = std::clamp(opts.threads, 1, n + 1);
  std::vector<ExactSearch> searches(static_cast<std::size_t>(threads), ExactSearch(net, cp, inc, n));
  std::vector<std::vector<int>> firsts(static_cast<std::size_t>(threads));
  for (int c0 = 0; c0 <= n; ++c0) firsts[static_cast<std::size_t>(c0 % threads)].push_back(c0);

  if (threads == 1) {
    searches[0].run(firsts[0]);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] { searches[t].run(firsts[t]); });
    }
    for (auto& th : pool) th.join();
  }

  // Deterministic reduction: better score, then smaller count vector.
  const ExactSearch* winner = nullptr;
  std::uint64_t evaluations = 0;
  for (const auto& s : searches) {
    evaluations += s.evaluations;
    if (s.best_counts.empty()) continue;
    if (winner == nullptr || better(s.best, winner->best) ||
        (!better(winner->best, s.best) && s.best_counts < winner->best_counts)) {
      winner = &s;
    }
  }

  std::vector<Path> assigned;
  for (std::size_t j = 0; j < paths.size(); ++j) {
    for (int c = 0; c < winner->best_counts[j]; ++c) assigned.push_back(paths[j]);
  }
  return finish(net, cp, specs, std::move(assigned), opts.policy, evaluations);
}

MultiSolution solve_local_search(const Network& net, const CongestionParams& cp, std::span<const ChargingSpec> specs,
                                 const LocalSearchOptions& opts) {
  check_specs(cp, specs);
  if (opts.restarts < 1) throw InvalidArgumentError("restarts must be at least 1");
  const auto paths = candidate_paths(net, cp, opts.candidates);
  const auto inc = incidence(net, paths);
  const std::size_t n = specs.size();
  const std::size_t np = paths.size();

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, np - 1);
  std::uint64_t evaluations = 0;

  std::vector<std::size_t> best_choice;
  Score best;
  std::vector<double> loads(net.arc_count());

  auto add = [&](std::size_t path, double delta) {
    for (auto a : inc[path]) loads[a] += delta;
  };
  auto eval = [&] {
    ++evaluations;
    return score_loads(loads, net, cp);
  };

  for (int restart = 0; restart < opts.restarts; ++restart) {
    std::fill(loads.begin(), loads.end(), 0.0);
    std::vector<std::size_t> choice(n);
    if (restart == 0) {
      // Greedy insertion: each subflow takes the path that is cheapest given
      // the ones already placed. Unplaced subflows count as absent.
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t arg = 0;
        Score arg_score;
        for (std::size_t q = 0; q < np; ++q) {
          add(q, 1.0);
          const Score s = eval();
          add(q, -1.0);
          if (q == 0 || better(s, arg_score)) {
            arg_score = s;
            arg = q;
          }
        }
        choice[k] = arg;
        add(arg, 1.0);
      }
    } else {
      for (auto& c : choice) {
        c = pick(rng);
        add(c, 1.0);
      }
    }

    Score current = eval();
    for (;;) {
      std::size_t move_k = n;
      std::size_t move_q = 0;
      Score move_score = current;
      for (std::size_t k = 0; k < n; ++k) {
        add(choice[k], -1.0);
        for (std::size_t q = 0; q < np; ++q) {
          if (q == choice[k]) continue;
          add(q, 1.0);
          const Score s = eval();
          add(q, -1.0);
          if (better(s, move_score)) {
            move_score = s;
            move_k = k;
            move_q = q;
          }
        }
        add(choice[k], 1.0);
      }
      if (move_k == n) break;
      if (std::isfinite(current.objective) && current.objective - move_score.objective <= 1e-12 * current.objective) {
        break;
      }
      add(choice[move_k], -1.0);
      add(move_q, 1.0);
      choice[move_k] = move_q;
      current = move_score;
    }

    if (best_choice.empty() || better(current, best)) {
      best = current;
      best_choice = choice;
    }
  }

  std::vector<Path> assigned;
  assigned.reserve(n);
  for (auto c : best_choice) assigned.push_back(paths[c]);
  return finish(net, cp, specs, std::move(assigned), opts.policy, evaluations);
}

bool verify_subflow_balance(const MultiSolution& sol, std::span<const ChargingSpec> specs) {
  if (specs.size() != sol.recharges.size() || sol.legs.size() != sol.recharges.size()) return false;
  for (std::size_t k = 0; k < sol.recharges.size(); ++k) {
    const auto& r = sol.recharges[k];
    const auto& leg = sol.legs[k];
    if (r.residual.empty() || std::abs(r.residual.front() - specs[k].initial_energy) > kBalanceTol) return false;
    double lhs = -r.discarded;
    for (double x : r.recharge) lhs += x;
    for (double e : leg.arc_energy) lhs -= e;
    const double rhs = r.residual.back() - r.residual.front();
    const double scale = std::max(1.0, std::abs(lhs) + std::abs(rhs));
    if (std::abs(lhs - rhs) > kBalanceTol * scale) return false;
  }
  return true;
}

bool verify_subflow_terminal(const MultiSolution& sol) {
  for (const auto& r : sol.recharges) {
    if (r.total() > kBalanceTol && std::abs(r.residual.back()) > kBalanceTol) return false;
  }
  return true;
}

}  // namespace evroute
