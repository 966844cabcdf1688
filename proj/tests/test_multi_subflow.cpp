#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "evroute/errors.hpp"
#include "evroute/multi_subflow.hpp"
#include "support.hpp"

using namespace evroute;
using namespace testing_support;

namespace {

CongestionParams fig1_cp(int n) { return CongestionParams::from(fig1().params, n); }

std::map<std::string, int> multiset(const MultiSolution& s) {
  std::map<std::string, int> m;
  for (std::size_t i = 0; i < s.routes.size(); ++i) m[s.routes[i].to_string()] = s.route_counts[i];
  return m;
}

std::string label(const std::string& dashed) { return path_of(dashed).to_string(); }

// Subflow objective from labelled paths, written out directly.
double oracle_subflow_objective(const Network& net, const CongestionParams& cp, const std::vector<std::vector<int>>& paths) {
  std::map<std::pair<int, int>, int> load;
  for (const auto& p : paths) {
    for (std::size_t i = 0; i + 1 < p.size(); ++i) ++load[{p[i], p[i + 1]}];
  }
  const double share = cp.inflow_rate / cp.subflows;
  double total = 0.0;
  for (const Arc& a : net.arcs()) {
    const int l = load[{a.from, a.to}];
    if (l == 0) continue;
    if (l >= cp.subflows) return INFINITY;
    const double k = static_cast<double>(l) / cp.subflows;
    total += l * (a.distance * share / (cp.free_flow_speed * std::pow(1.0 - std::pow(k, cp.p_exp), cp.q_exp)) +
                  cp.eg * a.distance * share);
  }
  return total;
}

}  // namespace

TEST(MultiSubflow, ArcTimeExamples) {
  const CongestionParams cp = fig1_cp(2);
  EXPECT_NEAR(arc_time(12.2, 1.0, 1.0, cp), 12.2 * 0.5 / 0.5625, 1e-12);
  EXPECT_NEAR(arc_time(12.2, 1.0, 1.0, cp), 10.844, 1e-3);
  EXPECT_EQ(arc_time(5.0, 0.0, 1.0, cp), 0.0);
  EXPECT_EQ(arc_time(5.0, 1.0, 0.0, cp), 0.0);
  EXPECT_TRUE(std::isinf(arc_time(5.0, 1.0, 2.0, cp)));
}

TEST(MultiSubflow, EvaluateTwoSubflows) {
  const Instance inst = fig1();
  const auto a = SubflowAssignment::from_paths(inst.network, {path_of("1-4-7"), path_of("1-2-3-7")});
  const double v = evaluate_assignment(a, inst.network, fig1_cp(2));
  EXPECT_NEAR(v, 10.844 + 6.1 + 12.889 + 7.25, 1e-2);
  EXPECT_NEAR(v, 37.083, 0.05);
  EXPECT_NEAR(v, 37.077, 0.05);
}

TEST(MultiSubflow, EvaluateThreeSubflows) {
  const Instance inst = fig1();
  const auto a =
      SubflowAssignment::from_paths(inst.network, {path_of("1-4-7"), path_of("1-2-3-7"), path_of("1-5-6-7")});
  const double v = evaluate_assignment(a, inst.network, fig1_cp(3));
  EXPECT_NEAR(v, (42.0 / 3.0) / std::pow(8.0 / 9.0, 2) + 14.0, 1e-12);
  EXPECT_NEAR(v, 31.719, 0.01);
}

TEST(MultiSubflow, SingleSubflowSaturates) {
  const Instance inst = fig1();
  const auto a = SubflowAssignment::from_paths(inst.network, {path_of("1-4-7")});
  EXPECT_TRUE(std::isinf(evaluate_assignment(a, inst.network, fig1_cp(1))));
  const auto specs = homogeneous_subflows(1, 0.0, 1.0);
  const MultiSolution s = solve_exact(inst.network, fig1_cp(1), specs);
  EXPECT_TRUE(s.saturated);
  EXPECT_TRUE(std::isinf(s.objective));
  ASSERT_EQ(s.routes.size(), 1u);
  EXPECT_EQ(s.routes[0], path_of("1-4-7"));
}

TEST(MultiSubflow, EvaluateMatchesDirectFormulaOnRandomAssignments) {
  const Instance inst = fig1();
  const auto paths = enumerate_simple_paths(inst.network);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);
  for (int n = 2; n <= 8; ++n) {
    for (int t = 0; t < 30; ++t) {
      std::vector<Path> chosen;
      std::vector<std::vector<int>> raw;
      for (int k = 0; k < n; ++k) {
        chosen.push_back(paths[pick(rng)]);
        raw.push_back(chosen.back().nodes);
      }
      const auto cp = fig1_cp(n);
      const double got = evaluate_assignment(SubflowAssignment::from_paths(inst.network, chosen), inst.network, cp);
      const double want = oracle_subflow_objective(inst.network, cp, raw);
      if (std::isinf(want)) {
        EXPECT_TRUE(std::isinf(got));
      } else {
        EXPECT_NEAR(got, want, 1e-9 * want);
      }
    }
  }
}

struct TableRow {
  int n;
  double objective;
  std::map<std::string, int> routes;
};

TEST(MultiSubflow, ExactReproducesReferenceTable) {
  const Instance inst = fig1();
  const std::vector<TableRow> rows = {
      {2, 37.077, {{label("1-4-7"), 1}, {label("1-2-3-7"), 1}}},
      {3, 31.7148, {{label("1-4-7"), 1}, {label("1-2-3-7"), 1}, {label("1-5-6-7"), 1}}},
      {4, 32.8662, {{label("1-4-7"), 2}, {label("1-2-3-7"), 1}, {label("1-5-6-7"), 1}}},
      {5, 32.1921, {{label("1-4-7"), 2}, {label("1-2-3-7"), 2}, {label("1-5-6-7"), 1}}},
      {6, 31.7148, {{label("1-4-7"), 2}, {label("1-2-3-7"), 2}, {label("1-5-6-7"), 2}}},
      {10, 31.5279, {{label("1-4-7"), 4}, {label("1-2-3-7"), 3}, {label("1-5-6-7"), 3}}},
      {15, 31.4851, {{label("1-4-7"), 5}, {label("1-2-3-7"), 5}, {label("1-5-6-7"), 4}, {label("1-4-6-7"), 1}}},
      {25, 31.4513, {{label("1-4-7"), 9}, {label("1-2-3-7"), 8}, {label("1-5-6-7"), 7}, {label("1-4-6-7"), 1}}},
      {30, 31.4768, {{label("1-4-7"), 11}, {label("1-2-3-7"), 10}, {label("1-5-6-7"), 8}, {label("1-4-6-7"), 1}}},
  };
  for (const auto& row : rows) {
    const auto specs = homogeneous_subflows(row.n, 0.0, 1.0);
    const MultiSolution s = solve_exact(inst.network, fig1_cp(row.n), specs);
    EXPECT_NEAR(s.objective, row.objective, 0.01 * row.objective) << "N=" << row.n;
    EXPECT_EQ(multiset(s), row.routes) << "N=" << row.n;
    EXPECT_TRUE(verify_subflow_balance(s, specs));
    EXPECT_TRUE(verify_subflow_terminal(s));
  }
}

TEST(MultiSubflow, ObjectiveSettlesFromTenSubflows) {
  const Instance inst = fig1();
  auto solve = [&](int n) { return solve_exact(inst.network, fig1_cp(n), homogeneous_subflows(n, 0.0, 1.0)).objective; };
  const double ref = solve(25);
  for (int n : {10, 15, 25, 30}) EXPECT_LE(std::abs(solve(n) - ref) / ref, 0.003) << n;
}

TEST(MultiSubflow, ExactMatchesLabelledBruteForce) {
  std::mt19937_64 rng(9);
  RandomNetworkOptions opts;
  opts.max_nodes = 7;
  for (int t = 0; t < 40; ++t) {
    const Instance inst = random_instance(rng, opts);
    const auto paths = oracle_simple_paths(inst.network);
    if (paths.size() > 8) continue;
    for (int n = 2; n <= 3; ++n) {
      const auto cp = CongestionParams::from(inst.params, n);
      double best = INFINITY;
      std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
      while (true) {
        std::vector<std::vector<int>> chosen;
        for (auto i : idx) chosen.push_back(paths[i]);
        best = std::min(best, oracle_subflow_objective(inst.network, cp, chosen));
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == paths.size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
      const MultiSolution s = solve_exact(inst.network, cp, homogeneous_subflows(n, 0.0, 1.0));
      if (std::isinf(best)) {
        EXPECT_TRUE(s.saturated);
      } else {
        EXPECT_NEAR(s.objective, best, 1e-9 * best) << t << " N=" << n;
      }
    }
  }
}

TEST(MultiSubflow, LocalSearchNearExactAtTen) {
  const Instance inst = fig1();
  const auto specs = homogeneous_subflows(10, 0.0, 1.0);
  const double exact = solve_exact(inst.network, fig1_cp(10), specs).objective;
  LocalSearchOptions opts;
  opts.seed = 42;
  opts.restarts = 20;
  const double local = solve_local_search(inst.network, fig1_cp(10), specs, opts).objective;
  EXPECT_LE((local - exact) / exact, 0.005);
}

TEST(MultiSubflow, ExactDominatesLocalSearch) {
  const Instance inst = fig1();
  for (int n = 2; n <= 10; ++n) {
    const auto specs = homogeneous_subflows(n, 0.0, 1.0);
    const MultiSolution e = solve_exact(inst.network, fig1_cp(n), specs);
    const MultiSolution l = solve_local_search(inst.network, fig1_cp(n), specs);
    EXPECT_LE(e.objective, l.objective + 1e-9) << n;
    EXPECT_TRUE(verify_subflow_balance(l, specs));
    EXPECT_TRUE(verify_subflow_terminal(l));
  }
}

TEST(MultiSubflow, LocalSearchSingleSubflowIsSaturated) {
  const Instance inst = fig1();
  const MultiSolution s = solve_local_search(inst.network, fig1_cp(1), homogeneous_subflows(1, 0.0, 1.0));
  EXPECT_TRUE(s.saturated);
  EXPECT_TRUE(std::isinf(s.objective));
  EXPECT_EQ(s.assignment.paths.size(), 1u);
}

TEST(MultiSubflow, SinglePathNetworkUsesThatPath) {
  const Instance inst = line_instance({2.0, 3.0, 1.0}, 20.0, 0.0);
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    LocalSearchOptions opts;
    opts.seed = seed;
    const MultiSolution s =
        solve_local_search(inst.network, CongestionParams::from(inst.params, 4), homogeneous_subflows(4, 0.0, 1.0), opts);
    for (const auto& p : s.assignment.paths) EXPECT_EQ(p, path_of("1-2-3-4"));
  }
}

TEST(MultiSubflow, PermutationInvariance) {
  const Instance inst = fig1();
  std::vector<Path> paths = {path_of("1-4-7"), path_of("1-2-3-7"), path_of("1-5-6-7"), path_of("1-4-7"),
                             path_of("1-4-6-7")};
  const auto cp = fig1_cp(5);
  const double ref = evaluate_assignment(SubflowAssignment::from_paths(inst.network, paths), inst.network, cp);
  std::sort(paths.begin(), paths.end());
  do {
    EXPECT_DOUBLE_EQ(evaluate_assignment(SubflowAssignment::from_paths(inst.network, paths), inst.network, cp), ref);
  } while (std::next_permutation(paths.begin(), paths.end()));
}

TEST(MultiSubflow, ZeroChargingReducesToCongestionTime) {
  const Instance inst = fig1();
  auto cp = fig1_cp(3);
  cp.eg = 0.0;
  const auto a =
      SubflowAssignment::from_paths(inst.network, {path_of("1-4-7"), path_of("1-2-3-7"), path_of("1-5-6-7")});
  const auto parts = objective_from_loads(a.arc_loads, inst.network, cp);
  EXPECT_EQ(parts.charging, 0.0);
  EXPECT_NEAR(evaluate_assignment(a, inst.network, cp), (42.0 / 3.0) / std::pow(8.0 / 9.0, 2), 1e-12);
}

TEST(MultiSubflow, FastTrafficReducesToChargingTime) {
  const Instance inst = fig1();
  auto cp = fig1_cp(3);
  cp.free_flow_speed = 1e12;
  const auto a =
      SubflowAssignment::from_paths(inst.network, {path_of("1-4-7"), path_of("1-2-3-7"), path_of("1-5-6-7")});
  EXPECT_NEAR(evaluate_assignment(a, inst.network, cp), (12.2 + 14.5 + 15.3) / 3.0, 1e-9);
}

TEST(MultiSubflow, ThreadCountDoesNotChangeResult) {
  const Instance inst = fig1();
  for (int n : {7, 10, 15}) {
    const auto specs = homogeneous_subflows(n, 0.0, 1.0);
    ExactOptions one;
    ExactOptions many;
    many.threads = 4;
    const MultiSolution a = solve_exact(inst.network, fig1_cp(n), specs, one);
    const MultiSolution b = solve_exact(inst.network, fig1_cp(n), specs, many);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_EQ(a.routes, b.routes);
    EXPECT_EQ(a.route_counts, b.route_counts);
  }
}

TEST(MultiSubflow, CompositionCapIsEnforced) {
  EXPECT_EQ(composition_count(10, 6), 3003u);
  EXPECT_EQ(composition_count(25, 6), 142506u);
  EXPECT_EQ(composition_count(1000, 200), UINT64_MAX);
  const Instance inst = fig1();
  ExactOptions opts;
  opts.max_compositions = 100;
  EXPECT_THROW(solve_exact(inst.network, fig1_cp(10), homogeneous_subflows(10, 0.0, 1.0), opts), LimitExceededError);
}

TEST(MultiSubflow, ExactRejectsHeterogeneousSubflows) {
  const Instance inst = fig1();
  auto specs = homogeneous_subflows(3, 0.0, 1.0);
  specs[1].initial_energy = 1.0;
  EXPECT_THROW(solve_exact(inst.network, fig1_cp(3), specs), InvalidArgumentError);
  EXPECT_NO_THROW(solve_local_search(inst.network, fig1_cp(3), specs));
}

TEST(MultiSubflow, RechargeEqualsScaledPathEnergy) {
  const Instance inst = fig1();
  const auto specs = homogeneous_subflows(3, 0.0, 1.0);
  const MultiSolution s = solve_exact(inst.network, fig1_cp(3), specs);
  for (std::size_t k = 0; k < s.assignment.paths.size(); ++k) {
    const double dist = path_metrics(inst.network, s.assignment.paths[k]).total_distance;
    EXPECT_NEAR(s.recharges[k].total(), dist / 3.0, 1e-12);
    EXPECT_NEAR(s.recharges[k].residual.back(), 0.0, 1e-12);
  }
}

TEST(MultiSubflow, RechargeWithAmpleOrShortInitialEnergy) {
  const Instance inst = make_instance("two-path", {{1, true, 1.0}, {2, true, 1.0}, {3, false, 0.0}},
                                      {{1, 3, 4.0, {}, {}}, {1, 2, 2.0, {}, {}}, {2, 3, 3.0, {}, {}}}, 1, 3, {});
  const auto cp = CongestionParams::from(inst.params, 2);
  const auto a = SubflowAssignment::from_paths(inst.network, {path_of("1-3"), path_of("1-2-3")});
  // Subflow energies are distance * R / N: 2 on 1-3 and 2.5 on 1-2-3.
  std::vector<ChargingSpec> specs = {{INFINITY, 2.0, 1.0}, {INFINITY, 2.5 - 0.75, 1.0}};
  const auto r = recharge_for_subflows(a, inst.network, cp, specs);
  EXPECT_NEAR(r[0].total(), 0.0, 1e-12);
  EXPECT_NEAR(r[1].total(), 0.75, 1e-12);
  std::vector<ChargingSpec> ample = {{INFINITY, 5.0, 1.0}, {INFINITY, 5.0, 1.0}};
  for (const auto& s : recharge_for_subflows(a, inst.network, cp, ample)) EXPECT_EQ(s.total(), 0.0);
}

TEST(MultiSubflow, SubflowLegScalesEnergy) {
  const Instance inst = fig1();
  const LegProfile l = subflow_leg(inst.network, path_of("1-4-7"), fig1_cp(4));
  ASSERT_EQ(l.arc_energy.size(), 2u);
  EXPECT_NEAR(l.arc_energy[0], 6.2 / 4.0, 1e-12);
  EXPECT_NEAR(l.arc_energy[1], 6.0 / 4.0, 1e-12);
}

TEST(MultiSubflow, CandidatesFallBackToKShortest) {
  const Instance inst = fig1();
  CandidateOptions opts;
  opts.max_enumerated_paths = 3;
  opts.k_shortest = 4;
  const auto c = candidate_paths(inst.network, fig1_cp(3), opts);
  EXPECT_EQ(c.size(), 4u);
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
  EXPECT_EQ(candidate_paths(inst.network, fig1_cp(3)).size(), 6u);
}
