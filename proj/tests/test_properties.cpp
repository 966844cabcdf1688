// Randomized lemma suite: every produced solution must satisfy the energy
// identities at 1e-9 absolute tolerance.
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "evroute/errors.hpp"
#include "evroute/flow_relaxation.hpp"
#include "evroute/multi_subflow.hpp"
#include "evroute/single_vehicle.hpp"
#include "support.hpp"

using namespace evroute;
using namespace testing_support;

namespace {

constexpr double kTol = 1e-9;
constexpr int kInstances = 1000;

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

Instance with_initial_energy(const Instance& inst, double e1) {
  ModelParams p = inst.params;
  p.initial_energy = e1;
  return with_params(inst, p);
}

}  // namespace

TEST(Lemmas, Lemma1RechargeBalanceOnSingleVehiclePlans) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandomNetworkOptions opts;
  opts.explicit_energy = true;
  opts.no_charger_probability = 0.15;
  int produced = 0;
  int violations = 0;
  for (int t = 0; t < kInstances; ++t) {
    const Instance inst = with_initial_energy(random_instance(rng, opts), 20.0 * unit(rng));
    for (auto policy : {RechargePolicy::MinimalTotal, RechargePolicy::PriceOptimal}) {
      RoutePlan plan;
      try {
        plan = plan_route(inst.network, inst.params.charging(), policy);
      } catch (const InfeasibleError&) {
        continue;
      } catch (const NegativeCycleError&) {
        continue;
      }
      ++produced;
      const double lhs = sum(plan.recharges) - sum(plan.arc_energy) - plan.discarded;
      const double rhs = plan.residuals.back() - inst.params.initial_energy;
      if (std::abs(lhs - rhs) > kTol || !verify_lemma1(plan, inst.params.charging())) ++violations;
      for (std::size_t i = 0; i < plan.residuals.size(); ++i) {
        if (plan.residuals[i] < -kTol || plan.residuals[i] > inst.params.capacity + kTol) ++violations;
        if (plan.recharges[i] > kTol && !inst.network.node(plan.path.nodes[i]).has_charger) ++violations;
      }
    }
  }
  EXPECT_GE(produced, kInstances);
  EXPECT_EQ(violations, 0);
}

TEST(Lemmas, Lemma2EmptyOnArrivalWhenCharging) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandomNetworkOptions opts;
  opts.explicit_energy = true;
  opts.energy_lo = 0.1;
  int produced = 0;
  int charging = 0;
  int violations = 0;
  for (int t = 0; t < kInstances; ++t) {
    const Instance inst = with_initial_energy(random_instance(rng, opts), 15.0 * unit(rng));
    for (auto policy : {RechargePolicy::MinimalTotal, RechargePolicy::PriceOptimal}) {
      const RoutePlan plan = plan_route(inst.network, inst.params.charging(), policy);
      ++produced;
      if (plan.total_recharge() > 0.0) {
        ++charging;
        if (std::abs(plan.residuals.back()) > kTol) ++violations;
      }
    }
  }
  EXPECT_GE(produced, kInstances);
  EXPECT_GT(charging, kInstances / 2);
  EXPECT_EQ(violations, 0);
}

TEST(Lemmas, Lemma3SubflowBalance) {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> subflows(2, 4);
  RandomNetworkOptions opts;
  opts.max_nodes = 8;
  opts.explicit_energy = true;
  int produced = 0;
  int violations = 0;
  for (int t = 0; t < kInstances; ++t) {
    const Instance inst = random_instance(rng, opts);
    const int n = subflows(rng);
    const auto cp = CongestionParams::from(inst.params, n);
    std::vector<ChargingSpec> specs = homogeneous_subflows(n, 0.0, inst.params.charge_time_per_unit);
    const bool hetero = t % 2 == 1;
    if (hetero) {
      for (auto& s : specs) s.initial_energy = 5.0 * unit(rng);
    }
    LocalSearchOptions lo;
    lo.restarts = 3;
    lo.seed = static_cast<std::uint64_t>(t);
    lo.policy = t % 3 == 0 ? RechargePolicy::PriceOptimal : RechargePolicy::MinimalTotal;
    const MultiSolution sol = hetero ? solve_local_search(inst.network, cp, specs, lo)
                                     : solve_exact(inst.network, cp, specs, {{}, 20'000'000, 1, lo.policy});
    ++produced;
    if (!verify_subflow_balance(sol, specs)) ++violations;
    for (std::size_t k = 0; k < sol.recharges.size(); ++k) {
      const auto& r = sol.recharges[k];
      const double lhs = sum(r.recharge) - sum(sol.legs[k].arc_energy) - r.discarded;
      if (std::abs(lhs - (r.residual.back() - specs[k].initial_energy)) > kTol) ++violations;
      if (r.residual.size() != sol.assignment.paths[k].size()) ++violations;
    }
  }
  EXPECT_GE(produced, kInstances);
  EXPECT_EQ(violations, 0);
}

TEST(Lemmas, Lemma4SubflowEmptyOnArrivalWhenCharging) {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> subflows(2, 4);
  RandomNetworkOptions opts;
  opts.max_nodes = 8;
  int produced = 0;
  int violations = 0;
  for (int t = 0; t < kInstances; ++t) {
    const Instance inst = random_instance(rng, opts);
    const int n = subflows(rng);
    const auto cp = CongestionParams::from(inst.params, n);
    auto specs = homogeneous_subflows(n, 3.0 * unit(rng), inst.params.charge_time_per_unit);
    const MultiSolution sol = solve_exact(inst.network, cp, specs);
    ++produced;
    if (!verify_subflow_terminal(sol)) ++violations;
    for (const auto& r : sol.recharges) {
      if (r.total() > 0.0 && std::abs(r.residual.back()) > kTol) ++violations;
    }
  }
  EXPECT_GE(produced, kInstances);
  EXPECT_EQ(violations, 0);
}

TEST(Lemmas, Lemma5FlowRechargeIdentity) {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> egs(0.0, 5.0);
  RandomNetworkOptions opts;
  opts.explicit_energy = true;
  int produced = 0;
  int violations = 0;
  // Instances whose every route crosses a shared arc have a saturated
  // optimum and no energy to reconstruct; they are drawn again.
  for (int t = 0; produced < kInstances && t < 10 * kInstances; ++t) {
    opts.energy_lo = t % 4 == 0 ? 0.1 : -2.0;
    const Instance inst = random_instance(rng, opts);
    auto cp = CongestionParams::from(inst.params, 1 + t % 3);
    cp.eg = egs(rng);
    const FlowSolution sol = solve_flow(inst.network, cp);
    if (sol.saturated) continue;
    const bool empty_start = t % 2 == 0;
    bool all_positive = true;
    for (const Arc& a : inst.network.arcs()) all_positive = all_positive && a.energy > 0.0;
    std::vector<ChargingSpec> specs =
        homogeneous_subflows(cp.subflows, empty_start ? 0.0 : 4.0 * unit(rng), inst.params.charge_time_per_unit);
    const FlowEnergy fe = reconstruct_flow_energy(sol, inst.network, cp, specs);
    ++produced;
    if (!verify_lemma5(fe)) ++violations;
    for (const auto& s : fe.subflows) {
      const double lhs = sum(s.recharge);
      const double rhs = sum(s.arc_consumption) + s.terminal_energy - s.initial_energy;
      if (std::abs(lhs - rhs) > kTol) ++violations;
      for (double e : s.arc_energy) {
        if (e < -kTol) ++violations;
      }
      if (empty_start && all_positive && lhs > 0.0 && std::abs(s.terminal_energy) > kTol) ++violations;
    }
  }
  EXPECT_GE(produced, kInstances);
  EXPECT_EQ(violations, 0);
}
