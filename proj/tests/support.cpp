#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace testing_support {

using namespace evroute;

std::string data_path(const std::string& file) { return std::string(EVROUTE_DATA_DIR) + "/" + file; }

Instance fig1() { return load_network(data_path("fig1.net")); }

double fig1_distance(int from, int to) {
  static const std::map<std::pair<int, int>, double> table = {
      {{1, 2}, 5.0}, {{1, 4}, 6.2}, {{1, 5}, 7.0}, {{2, 3}, 3.5}, {{2, 4}, 5.0},
      {{4, 6}, 3.6}, {{5, 6}, 4.3}, {{3, 7}, 6.0}, {{4, 7}, 6.0}, {{6, 7}, 4.0}};
  return table.at({from, to});
}

Path path_of(const std::string& label) {
  Path p;
  std::stringstream ss(label);
  std::string item;
  while (std::getline(ss, item, '-')) p.nodes.push_back(std::stoi(item));
  return p;
}

std::vector<std::vector<int>> oracle_simple_paths(const Network& net) {
  std::vector<std::vector<int>> out;
  std::vector<int> stack{net.origin()};
  std::function<void(int)> visit = [&](int u) {
    if (u == net.destination()) {
      out.push_back(stack);
      return;
    }
    for (const Arc& a : net.arcs()) {
      if (a.from != u) continue;
      if (std::find(stack.begin(), stack.end(), a.to) != stack.end()) continue;
      stack.push_back(a.to);
      visit(a.to);
      stack.pop_back();
    }
  };
  visit(net.origin());
  std::sort(out.begin(), out.end());
  return out;
}

double oracle_combined_weight(const Network& net, const std::vector<int>& nodes, double g) {
  double w = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    for (const Arc& a : net.arcs()) {
      if (a.from == nodes[i] && a.to == nodes[i + 1]) w += a.travel_time + g * a.energy;
    }
  }
  return w;
}

double oracle_lp_min(const std::vector<double>& c, const std::vector<std::vector<double>>& a,
                     const std::vector<double>& b, std::vector<double>* x_out) {
  constexpr double eps = 1e-10;
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  std::size_t n_art = 0;
  for (double bi : b) n_art += bi < 0.0 ? 1 : 0;
  const std::size_t cols = n + m + n_art;
  // Tableau rows hold [coefficients | rhs].
  std::vector<std::vector<double>> t(m, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(m);
  std::size_t art = n + m;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = sign * a[i][j];
    t[i][n + i] = sign;
    t[i][cols] = sign * b[i];
    if (b[i] < 0.0) {
      t[i][art] = 1.0;
      basis[i] = art++;
    } else {
      basis[i] = n + i;
    }
  }
  auto pivot = [&](std::size_t r, std::size_t col) {
    const double pv = t[r][col];
    for (double& v : t[r]) v /= pv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || t[i][col] == 0.0) continue;
      const double f = t[i][col];
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = col;
  };
  // Returns false when unbounded.
  auto optimise = [&](const std::vector<double>& cost, std::size_t usable) {
    for (int guard = 0; guard < 100000; ++guard) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < usable; ++j) {
        double rc = cost[j];
        for (std::size_t i = 0; i < m; ++i) rc -= cost[basis[i]] * t[i][j];
        if (rc < -eps) {
          enter = j;
          break;
        }
      }
      if (enter == cols) return true;
      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] > eps) {
          const double ratio = t[i][cols] / t[i][enter];
          if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leave < m && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
    return true;
  };

  if (n_art > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = n + m; j < cols; ++j) phase1[j] = 1.0;
    optimise(phase1, cols);
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] >= n + m) infeas += t[i][cols];
    }
    if (infeas > 1e-9) return std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < n + m) continue;
      for (std::size_t j = 0; j < n + m; ++j) {
        if (std::abs(t[i][j]) > eps) {
          pivot(i, j);
          break;
        }
      }
    }
  }
  std::vector<double> cost(cols, 0.0);
  std::copy(c.begin(), c.end(), cost.begin());
  if (!optimise(cost, n + m)) return -std::numeric_limits<double>::infinity();
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) x[basis[i]] = t[i][cols];
  }
  double value = 0.0;
  for (std::size_t j = 0; j < n; ++j) value += c[j] * x[j];
  if (x_out) *x_out = x;
  return value;
}

double oracle_price_optimal_cost(const std::vector<double>& arc_energy, const std::vector<bool>& can_charge,
                                 const std::vector<double>& price, double capacity, double initial_energy) {
  const std::size_t k = arc_energy.size();  // arcs; nodes 0..k
  // Variables: r_0..r_{k-1}, then E_1..E_k.
  const std::size_t nv = 2 * k;
  auto r = [](std::size_t i) { return i; };
  auto e = [k](std::size_t node) { return k + node - 1; };
  std::vector<double> c(nv, 0.0);
  for (std::size_t i = 0; i < k; ++i) c[r(i)] = price[i];
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  auto row = [&]() -> std::vector<double>& { return a.emplace_back(nv, 0.0); };
  for (std::size_t i = 0; i < k; ++i) {
    // E_{i+1} <= E_i + r_i - e_i
    auto& dyn = row();
    dyn[e(i + 1)] = 1.0;
    dyn[r(i)] = -1.0;
    double rhs = -arc_energy[i];
    if (i == 0) {
      rhs += initial_energy;
    } else {
      dyn[e(i)] = -1.0;
    }
    b.push_back(rhs);
    // E_i + r_i <= B
    auto& cap = row();
    cap[r(i)] = 1.0;
    if (i == 0) {
      b.push_back(capacity - initial_energy);
    } else {
      cap[e(i)] = 1.0;
      b.push_back(capacity);
    }
    auto& top = row();
    top[e(i + 1)] = 1.0;
    b.push_back(capacity);
    if (!can_charge[i]) {
      auto& off = row();
      off[r(i)] = 1.0;
      b.push_back(0.0);
    }
  }
  return oracle_lp_min(c, a, b);
}

double oracle_path_flow_objective(const Network& net, const CongestionParams& cp,
                                  const std::vector<std::vector<int>>& paths, const std::vector<double>& fractions) {
  std::map<std::pair<int, int>, double> x;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    for (std::size_t i = 0; i + 1 < paths[k].size(); ++i) x[{paths[k][i], paths[k][i + 1]}] += fractions[k];
  }
  double total = 0.0;
  for (const Arc& a : net.arcs()) {
    const double f = x[{a.from, a.to}];
    if (f <= 0.0) continue;
    if (f >= 1.0) return std::numeric_limits<double>::infinity();
    const double d = a.distance;
    total += d * f * cp.inflow_rate / (cp.free_flow_speed * std::pow(1.0 - std::pow(f, cp.p_exp), cp.q_exp)) +
             cp.eg * d * cp.inflow_rate * f;
  }
  return total;
}

double oracle_simplex_grid(const Network& net, const CongestionParams& cp, const std::vector<std::vector<int>>& paths,
                           int divisions) {
  // Arc loads are multiples of 1/divisions, so per-arc costs are tabulated.
  std::map<std::pair<int, int>, std::size_t> index;
  for (std::size_t a = 0; a < net.arc_count(); ++a) index[{net.arc(a).from, net.arc(a).to}] = a;
  std::vector<std::vector<double>> table(net.arc_count(), std::vector<double>(static_cast<std::size_t>(divisions) + 1));
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    const double d = net.arc(a).distance;
    for (int m = 0; m <= divisions; ++m) {
      const double f = static_cast<double>(m) / divisions;
      double v = 0.0;
      if (m == divisions && d > 0.0) {
        v = std::numeric_limits<double>::infinity();
      } else if (m > 0) {
        v = d * f * cp.inflow_rate / (cp.free_flow_speed * std::pow(1.0 - std::pow(f, cp.p_exp), cp.q_exp)) +
            cp.eg * d * cp.inflow_rate * f;
      }
      table[a][static_cast<std::size_t>(m)] = v;
    }
  }
  std::vector<std::vector<std::size_t>> inc;
  for (const auto& p : paths) {
    auto& arcs = inc.emplace_back();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) arcs.push_back(index.at({p[i], p[i + 1]}));
  }
  std::vector<int> load(net.arc_count(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, int)> rec = [&](std::size_t k, int remaining) {
    if (k + 1 == inc.size()) {
      for (auto a : inc[k]) load[a] += remaining;
      double v = 0.0;
      for (std::size_t a = 0; a < load.size(); ++a) v += table[a][static_cast<std::size_t>(load[a])];
      best = std::min(best, v);
      for (auto a : inc[k]) load[a] -= remaining;
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      rec(k + 1, remaining - c);
      for (auto a : inc[k]) ++load[a];
    }
    for (auto a : inc[k]) load[a] -= remaining + 1;
  };
  rec(0, divisions);
  return best;
}

Instance random_instance(std::mt19937_64& rng, const RandomNetworkOptions& opts) {
  std::uniform_int_distribution<int> node_count(opts.min_nodes, opts.max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> dist(opts.min_distance, opts.max_distance);
  std::uniform_real_distribution<double> energy(opts.energy_lo, opts.energy_hi);
  std::uniform_real_distribution<double> price(0.5, 3.0);
  const int n = node_count(rng);

  std::map<std::pair<int, int>, bool> arcs;
  // A random increasing spine guarantees reachability.
  int u = 1;
  while (u != n) {
    std::uniform_int_distribution<int> step(u + 1, n);
    const int v = step(rng);
    arcs[{u, v}] = true;
    u = v;
  }
  for (int i = 1; i < n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      if (unit(rng) < opts.arc_probability) arcs[{i, j}] = true;
      if (opts.allow_back_arcs && i != 1 && j != n && unit(rng) < opts.arc_probability / 3) arcs[{j, i}] = true;
    }
  }
  std::vector<Node> nodes;
  for (int i = 1; i <= n; ++i) {
    const bool charger = i == n ? false : unit(rng) >= opts.no_charger_probability;
    nodes.push_back({i, charger, i == n ? 0.0 : price(rng)});
  }
  std::vector<ArcSpec> specs;
  for (const auto& [key, on] : arcs) {
    ArcSpec s{key.first, key.second, dist(rng), std::nullopt, std::nullopt};
    if (opts.explicit_energy) s.energy = energy(rng);
    specs.push_back(s);
  }
  ModelParams params;
  params.capacity = opts.capacity;
  return make_instance("random", std::move(nodes), specs, 1, n, params);
}

Instance line_instance(const std::vector<double>& energies, double capacity, double initial_energy,
                       const std::vector<double>& prices) {
  const int n = static_cast<int>(energies.size()) + 1;
  std::vector<Node> nodes;
  for (int i = 1; i <= n; ++i) {
    const double p = i - 1 < static_cast<int>(prices.size()) ? prices[static_cast<std::size_t>(i - 1)] : 1.0;
    nodes.push_back({i, i != n, i == n ? 0.0 : p});
  }
  std::vector<ArcSpec> specs;
  for (int i = 1; i < n; ++i) specs.push_back({i, i + 1, std::nullopt, 1.0, energies[static_cast<std::size_t>(i - 1)]});
  ModelParams params;
  params.capacity = capacity;
  params.initial_energy = initial_energy;
  return make_instance("line", std::move(nodes), specs, 1, n, params);
}

}  // namespace testing_support
