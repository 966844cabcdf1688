#include "evroute/congestion.hpp"

#include <cmath>
#include <limits>

#include "evroute/errors.hpp"

namespace evroute {

CongestionParams CongestionParams::from(const ModelParams& params, int subflows) {
  CongestionParams cp;
  cp.free_flow_speed = params.free_flow_speed;
  cp.p_exp = params.p_exp;
  cp.q_exp = params.q_exp;
  cp.inflow_rate = params.inflow_rate;
  cp.subflows = subflows;
  cp.eg = params.eg();
  return cp;
}

void CongestionParams::validate() const {
  if (!(free_flow_speed > 0.0)) throw ValidationError("v_f must be positive");
  if (subflows < 1) throw ValidationError("subflow count must be at least 1");
  if (!(inflow_rate > 0.0)) throw ValidationError("R must be positive");
  if (!(p_exp > 0.0) || !(q_exp > 0.0)) throw ValidationError("p_exp and q_exp must be positive");
  if (!(eg >= 0.0)) throw ValidationError("e*g must be nonnegative");
}

double fast_pow(double x, double e) {
  if (e == std::trunc(e) && std::abs(e) <= 16.0) {
    auto n = static_cast<int>(std::abs(e));
    double r = 1.0;
    double b = x;
    while (n > 0) {
      if (n & 1) r *= b;
      b *= b;
      n >>= 1;
    }
    return e < 0.0 ? 1.0 / r : r;
  }
  return std::pow(x, e);
}

double congestion_factor(double density, double p_exp, double q_exp) {
  if (density >= 1.0) return std::numeric_limits<double>::infinity();
  if (density <= 0.0) return 1.0;
  return fast_pow(1.0 - fast_pow(density, p_exp), -q_exp);
}

}  // namespace evroute
