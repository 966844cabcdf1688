#pragma once

#include "evroute/instance.hpp"

namespace evroute {

/// Parameters of the speed-density law v = v_f (1 - (k / k_jam)^p)^q and of
/// the subflow split of the inflow R.
struct CongestionParams {
  double free_flow_speed = 1.0;  // v_f
  double p_exp = 2.0;
  double q_exp = 2.0;
  double inflow_rate = 1.0;  // R
  int subflows = 1;          // N, also the jam density k_jam
  double eg = 1.0;           // e * g, charging minutes per mile

  static CongestionParams from(const ModelParams& params, int subflows);

  /// Throws ValidationError on out-of-range values.
  void validate() const;

  /// Inflow carried by one subflow, R / N.
  [[nodiscard]] double subflow_rate() const { return inflow_rate / subflows; }
};

/// x^e, exact repeated multiplication when e is a small integer.
double fast_pow(double x, double e);

/// Travel-time multiplier 1 / (1 - density^p)^q for density in [0, 1];
/// +infinity at and beyond the jam density.
double congestion_factor(double density, double p_exp, double q_exp);

}  // namespace evroute
