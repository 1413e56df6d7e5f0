#pragma once

// The feedback half of the loop: PID tracking of the quality setpoint,
// quadrant diagnosis, and the contentiousness / evidence-threshold dials.

#include <algorithm>
#include <cmath>

#include "raudit/domain.hpp"

namespace raudit::control {

// Integral and derivative memory carried between rounds.
struct PidState {
  double e_sum = 0.0;
  double e_prev = 0.0;
  int t = 0;  // completed controller steps
};

enum class LoopState { Stuck, Converged, Chaotic, Healthy };

enum class Actuator { Explore, Refine, Consolidate, NaturalDecayOnly };

inline const char* to_string(LoopState s) {
  switch (s) {
    case LoopState::Stuck: return "stuck";
    case LoopState::Converged: return "converged";
    case LoopState::Chaotic: return "chaotic";
    case LoopState::Healthy: return "healthy";
  }
  return "unknown";
}

inline const char* to_string(Actuator a) {
  switch (a) {
    case Actuator::Explore: return "explore";
    case Actuator::Refine: return "refine";
    case Actuator::Consolidate: return "consolidate";
    case Actuator::NaturalDecayOnly: return "none";
  }
  return "unknown";
}

struct QuadrantDecision {
  LoopState state;
  Actuator actuator;
  bool beta_boost;  // only the stuck quadrant raises contentiousness
};

struct PidResult {
  double u = 0.0;
  PidState next;
};

// Stability inequality for the contentiousness recursion:
//   K_p + T_max * K_i + 2 * K_d < 1 / gamma_beta.
// The left side bounds |u_t| given the error clamp and anti-windup cap.
inline double gain_bound_lhs(const DialConfig& c) {
  return c.k_p + static_cast<double>(c.t_max) * c.k_i + 2.0 * c.k_d;
}

inline double gain_bound_rhs(const DialConfig& c) { return 1.0 / c.gamma_beta; }

inline bool check_gain_condition(const DialConfig& c) {
  return gain_bound_lhs(c) < gain_bound_rhs(c);
}

// Tracking error with the sycophancy penalty folded in, clamped to [-1, 2]:
// quality shortfall alone lives in [-1, 1] and the penalty adds at most 1.
inline double compute_error(double rho_bar, double rho_target, bool syco, double mu) {
  double e = (rho_target - rho_bar) + (syco ? mu : 0.0);
  return std::clamp(e, -1.0, 2.0);
}

// One PID step. The integral is capped at +/- t_max before use (anti-windup)
// and the derivative term is zero on the first step, where e_prev is seeded
// with the current error.
inline PidResult pid_step(const PidState& s, double e_t, const DialConfig& c) {
  const double cap = static_cast<double>(c.t_max);
  PidResult r;
  r.next.e_sum = std::clamp(s.e_sum + e_t, -cap, cap);
  const double deriv = (s.t == 0) ? 0.0 : e_t - s.e_prev;
  r.u = c.k_p * e_t + c.k_i * r.next.e_sum + c.k_d * deriv;
  r.next.e_prev = e_t;
  r.next.t = s.t + 1;
  return r;
}

// Divergence x quality table. High dispersion with high quality is the
// productive regime and gets no actuator beyond natural decay.
inline QuadrantDecision diagnose_quadrant(double js, double rho_bar, const DialConfig& c) {
  const bool div = js >= c.delta_js;
  const bool qual = rho_bar >= c.rho_target;
  if (!div && !qual) return {LoopState::Stuck, Actuator::Explore, true};
  if (!div && qual) return {LoopState::Converged, Actuator::Consolidate, false};
  if (div && !qual) return {LoopState::Chaotic, Actuator::Refine, false};
  return {LoopState::Healthy, Actuator::NaturalDecayOnly, false};
}

inline bool actuator_fires(const QuadrantDecision& d, double u_t, const DialConfig& c) {
  return u_t > c.delta_u && d.actuator != Actuator::NaturalDecayOnly;
}

// Contentiousness update, applied in order: stuck boost (when the correction
// clears delta_u), then the unconditional geometric decay. A firing
// consolidate actuator damps by one extra decay factor. Result clipped to
// [0,1].
inline double update_beta(double beta, const QuadrantDecision& d, double u_t,
                          const DialConfig& c) {
  if (d.beta_boost && u_t > c.delta_u) {
    beta = std::min(beta + c.delta_beta, 1.0);
  }
  beta *= c.gamma_beta;
  if (d.actuator == Actuator::Consolidate && actuator_fires(d, u_t, c)) {
    beta *= c.gamma_beta;
  }
  return std::clamp(beta, 0.0, 1.0);
}

// Evidence-threshold update. The gate opens only while beliefs agree
// (JS below delta_js): tau then relaxes toward the mean quality of the
// round's cited spans. Clipped to [0,1].
inline double update_tau(double tau, double q_round, double js, const DialConfig& c) {
  if (js < c.delta_js) {
    tau += c.eta_tau * (q_round - tau);
  }
  return std::clamp(tau, 0.0, 1.0);
}

}  // namespace raudit::control
