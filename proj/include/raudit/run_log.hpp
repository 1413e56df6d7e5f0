#pragma once

// JSONL persistence for deliberation runs: one header line carrying the
// seed and full dial configuration, then one line per round. Records are
// byte-identical across replays of the same seed, so logs double as golden
// files in tests.

#include <cstdint>
#include <ostream>
#include <string>

#include "json.hpp"
#include "raudit/domain.hpp"
#include "raudit/engine.hpp"

namespace raudit::log {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const DialConfig& c) {
  ordered_json j;
  j["rho_target"] = c.rho_target;
  j["k_p"] = c.k_p;
  j["k_i"] = c.k_i;
  j["k_d"] = c.k_d;
  j["mu"] = c.mu;
  j["gamma_beta"] = c.gamma_beta;
  j["delta_beta"] = c.delta_beta;
  j["eta_tau"] = c.eta_tau;
  j["delta_s"] = c.delta_s;
  j["delta_js"] = c.delta_js;
  j["delta_u"] = c.delta_u;
  j["epsilon"] = c.epsilon;
  j["w"] = c.w;
  j["t_max"] = c.t_max;
  j["tau_init"] = c.tau_init;
  j["beta_init"] = c.beta_init;
  return j;
}

inline ordered_json to_json(const engine::RunLogRecord& r) {
  ordered_json j;
  j["run_id"] = r.run_id;
  j["t"] = r.t;
  j["rho_bar"] = r.rho_bar;
  j["rho_per_agent"] = r.rho_per_agent;
  j["js"] = r.js;
  j["ov"] = r.ov;
  j["s_t"] = r.s_t;
  j["e_t"] = r.e_t;
  j["u_t"] = r.u_t;
  j["quadrant"] = r.quadrant;
  j["actuator"] = r.actuator;
  j["beta"] = r.beta;
  j["tau"] = r.tau;
  j["conclusions"] = r.conclusions;
  j["cited"] = r.cited;
  if (r.terminal) j["terminal"] = *r.terminal;
  return j;
}

class RunLogWriter {
 public:
  explicit RunLogWriter(std::ostream& out) : out_(out) {}

  void header(const std::string& run_id, std::uint64_t seed, const DialConfig& cfg,
              bool gain_condition_ok) {
    ordered_json j;
    j["run_id"] = run_id;
    j["seed"] = seed;
    j["gain_condition_ok"] = gain_condition_ok;
    j["config"] = to_json(cfg);
    out_ << j.dump() << "\n";
  }

  void record(const engine::RunLogRecord& r) { out_ << to_json(r).dump() << "\n"; }

 private:
  std::ostream& out_;
};

}  // namespace raudit::log
