#pragma once

// Strict JSON configuration loader. Unknown keys are rejected rather than
// ignored, range violations name the offending key, and credentials are
// referenced by environment-variable name only, never inlined.

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "raudit/backends.hpp"
#include "raudit/domain.hpp"

namespace raudit::config {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ScriptedReplySpec {
  std::string conclusion;
  std::vector<double> belief;
  std::string argument;
  std::vector<std::string> cites;
};

struct ScriptedVerdictSpec {
  backends::AuditStatus status = backends::AuditStatus::Poor;
  std::array<double, 4> pillars = {0.0, 0.0, 0.0, 0.0};
  std::string critique;
  std::vector<PathologyKind> pathologies;
};

struct ScriptedBackendSpec {
  std::vector<std::vector<ScriptedReplySpec>> agent_scripts;
  std::vector<ScriptedVerdictSpec> auditor_script;
};

struct SyntheticBackendSpec {
  double kappa = 0.7;
  std::optional<double> lambda;  // overrides the kappa calibration when set
  double noise_scale = 0.005;
  std::size_t n_agents = 2;
  backends::CitationProfile profile = backends::CitationProfile::Healthy;
};

struct HttpBackendSpec {
  backends::ChatEndpointConfig agent_endpoint;
  std::optional<backends::ChatEndpointConfig> auditor_endpoint;  // defaults to agent_endpoint
};

struct AppConfig {
  DialConfig dial;
  std::vector<std::string> answer_space = {"A", "B"};
  std::string query = "synthetic deliberation";
  std::optional<std::string> hint;
  std::variant<SyntheticBackendSpec, ScriptedBackendSpec, HttpBackendSpec> backend =
      SyntheticBackendSpec{};
};

namespace detail {

using nlohmann::json;

inline void expect_keys(const json& obj, const std::set<std::string>& allowed,
                        const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + where + key + "'");
    }
  }
}

template <typename T>
T get_as(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + where + key + "': " + e.what());
  }
}

template <typename T>
void maybe(const json& obj, const char* key, T& out, const std::string& where) {
  if (obj.contains(key)) out = get_as<T>(obj, key, where);
}

inline void parse_dial(const json& j, DialConfig& d) {
  maybe(j, "rho_target", d.rho_target, "");
  maybe(j, "k_p", d.k_p, "");
  maybe(j, "k_i", d.k_i, "");
  maybe(j, "k_d", d.k_d, "");
  maybe(j, "mu", d.mu, "");
  maybe(j, "gamma_beta", d.gamma_beta, "");
  maybe(j, "delta_beta", d.delta_beta, "");
  maybe(j, "eta_tau", d.eta_tau, "");
  maybe(j, "delta_s", d.delta_s, "");
  maybe(j, "delta_js", d.delta_js, "");
  maybe(j, "delta_u", d.delta_u, "");
  maybe(j, "epsilon", d.epsilon, "");
  maybe(j, "w", d.w, "");
  maybe(j, "t_max", d.t_max, "");
  maybe(j, "tau_init", d.tau_init, "");
  maybe(j, "beta_init", d.beta_init, "");
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("dial config: ") + e.what());
  }
}

inline backends::ChatEndpointConfig parse_endpoint(const json& j, const std::string& where) {
  expect_keys(j,
              {"base_url", "path", "model_name", "auth_token_env_var", "timeout_ms",
               "max_retries", "temperature"},
              where);
  backends::ChatEndpointConfig ep;
  ep.base_url = get_as<std::string>(j, "base_url", where);
  maybe(j, "path", ep.path, where);
  maybe(j, "model_name", ep.model_name, where);
  maybe(j, "auth_token_env_var", ep.auth_token_env_var, where);
  maybe(j, "timeout_ms", ep.timeout_ms, where);
  maybe(j, "max_retries", ep.max_retries, where);
  maybe(j, "temperature", ep.temperature, where);
  if (ep.timeout_ms <= 0) throw ConfigError("'" + where + "timeout_ms' must be positive");
  if (ep.max_retries < 0) throw ConfigError("'" + where + "max_retries' must be nonnegative");
  return ep;
}

inline ScriptedReplySpec parse_reply(const json& j, const std::string& where) {
  expect_keys(j, {"conclusion", "belief", "argument", "cites"}, where);
  ScriptedReplySpec r;
  r.conclusion = get_as<std::string>(j, "conclusion", where);
  r.belief = get_as<std::vector<double>>(j, "belief", where);
  maybe(j, "argument", r.argument, where);
  maybe(j, "cites", r.cites, where);
  return r;
}

inline ScriptedVerdictSpec parse_verdict(const json& j, const std::string& where) {
  expect_keys(j, {"status", "pillars", "critique", "pathologies"}, where);
  ScriptedVerdictSpec v;
  const std::string status = get_as<std::string>(j, "status", where);
  if (status == "good") v.status = backends::AuditStatus::Good;
  else if (status == "poor") v.status = backends::AuditStatus::Poor;
  else if (status == "refusal") v.status = backends::AuditStatus::Refusal;
  else throw ConfigError("bad value for '" + where + "status': " + status);
  const auto pillars = get_as<std::vector<double>>(j, "pillars", where);
  if (pillars.size() != 4) {
    throw ConfigError("'" + where + "pillars' must hold exactly 4 scores");
  }
  for (std::size_t i = 0; i < 4; ++i) v.pillars[i] = pillars[i];
  maybe(j, "critique", v.critique, where);
  if (j.contains("pathologies")) {
    for (const auto& p : get_as<std::vector<std::string>>(j, "pathologies", where)) {
      const auto kind = pathology_from_string(p);
      if (!kind) throw ConfigError("unknown pathology in '" + where + "pathologies': " + p);
      v.pathologies.push_back(*kind);
    }
  }
  return v;
}

inline void parse_backend(const json& j, AppConfig& cfg) {
  const std::string kind = get_as<std::string>(j, "kind", "backend.");
  if (kind == "synthetic") {
    expect_keys(j, {"kind", "kappa", "lambda", "noise_scale", "n_agents", "profile"},
                "backend.");
    SyntheticBackendSpec s;
    maybe(j, "kappa", s.kappa, "backend.");
    if (j.contains("lambda")) s.lambda = get_as<double>(j, "lambda", "backend.");
    maybe(j, "noise_scale", s.noise_scale, "backend.");
    maybe(j, "n_agents", s.n_agents, "backend.");
    if (j.contains("profile")) {
      const std::string p = get_as<std::string>(j, "profile", "backend.");
      if (p == "healthy") s.profile = backends::CitationProfile::Healthy;
      else if (p == "sycophantic") s.profile = backends::CitationProfile::Sycophantic;
      else throw ConfigError("bad value for 'backend.profile': " + p);
    }
    if (s.n_agents < 2) throw ConfigError("'backend.n_agents' must be >= 2");
    cfg.backend = s;
  } else if (kind == "scripted") {
    expect_keys(j, {"kind", "agent_scripts", "auditor_script"}, "backend.");
    ScriptedBackendSpec s;
    const json& scripts = j.at("agent_scripts");
    if (!scripts.is_array() || scripts.empty()) {
      throw ConfigError("'backend.agent_scripts' must be a non-empty array");
    }
    for (const auto& script : scripts) {
      std::vector<ScriptedReplySpec> replies;
      for (const auto& r : script) replies.push_back(parse_reply(r, "backend.agent_scripts."));
      if (replies.empty()) throw ConfigError("'backend.agent_scripts' entry is empty");
      s.agent_scripts.push_back(std::move(replies));
    }
    for (const auto& v : get_as<json>(j, "auditor_script", "backend.")) {
      s.auditor_script.push_back(parse_verdict(v, "backend.auditor_script."));
    }
    if (s.auditor_script.empty()) {
      throw ConfigError("'backend.auditor_script' must be a non-empty array");
    }
    cfg.backend = s;
  } else if (kind == "http") {
    expect_keys(j, {"kind", "endpoint", "auditor_endpoint"}, "backend.");
    HttpBackendSpec s;
    s.agent_endpoint = parse_endpoint(j.at("endpoint"), "backend.endpoint.");
    if (j.contains("auditor_endpoint")) {
      s.auditor_endpoint =
          parse_endpoint(j.at("auditor_endpoint"), "backend.auditor_endpoint.");
    }
    cfg.backend = s;
  } else {
    throw ConfigError("bad value for 'backend.kind': " + kind);
  }
}

}  // namespace detail

inline AppConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Turn the byte offset into a line number for a usable message.
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ConfigError("config is not valid JSON (line " + std::to_string(line) +
                      "): " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  static const std::set<std::string> kTop = {
      "rho_target", "k_p", "k_i", "k_d", "mu", "gamma_beta", "delta_beta", "eta_tau",
      "delta_s", "delta_js", "delta_u", "epsilon", "w", "t_max", "tau_init", "beta_init",
      "answer_space", "query", "hint", "backend"};
  detail::expect_keys(j, kTop, "");

  AppConfig cfg;
  detail::parse_dial(j, cfg.dial);
  detail::maybe(j, "answer_space", cfg.answer_space, "");
  detail::maybe(j, "query", cfg.query, "");
  if (j.contains("hint")) cfg.hint = detail::get_as<std::string>(j, "hint", "");
  if (cfg.answer_space.size() < 2) {
    throw ConfigError("'answer_space' needs at least 2 labels");
  }
  if (j.contains("backend")) detail::parse_backend(j.at("backend"), cfg);
  return cfg;
}

inline AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace raudit::config
