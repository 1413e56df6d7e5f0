#pragma once

// Builds runnable agent/auditor sets from a parsed AppConfig. Split from
// config.hpp so config parsing stays free of the HTTP stack.

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "raudit/backends.hpp"
#include "raudit/config.hpp"
#include "raudit/engine.hpp"
#include "raudit/http_backend.hpp"

namespace raudit::factory {

namespace detail {

inline backends::AgentReply reply_from_spec(const config::ScriptedReplySpec& spec,
                                            const AnswerSpace& space, std::size_t agent_idx,
                                            int round) {
  if (!space.contains(spec.conclusion)) {
    throw config::ConfigError("scripted conclusion outside answer_space: " + spec.conclusion);
  }
  if (spec.belief.size() != space.size()) {
    throw config::ConfigError("scripted belief length does not match answer_space");
  }
  ReasoningTrace trace;
  trace.agent_id = "scripted" + std::to_string(agent_idx);
  trace.round = round;
  trace.argument_text = spec.argument;
  trace.cited_spans.insert(spec.cites.begin(), spec.cites.end());
  trace.stated_conclusion = spec.conclusion;
  try {
    return backends::AgentReply{std::move(trace), BeliefDistribution(spec.belief)};
  } catch (const std::invalid_argument& e) {
    throw config::ConfigError(std::string("scripted belief invalid: ") + e.what());
  }
}

inline backends::AuditVerdict verdict_from_spec(const config::ScriptedVerdictSpec& spec) {
  try {
    CritScore crit(spec.pillars[0], spec.pillars[1], spec.pillars[2], spec.pillars[3]);
    std::vector<PathologyLabel> pathologies;
    for (PathologyKind k : spec.pathologies) pathologies.push_back({k, "scripted"});
    return backends::AuditVerdict{spec.status, crit, spec.critique, std::move(pathologies)};
  } catch (const std::invalid_argument& e) {
    throw config::ConfigError(std::string("scripted verdict invalid: ") + e.what());
  }
}

inline std::unique_ptr<backends::Agent> scripted_agent_from_specs(
    const std::vector<config::ScriptedReplySpec>& specs, const AnswerSpace& space,
    std::size_t agent_idx) {
  std::vector<backends::AgentReply> script;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    script.push_back(reply_from_spec(specs[k], space, agent_idx, static_cast<int>(k) + 1));
  }
  return backends::make_scripted_agent(std::move(script));
}

// Scripted runs synthesize their corpus from whatever the scripts cite, at
// a quality that passes the default gate.
inline std::vector<EvidenceSpan> corpus_from_scripts(const config::ScriptedBackendSpec& s) {
  std::set<std::string> ids;
  for (const auto& script : s.agent_scripts) {
    for (const auto& reply : script) ids.insert(reply.cites.begin(), reply.cites.end());
  }
  std::vector<EvidenceSpan> corpus;
  for (const auto& id : ids) corpus.push_back({id, "scripted", 0.9});
  return corpus;
}

}  // namespace detail

// Assembles a full deliberation from config. The seed feeds the synthetic
// population; scripted and http backends ignore it.
inline engine::DeliberationRun build_run(const config::AppConfig& cfg, std::string run_id,
                                         std::uint64_t seed, Persona persona) {
  AnswerSpace space = std::holds_alternative<config::SyntheticBackendSpec>(cfg.backend)
                          ? backends::synthetic_answer_space()
                          : AnswerSpace(cfg.answer_space);
  engine::DeliberationRun run{.run_id = std::move(run_id),
                              .cfg = cfg.dial,
                              .answer_space = std::move(space),
                              .query = cfg.query,
                              .hint = cfg.hint,
                              .persona = persona};

  if (const auto* syn = std::get_if<config::SyntheticBackendSpec>(&cfg.backend)) {
    const double lambda = syn->lambda ? *syn->lambda : backends::lambda_for_kappa(syn->kappa);
    run.agents = backends::make_synthetic_population(seed, lambda, syn->n_agents,
                                                     syn->profile, syn->noise_scale);
    run.auditor = backends::make_constant_auditor(CritScore(0.85, 0.85, 0.85, 0.85),
                                                  cfg.dial.rho_target);
    run.corpus = backends::synthetic_corpus();
  } else if (const auto* scripted = std::get_if<config::ScriptedBackendSpec>(&cfg.backend)) {
    if (scripted->agent_scripts.size() < 2) {
      throw config::ConfigError("deliberation needs at least 2 scripted agents");
    }
    for (std::size_t i = 0; i < scripted->agent_scripts.size(); ++i) {
      run.agents.push_back(
          detail::scripted_agent_from_specs(scripted->agent_scripts[i], run.answer_space, i));
    }
    std::vector<backends::AuditVerdict> verdicts;
    for (const auto& v : scripted->auditor_script) {
      verdicts.push_back(detail::verdict_from_spec(v));
    }
    run.auditor = backends::make_scripted_auditor(std::move(verdicts));
    run.corpus = detail::corpus_from_scripts(*scripted);
  } else {
    const auto& http = std::get<config::HttpBackendSpec>(cfg.backend);
    for (int i = 0; i < 2; ++i) {
      run.agents.push_back(backends::make_http_chat_agent(http.agent_endpoint,
                                                          AnswerSpace(cfg.answer_space)));
    }
    run.auditor = backends::make_llm_auditor(
        http.auditor_endpoint ? *http.auditor_endpoint : http.agent_endpoint,
        cfg.dial.rho_target);
    // No retrieval corpus is wired up for live endpoints yet; runs proceed
    // with an empty admitted set unless callers attach one.
    run.corpus = {};
  }
  return run;
}

// Single agent + auditor pair for the think-validate loop.
inline std::pair<std::unique_ptr<backends::Agent>, std::unique_ptr<backends::Auditor>>
build_single(const config::AppConfig& cfg) {
  if (const auto* scripted = std::get_if<config::ScriptedBackendSpec>(&cfg.backend)) {
    AnswerSpace space(cfg.answer_space);
    auto agent = detail::scripted_agent_from_specs(scripted->agent_scripts.front(), space, 0);
    std::vector<backends::AuditVerdict> verdicts;
    for (const auto& v : scripted->auditor_script) {
      verdicts.push_back(detail::verdict_from_spec(v));
    }
    return {std::move(agent), backends::make_scripted_auditor(std::move(verdicts))};
  }
  if (const auto* http = std::get_if<config::HttpBackendSpec>(&cfg.backend)) {
    return {backends::make_http_chat_agent(http->agent_endpoint, AnswerSpace(cfg.answer_space)),
            backends::make_llm_auditor(
                http->auditor_endpoint ? *http->auditor_endpoint : http->agent_endpoint,
                cfg.dial.rho_target)};
  }
  throw config::ConfigError("the synthetic backend has no single-agent audit mode");
}

}  // namespace raudit::factory
