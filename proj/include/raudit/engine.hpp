#pragma once

// The closed loop. Each round: gate evidence by the adaptive threshold,
// collect agent arguments, score them, read the dispersion/overlap/
// sycophancy sensors, diagnose the quadrant, run the PID step, route the
// actuator, update the dials, and test for a dispersion plateau. Runs end
// in convergence, an informed refusal, or failure at the round cap.
//
// Also hosts the single-agent think-validate loop used for audit studies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "raudit/backends.hpp"
#include "raudit/controller.hpp"
#include "raudit/domain.hpp"
#include "raudit/sensors.hpp"

namespace raudit::engine {

// One line of the run log, emitted once per round. Serialization lives in
// run_log.hpp; this stays a plain struct so the engine compiles fast.
struct RunLogRecord {
  std::string run_id;
  int t = 0;
  double rho_bar = 0.0;
  std::vector<double> rho_per_agent;
  double js = 0.0;
  double ov = 0.0;
  bool s_t = false;
  double e_t = 0.0;
  double u_t = 0.0;
  std::string quadrant;
  std::string actuator;  // "none" when nothing fired
  double beta = 0.0;     // post-update dial values
  double tau = 0.0;
  std::vector<std::string> conclusions;
  std::vector<std::vector<std::string>> cited;  // per agent, sorted ids
  std::optional<std::string> terminal;          // set on the final record only
};

using RoundSink = std::function<void(const RunLogRecord&)>;

// Raised when a backend fails mid-run; carries everything observed so far
// plus which boundary gave way.
struct DeliberationAbort : std::runtime_error {
  enum class Cause { Transport, Parse };

  DeliberationAbort(Cause c, const std::string& what, std::vector<RoundObservation> partial)
      : std::runtime_error(what), cause(c), history(std::move(partial)) {}

  Cause cause;
  std::vector<RoundObservation> history;
};

struct DeliberationRun {
  std::string run_id;
  DialConfig cfg;
  AnswerSpace answer_space;
  std::string query;
  std::optional<std::string> hint;
  Persona persona = Persona::Polite;
  std::vector<std::unique_ptr<backends::Agent>> agents;
  std::unique_ptr<backends::Auditor> auditor;
  std::vector<EvidenceSpan> corpus;
  bool concurrent_generation = true;

  // Run state, owned and filled by run_deliberation.
  std::vector<RoundObservation> history;
  control::PidState pid;
  double beta = 0.0;
  double tau = 0.0;
  int plateau_count = 0;
};

// Quality-weighted belief pool. Degenerate all-zero weights fall back to a
// uniform mixture rather than a division by zero.
inline BeliefDistribution pool_beliefs(const std::vector<BeliefDistribution>& beliefs,
                                       const std::vector<double>& weights) {
  if (beliefs.empty() || beliefs.size() != weights.size()) {
    throw std::invalid_argument("pool_beliefs: beliefs/weights size mismatch");
  }
  const std::size_t dim = beliefs.front().size();
  double wsum = 0.0;
  for (double w : weights) wsum += std::max(w, 0.0);
  std::vector<double> mix(dim, 0.0);
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    const double w = wsum > 0.0 ? std::max(weights[i], 0.0) : 1.0;
    for (std::size_t j = 0; j < dim; ++j) mix[j] += w * beliefs[i][j];
  }
  return BeliefDistribution(std::move(mix));
}

// Mean admission quality over the spans actually cited this round; an
// uncited round contributes 0, which drags the threshold down and reopens
// the gate wider.
inline double round_quality(const std::vector<EvidenceSpan>& cited) {
  if (cited.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : cited) s += e.quality;
  return s / static_cast<double>(cited.size());
}

// Fixed per-actuator instructions delivered with the next round's request.
inline std::string render_directive(control::Actuator a, double beta) {
  const int k = static_cast<int>(std::lround(beta * 10.0));
  std::ostringstream out;
  switch (a) {
    case control::Actuator::Explore:
      out << "Branch out: propose a genuinely different line of reasoning and defend it";
      break;
    case control::Actuator::Refine:
      out << "Tighten the argument: support every step with admitted evidence and drop weak links";
      break;
    case control::Actuator::Consolidate:
      out << "Merge toward the strongest shared account and reconcile residual differences";
      break;
    case control::Actuator::NaturalDecayOnly:
      return {};
  }
  out << " (intensity " << k << "/10).";
  return out.str();
}

namespace detail {

inline std::vector<backends::AgentReply> collect_replies(
    DeliberationRun& run, const backends::AgentRequest& req) {
  std::vector<backends::AgentReply> replies;
  replies.reserve(run.agents.size());
  if (run.concurrent_generation) {
    std::vector<std::future<backends::AgentReply>> futs;
    futs.reserve(run.agents.size());
    for (auto& agent : run.agents) {
      futs.push_back(std::async(std::launch::async,
                                [&agent, &req] { return agent->respond(req); }));
    }
    for (auto& f : futs) replies.push_back(f.get());  // joined in agent order
  } else {
    for (auto& agent : run.agents) replies.push_back(agent->respond(req));
  }
  return replies;
}

inline RefusalReport build_refusal_report(const std::vector<std::string>& conclusions,
                                          const std::vector<backends::AuditVerdict>& verdicts) {
  RefusalReport report;
  for (const auto& c : conclusions) {
    bool seen = false;
    for (const auto& d : report.disputed_answers) seen = seen || d == c;
    if (!seen) report.disputed_answers.push_back(c);
  }
  std::ostringstream options;
  for (std::size_t i = 0; i < report.disputed_answers.size(); ++i) {
    if (i) options << (i + 1 == report.disputed_answers.size() ? " and " : ", ");
    options << "'" << report.disputed_answers[i] << "'";
  }
  // Prefer the harshest auditor critique as the gap statement; fall back to
  // a generic one if the auditor gave none.
  const backends::AuditVerdict* worst = nullptr;
  for (const auto& v : verdicts) {
    if (!v.critique.empty() && (!worst || v.crit.composite() < worst->crit.composite())) {
      worst = &v;
    }
  }
  report.evidence_gap = worst ? worst->critique
                              : "No admitted evidence discriminates between " + options.str() + ".";
  report.pivotal_question =
      "What admissible evidence would rule out all but one of " + options.str() + "?";
  return report;
}

}  // namespace detail

// Runs the loop to a terminal outcome. Emits one RunLogRecord per round to
// the sink (when given); the final record carries the terminal tag. Backend
// failures surface as DeliberationAbort with the partial history attached.
inline DeliberationOutcome run_deliberation(DeliberationRun& run, const RoundSink& sink = {}) {
  run.cfg.validate();
  validate_corpus(run.corpus);
  if (run.agents.size() < 2) {
    throw std::invalid_argument("deliberation needs at least 2 agents");
  }
  if (!run.auditor) throw std::invalid_argument("deliberation needs an auditor");

  std::unordered_map<std::string, double> quality_by_id;
  for (const auto& e : run.corpus) quality_by_id[e.id] = e.quality;

  run.history.clear();
  run.pid = {};
  run.beta = run.cfg.beta_init;
  run.tau = run.cfg.tau_init;
  run.plateau_count = 0;

  std::optional<control::Actuator> pending_directive;
  double prev_js = 0.0, prev_ov = 0.0;

  for (int t = 1; t <= run.cfg.t_max; ++t) {
    // Evidence gate at the current threshold.
    std::vector<std::string> admitted_ids;
    for (const auto& e : run.corpus) {
      if (e.quality >= run.tau) admitted_ids.push_back(e.id);
    }
    std::sort(admitted_ids.begin(), admitted_ids.end());

    backends::AgentRequest req;
    req.query = run.query;
    req.hint = run.hint;
    req.contentiousness = static_cast<int>(std::lround(run.beta * 10.0));
    if (pending_directive) {
      req.actuator_directive = render_directive(*pending_directive, run.beta);
    }
    req.admitted_span_ids = admitted_ids;

    std::vector<backends::AgentReply> replies;
    std::vector<backends::AuditVerdict> verdicts;
    try {
      replies = detail::collect_replies(run, req);
      for (auto& r : replies) {
        // Citations outside the admitted set are backend noise; strip them.
        // A conclusion outside the answer space is not recoverable.
        std::set<std::string> kept;
        for (const auto& id : r.trace.cited_spans) {
          if (quality_by_id.count(id) && quality_by_id[id] >= run.tau) kept.insert(id);
        }
        r.trace.cited_spans = std::move(kept);
        if (!run.answer_space.contains(r.trace.stated_conclusion)) {
          throw backends::ParseError("conclusion outside the answer space",
                                     r.trace.stated_conclusion);
        }
      }
      for (const auto& r : replies) {
        verdicts.push_back(run.auditor->evaluate({r.trace, run.persona}));
      }
    } catch (const backends::TransportError& e) {
      throw DeliberationAbort(DeliberationAbort::Cause::Transport,
                              std::string("transport failure in round ") +
                                  std::to_string(t) + ": " + e.what(),
                              run.history);
    } catch (const backends::ParseError& e) {
      throw DeliberationAbort(DeliberationAbort::Cause::Parse,
                              std::string("unparseable backend output in round ") +
                                  std::to_string(t) + ": " + e.what(),
                              run.history);
    }

    RoundObservation obs;
    obs.round = t;
    std::vector<BeliefDistribution> beliefs;
    std::vector<std::set<std::string>> cited;
    std::vector<double> composites;
    for (std::size_t i = 0; i < replies.size(); ++i) {
      beliefs.push_back(replies[i].belief);
      cited.push_back(replies[i].trace.cited_spans);
      obs.rho_per_agent.push_back(verdicts[i].crit);
      composites.push_back(verdicts[i].crit.composite());
    }
    obs.rho_bar = sensors::mean_reasonableness(obs.rho_per_agent);
    obs.js = sensors::js_dispersion(beliefs);
    obs.ov = sensors::evidence_overlap(cited);
    obs.syco = t >= 2 && sensors::sycophancy_signal(
                             {obs.js - prev_js, obs.ov - prev_ov}, run.cfg.delta_s);

    const control::QuadrantDecision qd =
        control::diagnose_quadrant(obs.js, obs.rho_bar, run.cfg);
    obs.div_flag = qd.state == control::LoopState::Chaotic ||
                   qd.state == control::LoopState::Healthy;
    obs.qual_flag = qd.state == control::LoopState::Converged ||
                    qd.state == control::LoopState::Healthy;

    const double e_t =
        control::compute_error(obs.rho_bar, run.cfg.rho_target, obs.syco, run.cfg.mu);
    const control::PidResult pid = control::pid_step(run.pid, e_t, run.cfg);
    run.pid = pid.next;

    const bool fired = control::actuator_fires(qd, pid.u, run.cfg);
    pending_directive = fired ? std::optional<control::Actuator>(qd.actuator) : std::nullopt;

    run.beta = control::update_beta(run.beta, qd, pid.u, run.cfg);

    std::set<std::string> cited_union;
    for (const auto& s : cited) cited_union.insert(s.begin(), s.end());
    std::vector<EvidenceSpan> cited_spans;
    for (const auto& id : cited_union) {
      cited_spans.push_back({id, "", quality_by_id[id]});
    }
    run.tau = control::update_tau(run.tau, round_quality(cited_spans), obs.js, run.cfg);

    run.history.push_back(obs);
    run.plateau_count = obs.js < run.cfg.epsilon ? run.plateau_count + 1 : 0;

    std::optional<DeliberationOutcome> outcome;
    if (run.plateau_count >= run.cfg.w) {
      outcome = DeliberationOutcome::converged(pool_beliefs(beliefs, composites), t);
    } else if (t == run.cfg.t_max) {
      if (obs.rho_bar >= run.cfg.rho_target && obs.js > run.cfg.delta_js) {
        std::vector<std::string> conclusions;
        for (const auto& r : replies) conclusions.push_back(r.trace.stated_conclusion);
        outcome = DeliberationOutcome::informed_refusal(
            detail::build_refusal_report(conclusions, verdicts), t);
      } else {
        outcome = DeliberationOutcome::failure(t);
      }
    }

    if (sink) {
      RunLogRecord rec;
      rec.run_id = run.run_id;
      rec.t = t;
      rec.rho_bar = obs.rho_bar;
      rec.rho_per_agent = composites;
      rec.js = obs.js;
      rec.ov = obs.ov;
      rec.s_t = obs.syco;
      rec.e_t = e_t;
      rec.u_t = pid.u;
      rec.quadrant = control::to_string(qd.state);
      rec.actuator = fired ? control::to_string(qd.actuator) : "none";
      rec.beta = run.beta;
      rec.tau = run.tau;
      for (const auto& r : replies) {
        rec.conclusions.push_back(r.trace.stated_conclusion);
        rec.cited.emplace_back(r.trace.cited_spans.begin(), r.trace.cited_spans.end());
      }
      if (outcome) rec.terminal = to_string(outcome->kind());
      sink(rec);
    }

    if (outcome) return *outcome;
    prev_js = obs.js;
    prev_ov = obs.ov;
  }
  // Unreachable: the t_max round always produces an outcome.
  throw std::logic_error("deliberation loop fell through");
}

// ---------------------------------------------------------------------------
// Single-agent think-validate loop

enum class SingleAuditStatus { Answered, Refused };

struct SingleAuditResult {
  SingleAuditStatus status;
  std::string answer;        // set when Answered
  std::string refusal_text;  // evidence-gap statement when Refused
  std::vector<backends::AuditVerdict> verdicts;
  std::vector<std::string> round_answers;  // stated conclusion per attempt
  int rounds_used = 0;
};

// Generate, audit, and either accept, retry with the critique appended to
// the visible history, or refuse once the round cap is hit.
inline SingleAuditResult run_single_audit(const std::string& query,
                                          const std::optional<std::string>& hint,
                                          backends::Agent& agent, backends::Auditor& auditor,
                                          const DialConfig& cfg, Persona persona) {
  cfg.validate();
  SingleAuditResult result{SingleAuditStatus::Refused, {}, {}, {}, {}, 0};
  std::vector<std::string> critique_history;
  for (int t = 1; t <= cfg.t_max; ++t) {
    backends::AgentRequest req;
    req.query = query;
    req.hint = hint;
    req.critique_history = critique_history;
    req.contentiousness = static_cast<int>(std::lround(cfg.beta_init * 10.0));
    const backends::AgentReply reply = agent.respond(req);
    backends::AuditVerdict verdict = auditor.evaluate({reply.trace, persona});
    result.verdicts.push_back(verdict);
    result.round_answers.push_back(reply.trace.stated_conclusion);
    result.rounds_used = t;
    if (verdict.status == backends::AuditStatus::Good) {
      result.status = SingleAuditStatus::Answered;
      result.answer = reply.trace.stated_conclusion;
      return result;
    }
    if (verdict.status == backends::AuditStatus::Refusal) break;
    if (t < cfg.t_max) critique_history.push_back(verdict.critique);
  }
  const std::string& last = result.verdicts.back().critique;
  result.refusal_text =
      !last.empty()
          ? "Cannot certify an answer. Unresolved gap: " + last
          : "Cannot certify an answer for '" + query +
                "': the reasoning failed validation at every attempt and the "
                "evidential basis remains insufficient.";
  return result;
}

}  // namespace raudit::engine
