#pragma once

// Agent and auditor backend interfaces plus the offline implementations:
// scripted replay for fixtures, and a seeded synthetic population whose
// beliefs contract at a calibrated rate. The HTTP-backed implementations
// live in http_backend.hpp to keep this header light.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "raudit/domain.hpp"
#include "raudit/rng.hpp"

namespace raudit::backends {

// What an agent sees each round. Deliberately carries no ground truth; the
// hint is the (possibly misleading) user suggestion under study.
struct AgentRequest {
  std::string query;
  std::optional<std::string> hint;
  std::vector<std::string> critique_history;
  int contentiousness = 9;  // 0..10, round(beta * 10)
  std::optional<std::string> actuator_directive;
  std::vector<std::string> admitted_span_ids;
};

// What an auditor sees: one trace, a persona, and the rubric to score.
// There is no field for the correct answer, by construction.
struct AuditRequest {
  ReasoningTrace trace;
  Persona persona = Persona::Polite;
  std::array<const char*, 4> required_pillars = kPillarNames;
};

enum class AuditStatus { Good, Poor, Refusal };

inline const char* to_string(AuditStatus s) {
  switch (s) {
    case AuditStatus::Good: return "good";
    case AuditStatus::Poor: return "poor";
    case AuditStatus::Refusal: return "refusal";
  }
  return "unknown";
}

struct AuditVerdict {
  AuditStatus status;
  CritScore crit;
  std::string critique;
  std::vector<PathologyLabel> pathologies;
};

struct AgentReply {
  ReasoningTrace trace;
  BeliefDistribution belief;
};

// Failures crossing the backend boundary.
struct TransportError : std::runtime_error {
  explicit TransportError(const std::string& what, int status = 0)
      : std::runtime_error(what), status_code(status) {}
  int status_code;  // HTTP status when applicable, else 0
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what, std::string raw = {})
      : std::runtime_error(what), raw_text(std::move(raw)) {}
  std::string raw_text;
};

struct AuthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentReply respond(const AgentRequest& req) = 0;
};

class Auditor {
 public:
  virtual ~Auditor() = default;
  virtual AuditVerdict evaluate(const AuditRequest& req) = 0;
};

// Replays a fixed reply sequence; call k past the end repeats the last
// entry, so short scripts still cover long runs.
class ScriptedAgent final : public Agent {
 public:
  explicit ScriptedAgent(std::vector<AgentReply> script) : script_(std::move(script)) {
    if (script_.empty()) throw std::invalid_argument("scripted agent: empty script");
  }

  AgentReply respond(const AgentRequest&) override {
    const std::size_t k = std::min(calls_++, script_.size() - 1);
    return script_[k];
  }

 private:
  std::vector<AgentReply> script_;
  std::size_t calls_ = 0;
};

class ScriptedAuditor final : public Auditor {
 public:
  explicit ScriptedAuditor(std::vector<AuditVerdict> script) : script_(std::move(script)) {
    if (script_.empty()) throw std::invalid_argument("scripted auditor: empty script");
  }

  AuditVerdict evaluate(const AuditRequest&) override {
    const std::size_t k = std::min(calls_++, script_.size() - 1);
    return script_[k];
  }

 private:
  std::vector<AuditVerdict> script_;
  std::size_t calls_ = 0;
};

inline std::unique_ptr<Agent> make_scripted_agent(std::vector<AgentReply> script) {
  return std::make_unique<ScriptedAgent>(std::move(script));
}

inline std::unique_ptr<Auditor> make_scripted_auditor(std::vector<AuditVerdict> script) {
  return std::make_unique<ScriptedAuditor>(std::move(script));
}

// Scores every trace with the same rubric values; status follows the
// composite against the target. Handy as the judge for synthetic runs.
class ConstantAuditor final : public Auditor {
 public:
  ConstantAuditor(CritScore crit, double rho_target)
      : crit_(crit), rho_target_(rho_target) {}

  AuditVerdict evaluate(const AuditRequest& req) override {
    const bool good = crit_.composite() >= rho_target_;
    std::string critique =
        good ? std::string{}
             : "composite below target; strengthen the evidential chain for '" +
                   req.trace.stated_conclusion + "'";
    return AuditVerdict{good ? AuditStatus::Good : AuditStatus::Poor, crit_,
                        std::move(critique), {}};
  }

 private:
  CritScore crit_;
  double rho_target_;
};

inline std::unique_ptr<Auditor> make_constant_auditor(CritScore crit, double rho_target = 0.8) {
  return std::make_unique<ConstantAuditor>(crit, rho_target);
}

// Connection settings for the OpenAI-style chat backends implemented in
// http_backend.hpp. Secrets stay out of config files: only the *name* of
// the environment variable holding the bearer token is configured.
struct ChatEndpointConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model_name;
  std::string auth_token_env_var;  // empty means no Authorization header
  int timeout_ms = 30000;
  int max_retries = 2;
  double temperature = 0.0;
};

// Worst-case wall time one backend call may consume: every attempt may eat
// a full timeout, plus the exponential backoff sleeps between attempts.
inline long max_blocking_ms(const ChatEndpointConfig& c) {
  long total = static_cast<long>(c.max_retries + 1) * c.timeout_ms;
  long backoff = 100;
  for (int k = 0; k < c.max_retries; ++k) {
    total += backoff;
    backoff *= 2;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Synthetic contractive population

// Fixed binary answer space used by the synthetic backends.
inline AnswerSpace synthetic_answer_space() {
  return AnswerSpace({"A", "B"});
}

// Six-span pool backing the synthetic citation schedules. e0..e3 are the
// strong shared spans; e4/e5 are weaker private ones that fall out once the
// evidence threshold adapts upward.
inline std::vector<EvidenceSpan> synthetic_corpus() {
  return {
      {"e0", "shared-core", 0.9},  {"e1", "shared-core", 0.9},
      {"e2", "shared-core", 0.9},  {"e3", "shared-core", 0.9},
      {"e4", "fringe-left", 0.55}, {"e5", "fringe-right", 0.55},
  };
}

// Empirical contraction-rate calibration for the mixing weight lambda:
// target mean per-round dispersion ratio kappa -> lambda, at noise scale
// 0.005 and two agents. Values fitted offline by bisection on 200-seed
// Monte-Carlo batches; linear interpolation between grid points.
inline double lambda_for_kappa(double kappa) {
  static constexpr double kGrid[][2] = {
      {0.5, 0.274877},
      {0.6, 0.205691},
      {0.7, 0.142901},
      {0.8, 0.086202},
  };
  constexpr std::size_t n = sizeof(kGrid) / sizeof(kGrid[0]);
  if (kappa < kGrid[0][0] || kappa > kGrid[n - 1][0]) {
    throw std::invalid_argument("kappa outside calibrated range [0.5, 0.8]");
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double k0 = kGrid[i][0], k1 = kGrid[i + 1][0];
    if (kappa <= k1) {
      const double f = (kappa - k0) / (k1 - k0);
      return kGrid[i][1] + f * (kGrid[i + 1][1] - kGrid[i][1]);
    }
  }
  return kGrid[n - 1][1];
}

enum class CitationProfile {
  Healthy,      // overlap grows round over round and settles at 1
  Sycophantic,  // full overlap once, then citations vanish while beliefs snap together
};

// Shared blackboard: completed-round means, plus a staging buffer for the
// round in flight. Thread-safe so a round's generation calls may overlap.
class PopulationBoard {
 public:
  explicit PopulationBoard(std::size_t n_agents) : n_(n_agents) {}

  // Mean belief mass of round t across all agents; requires that round to
  // be complete (the caller generates rounds strictly in order).
  std::vector<double> mean_of_round(int t) const {
    std::lock_guard<std::mutex> lock(mu_);
    const std::size_t idx = static_cast<std::size_t>(t - 1);
    if (idx >= means_.size()) {
      throw std::logic_error("population board: round not complete yet");
    }
    return means_[idx];
  }

  void submit(int t, const std::vector<double>& mass) {
    std::lock_guard<std::mutex> lock(mu_);
    if (static_cast<std::size_t>(t) != means_.size() + 1) {
      throw std::logic_error("population board: out-of-order round");
    }
    if (staging_round_ != t) {
      staging_round_ = t;
      staged_ = 0;
      sum_.assign(mass.size(), 0.0);
    }
    for (std::size_t i = 0; i < mass.size(); ++i) sum_[i] += mass[i];
    if (++staged_ == n_) {
      for (auto& v : sum_) v /= static_cast<double>(n_);
      means_.push_back(sum_);
    }
  }

 private:
  mutable std::mutex mu_;
  std::size_t n_;
  int staging_round_ = 0;
  std::size_t staged_ = 0;
  std::vector<double> sum_;
  std::vector<std::vector<double>> means_;
};

// One member of the synthetic population. Round 1 emits an opposed point
// mass; afterwards each belief mixes toward the previous round's population
// mean with weight lambda, plus a tiny zero-sum gaussian jitter:
//   v = (1 - lambda) * own_prev + lambda * prev_mean + (g, -g).
class SyntheticAgent final : public Agent {
 public:
  SyntheticAgent(std::shared_ptr<PopulationBoard> board, std::size_t index, double lambda,
                 double noise_scale, CitationProfile profile, std::uint64_t seed)
      : board_(std::move(board)),
        index_(index),
        lambda_(lambda),
        noise_scale_(noise_scale),
        profile_(profile),
        gauss_(seed),
        space_(synthetic_answer_space()) {}

  AgentReply respond(const AgentRequest& req) override {
    ++round_;
    std::vector<double> mass;
    if (round_ == 1) {
      mass = {index_ % 2 == 0 ? 1.0 : 0.0, index_ % 2 == 0 ? 0.0 : 1.0};
    } else {
      const std::vector<double> mean = board_->mean_of_round(round_ - 1);
      const double g = gauss_.sample(0.0, noise_scale_);
      mass.resize(2);
      for (std::size_t i = 0; i < 2; ++i) {
        mass[i] = (1.0 - lambda_) * prev_mass_[i] + lambda_ * mean[i];
      }
      mass[0] += g;
      mass[1] -= g;
      for (auto& v : mass) v = std::max(v, 1e-12);
      const double s = mass[0] + mass[1];
      mass[0] /= s;
      mass[1] /= s;
    }
    prev_mass_ = mass;
    board_->submit(round_, mass);

    BeliefDistribution belief(mass);
    ReasoningTrace trace;
    trace.agent_id = "agent" + std::to_string(index_);
    trace.round = round_;
    trace.stated_conclusion = space_.labels()[belief.argmax()];
    std::ostringstream arg;
    arg << "round " << round_ << " stance: p(" << trace.stated_conclusion
        << ")=" << belief[belief.argmax()];
    trace.argument_text = arg.str();
    for (const auto& id : schedule()) {
      for (const auto& admitted : req.admitted_span_ids) {
        if (admitted == id) {
          trace.cited_spans.insert(id);
          break;
        }
      }
    }
    return AgentReply{std::move(trace), std::move(belief)};
  }

 private:
  std::vector<std::string> schedule() const {
    const std::string fringe = index_ % 2 == 0 ? "e4" : "e5";
    if (profile_ == CitationProfile::Healthy) {
      if (round_ == 1) return {"e0", fringe};
      if (round_ == 2) return {"e0", "e1", fringe};
      return {"e0", "e1", "e2", "e3"};
    }
    // Sycophantic: one round of full agreement on the shared core, then the
    // evidential basis evaporates while beliefs keep collapsing.
    if (round_ == 1) return {"e0", "e1", "e2", "e3"};
    return {};
  }

  std::shared_ptr<PopulationBoard> board_;
  std::size_t index_;
  double lambda_;
  double noise_scale_;
  CitationProfile profile_;
  rng::GaussianSampler gauss_;
  AnswerSpace space_;
  int round_ = 0;
  std::vector<double> prev_mass_;
};

// Builds n agents over a shared board. At profile Sycophantic the mixing
// weight is forced high (0.9) so beliefs snap together within one step.
inline std::vector<std::unique_ptr<Agent>> make_synthetic_population(
    std::uint64_t seed, double lambda, std::size_t n_agents = 2,
    CitationProfile profile = CitationProfile::Healthy, double noise_scale = 0.005) {
  if (n_agents < 2) throw std::invalid_argument("population needs at least 2 agents");
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda out of (0,1)");
  if (profile == CitationProfile::Sycophantic) lambda = 0.9;
  auto board = std::make_shared<PopulationBoard>(n_agents);
  std::vector<std::unique_ptr<Agent>> agents;
  agents.reserve(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) {
    agents.push_back(std::make_unique<SyntheticAgent>(
        board, i, lambda, noise_scale, profile, rng::derive_seed(seed, i)));
  }
  return agents;
}

}  // namespace raudit::backends
