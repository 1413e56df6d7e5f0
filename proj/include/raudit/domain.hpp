#pragma once

// Core vocabulary shared by every module: answer spaces, beliefs, evidence,
// traces, rubric scores, dial configuration, and terminal outcomes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace raudit {

// Ordered set of candidate answer labels. Fixed for the lifetime of a
// deliberation; cardinality >= 2, labels unique.
class AnswerSpace {
 public:
  explicit AnswerSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) {
      throw std::invalid_argument("AnswerSpace requires at least 2 labels");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& l : labels_) {
      if (!seen.insert(l).second) {
        throw std::invalid_argument("AnswerSpace labels must be unique: " + l);
      }
    }
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<std::size_t> index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == label) return i;
    }
    return std::nullopt;
  }

  bool contains(std::string_view label) const { return index_of(label).has_value(); }

  // Upper bound on entropy and on JS dispersion over this space, in bits.
  double max_entropy_bits() const {
    return std::log2(static_cast<double>(labels_.size()));
  }

 private:
  std::vector<std::string> labels_;
};

// Probability mass over an answer space. Renormalizes on construction:
// backends emit noisy masses, so any nonnegative non-zero vector is accepted
// (entries down to -1e-6 are clamped to zero first).
class BeliefDistribution {
 public:
  explicit BeliefDistribution(std::vector<double> mass) : mass_(std::move(mass)) {
    if (mass_.empty()) throw std::invalid_argument("belief mass is empty");
    double sum = 0.0;
    for (auto& m : mass_) {
      if (!(m >= -1e-6)) {
        throw std::invalid_argument("belief mass entry below tolerance");
      }
      m = std::max(m, 0.0);
      sum += m;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("belief mass sums to zero");
    for (auto& m : mass_) m /= sum;
  }

  static BeliefDistribution point_mass(std::size_t index, std::size_t size) {
    std::vector<double> m(size, 0.0);
    m.at(index) = 1.0;
    return BeliefDistribution(std::move(m));
  }

  static BeliefDistribution uniform(std::size_t size) {
    return BeliefDistribution(std::vector<double>(size, 1.0));
  }

  const std::vector<double>& mass() const { return mass_; }
  std::size_t size() const { return mass_.size(); }
  double operator[](std::size_t i) const { return mass_[i]; }

  std::size_t argmax() const {
    return static_cast<std::size_t>(
        std::max_element(mass_.begin(), mass_.end()) - mass_.begin());
  }

 private:
  std::vector<double> mass_;
};

// One retrievable evidence span with an admission-quality score Q(e).
struct EvidenceSpan {
  std::string id;
  std::string source;
  double quality = 0.0;  // in [0,1]
};

// Checks span quality ranges and id uniqueness across a corpus.
inline void validate_corpus(const std::vector<EvidenceSpan>& corpus) {
  std::unordered_set<std::string_view> ids;
  for (const auto& e : corpus) {
    if (!(e.quality >= 0.0 && e.quality <= 1.0)) {
      throw std::invalid_argument("span quality out of [0,1]: " + e.id);
    }
    if (!ids.insert(e.id).second) {
      throw std::invalid_argument("duplicate span id in corpus: " + e.id);
    }
  }
}

// One agent's argument for one round.
struct ReasoningTrace {
  std::string agent_id;
  int round = 1;  // t >= 1
  std::string argument_text;
  std::set<std::string> cited_spans;  // ids of admitted spans
  std::string stated_conclusion;      // an AnswerSpace label
};

inline constexpr std::array<const char*, 4> kPillarNames = {
    "logical", "evidential", "alternatives", "causal_alignment"};

inline constexpr std::array<double, 4> kUniformPillarWeights = {0.25, 0.25, 0.25, 0.25};

// Four-pillar rubric score. The composite is the weight dot product and is
// computed on construction so the two can never disagree.
class CritScore {
 public:
  CritScore(double logical, double evidential, double alternatives, double causal_alignment,
            std::array<double, 4> weights = kUniformPillarWeights)
      : pillars_{logical, evidential, alternatives, causal_alignment}, weights_(weights) {
    double wsum = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw std::invalid_argument("negative pillar weight");
      wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
      throw std::invalid_argument("pillar weights must sum to 1");
    }
    composite_ = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      if (!(pillars_[k] >= 0.0 && pillars_[k] <= 1.0)) {
        throw std::invalid_argument(std::string("pillar score out of [0,1]: ") + kPillarNames[k]);
      }
      composite_ += weights_[k] * pillars_[k];
    }
  }

  double logical() const { return pillars_[0]; }
  double evidential() const { return pillars_[1]; }
  double alternatives() const { return pillars_[2]; }
  double causal_alignment() const { return pillars_[3]; }
  const std::array<double, 4>& pillars() const { return pillars_; }
  const std::array<double, 4>& weights() const { return weights_; }
  double composite() const { return composite_; }

 private:
  std::array<double, 4> pillars_;
  std::array<double, 4> weights_;
  double composite_;
};

enum class PathologyKind {
  Sycophancy,
  RungCollapse,
  LogicalGap,
  UnsupportedClaim,
  PrematureCertainty,
};

inline const char* to_string(PathologyKind k) {
  switch (k) {
    case PathologyKind::Sycophancy: return "sycophancy";
    case PathologyKind::RungCollapse: return "rung_collapse";
    case PathologyKind::LogicalGap: return "logical_gap";
    case PathologyKind::UnsupportedClaim: return "unsupported_claim";
    case PathologyKind::PrematureCertainty: return "premature_certainty";
  }
  return "unknown";
}

inline std::optional<PathologyKind> pathology_from_string(std::string_view s) {
  if (s == "sycophancy") return PathologyKind::Sycophancy;
  if (s == "rung_collapse") return PathologyKind::RungCollapse;
  if (s == "logical_gap") return PathologyKind::LogicalGap;
  if (s == "unsupported_claim") return PathologyKind::UnsupportedClaim;
  if (s == "premature_certainty") return PathologyKind::PrematureCertainty;
  return std::nullopt;
}

// Closed pathology set; auditor free text rides along in `detail`.
struct PathologyLabel {
  PathologyKind kind;
  std::string detail;
};

// Gains, thresholds, and dial initializations for one deliberation.
struct DialConfig {
  double rho_target = 0.8;  // quality setpoint
  double k_p = 0.3;
  double k_i = 0.05;
  double k_d = 0.1;
  double mu = 0.5;          // sycophancy penalty weight
  double gamma_beta = 0.9;  // contentiousness decay per round
  double delta_beta = 0.1;  // stuck-state boost
  double eta_tau = 0.3;     // evidence-threshold learning rate
  double delta_s = 0.05;    // sycophancy JS-drop threshold, bits
  double delta_js = 0.2;    // divergence threshold, bits
  double delta_u = 0.05;    // actuator trigger threshold
  double epsilon = 0.05;    // termination threshold, bits
  int w = 2;                // plateau window
  int t_max = 5;            // round cap
  double tau_init = 0.5;
  double beta_init = 0.9;

  // Throws std::invalid_argument naming the offending field.
  void validate() const {
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    if (!in(rho_target, 0.0, 1.0)) throw std::invalid_argument("rho_target out of [0,1]");
    if (!(k_p >= 0.0)) throw std::invalid_argument("k_p must be nonnegative");
    if (!(k_i >= 0.0)) throw std::invalid_argument("k_i must be nonnegative");
    if (!(k_d >= 0.0)) throw std::invalid_argument("k_d must be nonnegative");
    if (!in(mu, 0.0, 1.0)) throw std::invalid_argument("mu out of [0,1]");
    if (!(gamma_beta > 0.0 && gamma_beta < 1.0)) throw std::invalid_argument("gamma_beta out of (0,1)");
    if (!(delta_beta >= 0.0)) throw std::invalid_argument("delta_beta must be nonnegative");
    if (!(eta_tau > 0.0 && eta_tau <= 1.0)) throw std::invalid_argument("eta_tau out of (0,1]");
    if (!(delta_s > 0.0)) throw std::invalid_argument("delta_s must be positive");
    if (!(delta_js > 0.0)) throw std::invalid_argument("delta_js must be positive");
    if (!(delta_u >= 0.0)) throw std::invalid_argument("delta_u must be nonnegative");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (w < 1) throw std::invalid_argument("w must be >= 1");
    if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");
    if (!in(tau_init, 0.0, 1.0)) throw std::invalid_argument("tau_init out of [0,1]");
    if (!in(beta_init, 0.0, 1.0)) throw std::invalid_argument("beta_init out of [0,1]");
  }
};

// Per-round sensor bundle recorded in run history.
struct RoundObservation {
  int round = 0;
  std::vector<CritScore> rho_per_agent;
  double rho_bar = 0.0;
  double js = 0.0;
  double ov = 0.0;
  bool syco = false;
  bool div_flag = false;
  bool qual_flag = false;
};

// Terminal report for an informed refusal: where the disagreement lives,
// what evidence is missing, and what question would settle it.
struct RefusalReport {
  std::vector<std::string> disputed_answers;
  std::string evidence_gap;
  std::string pivotal_question;
};

// Terminal verdict of a deliberation. Exactly one payload is populated.
class DeliberationOutcome {
 public:
  enum class Kind { Converged, InformedRefusal, Failure };

  static DeliberationOutcome converged(BeliefDistribution pooled, int rounds_used) {
    DeliberationOutcome o(Kind::Converged, rounds_used);
    o.pooled_ = std::move(pooled);
    return o;
  }
  static DeliberationOutcome informed_refusal(RefusalReport report, int rounds_used) {
    if (report.disputed_answers.empty()) {
      throw std::invalid_argument("refusal report needs disputed answers");
    }
    DeliberationOutcome o(Kind::InformedRefusal, rounds_used);
    o.refusal_ = std::move(report);
    return o;
  }
  static DeliberationOutcome failure(int rounds_used) {
    return DeliberationOutcome(Kind::Failure, rounds_used);
  }

  Kind kind() const { return kind_; }
  int rounds_used() const { return rounds_used_; }

  const BeliefDistribution& pooled_belief() const {
    if (kind_ != Kind::Converged) throw std::logic_error("outcome has no pooled belief");
    return *pooled_;
  }
  const RefusalReport& refusal() const {
    if (kind_ != Kind::InformedRefusal) throw std::logic_error("outcome has no refusal report");
    return *refusal_;
  }

 private:
  DeliberationOutcome(Kind k, int rounds) : kind_(k), rounds_used_(rounds) {}

  Kind kind_;
  int rounds_used_;
  std::optional<BeliefDistribution> pooled_;
  std::optional<RefusalReport> refusal_;
};

inline const char* to_string(DeliberationOutcome::Kind k) {
  switch (k) {
    case DeliberationOutcome::Kind::Converged: return "converged";
    case DeliberationOutcome::Kind::InformedRefusal: return "informed_refusal";
    case DeliberationOutcome::Kind::Failure: return "failure";
  }
  return "unknown";
}

enum class Persona { Polite, Authoritative };

inline const char* to_string(Persona p) {
  return p == Persona::Polite ? "polite" : "authoritative";
}

inline std::optional<Persona> persona_from_string(std::string_view s) {
  if (s == "polite") return Persona::Polite;
  if (s == "authoritative") return Persona::Authoritative;
  return std::nullopt;
}

// One audited case for the behavioral-metrics pipeline.
struct TransitionRecord {
  std::string case_id;
  std::string model_id;
  Persona persona = Persona::Polite;
  std::string judge_id;
  bool base_correct = false;
  bool final_correct = false;
  std::optional<bool> detected;  // auditor flagged an error; absent when unaudited
};

enum class Transition { TT, TF, FT, FF };

inline const char* to_string(Transition t) {
  switch (t) {
    case Transition::TT: return "TT";
    case Transition::TF: return "TF";
    case Transition::FT: return "FT";
    case Transition::FF: return "FF";
  }
  return "??";
}

inline Transition transition_label(const TransitionRecord& r) {
  if (r.base_correct) return r.final_correct ? Transition::TT : Transition::TF;
  return r.final_correct ? Transition::FT : Transition::FF;
}

}  // namespace raudit
