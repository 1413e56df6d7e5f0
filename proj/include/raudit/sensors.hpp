#pragma once

// Read-only observers of the deliberation state: belief dispersion, evidence
// overlap, sycophancy detection, and quality aggregation. All entropies are
// in bits, so dispersion over a k-way answer space is bounded by log2(k).

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "raudit/domain.hpp"

namespace raudit::sensors {

// Shannon entropy in bits; 0 * log 0 is taken as 0.
inline double entropy(const BeliefDistribution& p) {
  double h = 0.0;
  for (double m : p.mass()) {
    if (m > 0.0) h -= m * std::log2(m);
  }
  return h;
}

// Jensen-Shannon dispersion across n >= 2 beliefs: entropy of the uniform
// mixture minus the mean entropy. Nonnegative, and zero iff all beliefs
// coincide.
inline double js_dispersion(const std::vector<BeliefDistribution>& beliefs) {
  if (beliefs.size() < 2) {
    throw std::invalid_argument("js_dispersion needs at least 2 beliefs");
  }
  const std::size_t dim = beliefs.front().size();
  std::vector<double> mix(dim, 0.0);
  double mean_h = 0.0;
  for (const auto& p : beliefs) {
    if (p.size() != dim) {
      throw std::invalid_argument("js_dispersion: belief dimension mismatch");
    }
    for (std::size_t i = 0; i < dim; ++i) mix[i] += p[i];
    mean_h += entropy(p);
  }
  const double n = static_cast<double>(beliefs.size());
  mean_h /= n;
  double mix_h = 0.0;
  for (double m : mix) {
    m /= n;
    if (m > 0.0) mix_h -= m * std::log2(m);
  }
  // Guard against negative round-off when all beliefs coincide.
  return std::max(0.0, mix_h - mean_h);
}

// All-way Jaccard overlap of the agents' citation sets: |intersection| over
// |union|. An empty union (nobody cited anything) counts as zero overlap.
inline double evidence_overlap(const std::vector<std::set<std::string>>& cited) {
  if (cited.size() < 2) {
    throw std::invalid_argument("evidence_overlap needs at least 2 citation sets");
  }
  std::set<std::string> uni;
  for (const auto& s : cited) uni.insert(s.begin(), s.end());
  if (uni.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& id : uni) {
    bool in_all = true;
    for (const auto& s : cited) {
      if (!s.count(id)) {
        in_all = false;
        break;
      }
    }
    if (in_all) ++inter;
  }
  return static_cast<double>(inter) / static_cast<double>(uni.size());
}

// Round-over-round sensor movement, current minus previous.
struct SensorDeltas {
  double d_js = 0.0;
  double d_ov = 0.0;
};

// Sycophantic collapse: beliefs snapping together (JS drop beyond delta_s)
// while shared evidence is shrinking at the same time. Only defined from the
// second round on; callers must not invoke it for the opening round.
inline bool sycophancy_signal(const SensorDeltas& d, double delta_s) {
  return d.d_js < -delta_s && d.d_ov < 0.0;
}

// Weighted rubric composite. Weight vectors that do not sum to 1 are a
// configuration error, not data noise, hence the throw.
inline double crit_composite(const std::array<double, 4>& pillars,
                             const std::array<double, 4>& weights) {
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("negative pillar weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw std::invalid_argument("pillar weights must sum to 1");
  }
  double c = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!(pillars[k] >= 0.0 && pillars[k] <= 1.0)) {
      throw std::invalid_argument("pillar score out of [0,1]");
    }
    c += weights[k] * pillars[k];
  }
  return c;
}

// Mean composite across the round's agents (the controller's process
// variable). Empty input is a caller bug.
inline double mean_reasonableness(const std::vector<CritScore>& scores) {
  if (scores.empty()) {
    throw std::invalid_argument("mean_reasonableness over empty scores");
  }
  double s = 0.0;
  for (const auto& c : scores) s += c.composite();
  return s / static_cast<double>(scores.size());
}

}  // namespace raudit::sensors
