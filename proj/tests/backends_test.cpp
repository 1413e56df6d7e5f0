#include "raudit/backends.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "raudit/sensors.hpp"

namespace raudit::backends {
namespace {

AgentReply reply(const std::string& conclusion, std::vector<double> mass, int round = 1) {
  ReasoningTrace t;
  t.agent_id = "scripted0";
  t.round = round;
  t.stated_conclusion = conclusion;
  return AgentReply{std::move(t), BeliefDistribution(std::move(mass))};
}

TEST(ScriptedAgent, ReplaysInOrderThenRepeatsLast) {
  auto agent = make_scripted_agent({reply("A", {0.9, 0.1}), reply("B", {0.2, 0.8})});
  AgentRequest req;
  EXPECT_EQ(agent->respond(req).trace.stated_conclusion, "A");
  EXPECT_EQ(agent->respond(req).trace.stated_conclusion, "B");
  EXPECT_EQ(agent->respond(req).trace.stated_conclusion, "B");
  EXPECT_EQ(agent->respond(req).trace.stated_conclusion, "B");
}

TEST(ScriptedAgent, EmptyScriptIsAnError) {
  EXPECT_THROW(make_scripted_agent({}), std::invalid_argument);
  EXPECT_THROW(make_scripted_auditor({}), std::invalid_argument);
}

TEST(ScriptedAuditor, ReplaysVerdicts) {
  AuditVerdict poor{AuditStatus::Poor, CritScore(0.5, 0.5, 0.5, 0.5), "weak", {}};
  AuditVerdict good{AuditStatus::Good, CritScore(0.9, 0.9, 0.9, 0.9), "", {}};
  auto auditor = make_scripted_auditor({poor, good});
  AuditRequest req;
  EXPECT_EQ(auditor->evaluate(req).status, AuditStatus::Poor);
  EXPECT_EQ(auditor->evaluate(req).status, AuditStatus::Good);
  EXPECT_EQ(auditor->evaluate(req).status, AuditStatus::Good);
}

TEST(ConstantAuditor, StatusFollowsCompositeAgainstTarget) {
  auto good = make_constant_auditor(CritScore(0.85, 0.85, 0.85, 0.85), 0.8);
  auto poor = make_constant_auditor(CritScore(0.7, 0.7, 0.7, 0.7), 0.8);
  AuditRequest req;
  req.trace.stated_conclusion = "A";
  EXPECT_EQ(good->evaluate(req).status, AuditStatus::Good);
  auto v = poor->evaluate(req);
  EXPECT_EQ(v.status, AuditStatus::Poor);
  EXPECT_FALSE(v.critique.empty());
}

TEST(KappaCalibration, GridPointsAndInterpolation) {
  EXPECT_NEAR(lambda_for_kappa(0.5), 0.274877, 1e-9);
  EXPECT_NEAR(lambda_for_kappa(0.7), 0.142901, 1e-9);
  EXPECT_NEAR(lambda_for_kappa(0.8), 0.086202, 1e-9);
  EXPECT_NEAR(lambda_for_kappa(0.65), (0.205691 + 0.142901) / 2.0, 1e-9);
  EXPECT_THROW(lambda_for_kappa(0.4), std::invalid_argument);
  EXPECT_THROW(lambda_for_kappa(0.9), std::invalid_argument);
}

TEST(SeedDerivation, DeterministicAndStreamSeparated) {
  EXPECT_EQ(rng::derive_seed(42, 0), rng::derive_seed(42, 0));
  EXPECT_NE(rng::derive_seed(42, 0), rng::derive_seed(42, 1));
  EXPECT_NE(rng::derive_seed(42, 0), rng::derive_seed(43, 0));
}

TEST(EndpointConfig, WorstCaseBlockingBudget) {
  ChatEndpointConfig c;
  c.timeout_ms = 1000;
  c.max_retries = 2;
  // Three attempts at a full timeout each, plus 100ms and 200ms backoffs.
  EXPECT_EQ(max_blocking_ms(c), 3300);
  c.max_retries = 0;
  EXPECT_EQ(max_blocking_ms(c), 1000);
}

// --- synthetic population ------------------------------------------------

std::vector<std::string> all_span_ids() {
  std::vector<std::string> ids;
  for (const auto& e : synthetic_corpus()) ids.push_back(e.id);
  return ids;
}

// Drives one round for every agent and returns the replies.
std::vector<AgentReply> step(std::vector<std::unique_ptr<Agent>>& agents,
                             const std::vector<std::string>& admitted) {
  AgentRequest req;
  req.admitted_span_ids = admitted;
  std::vector<AgentReply> replies;
  for (auto& a : agents) replies.push_back(a->respond(req));
  return replies;
}

double js_of(const std::vector<AgentReply>& replies) {
  std::vector<BeliefDistribution> beliefs;
  for (const auto& r : replies) beliefs.push_back(r.belief);
  return sensors::js_dispersion(beliefs);
}

TEST(SyntheticPopulation, OpeningRoundIsFullyOpposed) {
  auto agents = make_synthetic_population(1, 0.14, 2);
  auto replies = step(agents, all_span_ids());
  EXPECT_DOUBLE_EQ(replies[0].belief[0], 1.0);
  EXPECT_DOUBLE_EQ(replies[1].belief[1], 1.0);
  EXPECT_NEAR(js_of(replies), 1.0, 1e-12);
  EXPECT_EQ(replies[0].trace.stated_conclusion, "A");
  EXPECT_EQ(replies[1].trace.stated_conclusion, "B");
}

TEST(SyntheticPopulation, SameSeedSameTrajectory) {
  auto a = make_synthetic_population(99, 0.2, 2);
  auto b = make_synthetic_population(99, 0.2, 2);
  for (int t = 0; t < 8; ++t) {
    auto ra = step(a, all_span_ids());
    auto rb = step(b, all_span_ids());
    for (int i = 0; i < 2; ++i) {
      ASSERT_DOUBLE_EQ(ra[i].belief[0], rb[i].belief[0]);
    }
  }
}

TEST(SyntheticPopulation, DifferentSeedsDiverge) {
  auto a = make_synthetic_population(1, 0.2, 2);
  auto b = make_synthetic_population(2, 0.2, 2);
  step(a, all_span_ids());
  step(b, all_span_ids());
  EXPECT_NE(step(a, all_span_ids())[0].belief[0], step(b, all_span_ids())[0].belief[0]);
}

TEST(SyntheticPopulation, ContractionRateMatchesCalibration) {
  // Mean per-round dispersion ratio over 200 seeds should land near the
  // calibration target of 0.7.
  const double lambda = lambda_for_kappa(0.7);
  double ratio_sum = 0.0;
  long ratio_count = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto agents = make_synthetic_population(seed, lambda, 2);
    double prev = js_of(step(agents, all_span_ids()));
    for (int t = 2; t <= 7; ++t) {
      const double js = js_of(step(agents, all_span_ids()));
      ratio_sum += js / prev;
      ++ratio_count;
      prev = js;
    }
  }
  const double mean_ratio = ratio_sum / static_cast<double>(ratio_count);
  EXPECT_GT(mean_ratio, 0.65);
  EXPECT_LT(mean_ratio, 0.75);
}

TEST(SyntheticPopulation, HealthyCitationOverlapGrows) {
  auto agents = make_synthetic_population(5, 0.14, 2, CitationProfile::Healthy);
  auto admitted = all_span_ids();

  auto r1 = step(agents, admitted);
  EXPECT_EQ(r1[0].trace.cited_spans, (std::set<std::string>{"e0", "e4"}));
  EXPECT_EQ(r1[1].trace.cited_spans, (std::set<std::string>{"e0", "e5"}));
  EXPECT_NEAR(sensors::evidence_overlap({r1[0].trace.cited_spans, r1[1].trace.cited_spans}),
              1.0 / 3.0, 1e-15);

  auto r2 = step(agents, admitted);
  EXPECT_NEAR(sensors::evidence_overlap({r2[0].trace.cited_spans, r2[1].trace.cited_spans}),
              0.5, 1e-15);

  auto r3 = step(agents, admitted);
  EXPECT_DOUBLE_EQ(
      sensors::evidence_overlap({r3[0].trace.cited_spans, r3[1].trace.cited_spans}), 1.0);
}

TEST(SyntheticPopulation, CitationsRespectTheAdmittedSet) {
  auto agents = make_synthetic_population(5, 0.14, 2);
  auto replies = step(agents, {"e0"});
  EXPECT_EQ(replies[0].trace.cited_spans, (std::set<std::string>{"e0"}));
  EXPECT_EQ(replies[1].trace.cited_spans, (std::set<std::string>{"e0"}));
}

TEST(SyntheticPopulation, SycophanticProfileCollapsesAndStopsCiting) {
  auto agents =
      make_synthetic_population(7, 0.14, 2, CitationProfile::Sycophantic);
  auto admitted = all_span_ids();
  auto r1 = step(agents, admitted);
  EXPECT_EQ(r1[0].trace.cited_spans.size(), 4u);
  EXPECT_NEAR(js_of(r1), 1.0, 1e-12);

  auto r2 = step(agents, admitted);
  EXPECT_TRUE(r2[0].trace.cited_spans.empty());
  EXPECT_TRUE(r2[1].trace.cited_spans.empty());
  // The mixing weight is forced high, so dispersion falls off a cliff.
  EXPECT_LT(js_of(r2), 0.1);
}

TEST(SyntheticPopulation, RejectsBadParameters) {
  EXPECT_THROW(make_synthetic_population(1, 0.2, 1), std::invalid_argument);
  EXPECT_THROW(make_synthetic_population(1, 0.0, 2), std::invalid_argument);
  EXPECT_THROW(make_synthetic_population(1, 1.0, 2), std::invalid_argument);
}

TEST(SyntheticCorpus, SpansAreValidAndSplitByStrength) {
  auto corpus = synthetic_corpus();
  EXPECT_NO_THROW(validate_corpus(corpus));
  EXPECT_EQ(corpus.size(), 6u);
  int strong = 0, weak = 0;
  for (const auto& e : corpus) {
    (e.quality >= 0.9 ? strong : weak)++;
  }
  EXPECT_EQ(strong, 4);
  EXPECT_EQ(weak, 2);
}

}  // namespace
}  // namespace raudit::backends
