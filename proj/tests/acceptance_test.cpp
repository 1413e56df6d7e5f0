// Release gate. Each test checks one acceptance criterion end to end and
// prints exactly one [C#] PASS/FAIL line with its runtime, so the suite's
// output doubles as the acceptance report.

#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "raudit/factory.hpp"
#include "raudit/raudit.hpp"

namespace raudit {
namespace {

class Criterion {
 public:
  Criterion(const char* tag, double limit_s, std::string summary)
      : tag_(tag),
        limit_s_(limit_s),
        summary_(std::move(summary)),
        start_(std::chrono::steady_clock::now()) {}

  ~Criterion() {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    EXPECT_LT(elapsed, limit_s_) << tag_ << " exceeded its runtime budget";
    const bool ok = !::testing::Test::HasFailure();
    std::printf("[%s] %s: %s (%.2f s, limit %.0f s)\n", tag_, ok ? "PASS" : "FAIL",
                summary_.c_str(), elapsed, limit_s_);
    std::fflush(stdout);
  }

 private:
  const char* tag_;
  double limit_s_;
  std::string summary_;
  std::chrono::steady_clock::time_point start_;
};

std::string pct1(double v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.1f%%", v * 100.0);
  return buf;
}

std::string dec3(double v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::filesystem::path fixture(const std::string& name) {
  // ctest sets RAUDIT_FIXTURES; fall back to the source-relative path so
  // the binary also runs by hand from the repo root.
  const char* dir = std::getenv("RAUDIT_FIXTURES");
  return std::filesystem::path(dir ? dir : "tests/fixtures") / name;
}

TEST(Acceptance, C1_BenchmarkTransitionRates) {
  Criterion c("C1", 1.0, "benchmark transition counts reproduce all rates at one decimal");
  const metrics::TransitionCounts polite{418, 100, 154, 458};
  const metrics::TransitionCounts authoritative{369, 149, 188, 424};
  EXPECT_EQ(pct1(metrics::paranoia_rate(polite)), "19.3%");
  EXPECT_EQ(pct1(metrics::paranoia_rate(authoritative)), "28.8%");
  EXPECT_EQ(pct1(metrics::realignment_rate(polite)), "25.2%");
  EXPECT_EQ(pct1(metrics::realignment_rate(authoritative)), "30.7%");
  EXPECT_EQ(metrics::net_effect(polite), 54);
  EXPECT_EQ(metrics::net_effect(authoritative), 39);
}

TEST(Acceptance, C2_QuadrantProfiles) {
  Criterion c("C2", 1.0, "all 10 benchmark (paranoia, ratio) profiles classify as printed");
  using metrics::Quadrant;
  struct Profile {
    double paranoia;
    double ratio;
    Quadrant expected;
  };
  // Five models under each of the two judging personas; the third/first
  // rows are the judge-stable Q1 pair, the second rows the stable Q4 pair.
  const Profile profiles[] = {
      {0.234, 0.51, Quadrant::Q1}, {0.277, 1.18, Quadrant::Q4},
      {0.196, 0.80, Quadrant::Q1}, {0.306, 0.77, Quadrant::Q3},
      {0.171, 0.49, Quadrant::Q1}, {0.127, 0.28, Quadrant::Q1},
      {0.348, 2.14, Quadrant::Q4}, {0.172, 1.23, Quadrant::Q2},
      {0.508, 1.19, Quadrant::Q4}, {0.333, 1.55, Quadrant::Q4},
  };
  for (const auto& p : profiles) {
    EXPECT_EQ(metrics::classify_quadrant(p.paranoia, p.ratio), p.expected)
        << "profile (" << p.paranoia << ", " << p.ratio << ")";
  }
}

TEST(Acceptance, C3_ConfidenceIntervals) {
  Criterion c("C3", 1.0, "Wald half-widths at n=500 match the published +/-3.2 and +/-2.3");
  EXPECT_EQ(dec3(metrics::wald_ci(418, 500).half_width), "0.032");
  EXPECT_EQ(dec3(metrics::wald_ci(462, 500).half_width), "0.023");
}

TEST(Acceptance, C4_GainGateBoundsCorrections) {
  Criterion c("C4", 30.0,
              "10k sampled gain tuples: bound holds with zero violations; "
              "contentiousness recursion hits its fixed point");
  std::mt19937_64 rng(0xC4C4C4C4ULL);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * rng::uniform_unit(rng);
  };

  long passing = 0;
  long violations = 0;
  long fixed_point_misses = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    DialConfig d;
    d.k_p = uniform(0.0, 1.2);
    d.k_i = uniform(0.0, 0.3);
    d.k_d = uniform(0.0, 0.5);
    d.gamma_beta = uniform(0.5, 0.95);
    if (!control::check_gain_condition(d)) continue;
    ++passing;

    const double bound = control::gain_bound_lhs(d);
    control::PidState pid;
    for (int step = 0; step < 40; ++step) {
      const double e = uniform(-1.0, 1.0);
      const auto r = control::pid_step(pid, e, d);
      pid = r.next;
      if (std::abs(r.u) > bound + 1e-12) ++violations;
    }

    // Constant-correction recursion b <- gamma*b + u settles at u/(1-gamma).
    const double u = uniform(-bound, bound);
    double b = d.beta_init;
    for (int k = 0; k < 400; ++k) b = d.gamma_beta * b + u;
    if (std::abs(b - u / (1.0 - d.gamma_beta)) >= 1e-6) ++fixed_point_misses;
  }
  EXPECT_GT(passing, 1000) << "sampling should produce a healthy share of passing tuples";
  EXPECT_EQ(violations, 0);
  EXPECT_EQ(fixed_point_misses, 0);
}

engine::DeliberationRun make_contractive_run(std::uint64_t seed, double lambda,
                                             const DialConfig& dial,
                                             backends::CitationProfile profile =
                                                 backends::CitationProfile::Healthy) {
  engine::DeliberationRun run{.run_id = "acc",
                              .cfg = dial,
                              .answer_space = backends::synthetic_answer_space(),
                              .query = "acceptance sweep"};
  run.agents = backends::make_synthetic_population(seed, lambda, 2, profile);
  run.auditor = backends::make_constant_auditor(CritScore(0.85, 0.85, 0.85, 0.85),
                                                dial.rho_target);
  run.corpus = backends::synthetic_corpus();
  return run;
}

TEST(Acceptance, C5_TerminationEnvelope) {
  Criterion c("C5", 120.0,
              "contractive agents terminate within 12 rounds >= 95% of 1000 seeds; "
              "rounds scale as ln(1/eps) within 25% of the contraction prediction");
  const double kappa = 0.7;
  const double lambda = backends::lambda_for_kappa(kappa);

  DialConfig dial;
  dial.epsilon = 0.05;
  dial.w = 1;
  dial.t_max = 20;
  int within = 0;
  for (int k = 0; k < 1000; ++k) {
    auto run = make_contractive_run(rng::derive_seed(5001, k), lambda, dial);
    const auto outcome = engine::run_deliberation(run);
    if (outcome.kind() == DeliberationOutcome::Kind::Converged &&
        outcome.rounds_used() <= 12) {
      ++within;
    }
  }
  EXPECT_GE(within, 950) << within << "/1000 within the 12-round envelope";

  const double grid[] = {0.2, 0.1, 0.05, 0.02, 0.01};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double eps : grid) {
    DialConfig d;
    d.epsilon = eps;
    d.w = 1;
    d.t_max = 40;
    long rounds_sum = 0;
    const int seeds = 200;
    for (int k = 0; k < seeds; ++k) {
      auto run = make_contractive_run(rng::derive_seed(5002, k), lambda, d);
      rounds_sum += engine::run_deliberation(run).rounds_used();
    }
    const double x = std::log(1.0 / eps);
    const double y = static_cast<double>(rounds_sum) / seeds;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = 5.0;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double reference = -1.0 / std::log(kappa);  // 2.804 at kappa = 0.7
  EXPECT_GT(slope, 0.75 * reference) << "slope " << slope;
  EXPECT_LT(slope, 1.25 * reference) << "slope " << slope;
}

TEST(Acceptance, C6_SycophancySignalValidity) {
  Criterion c("C6", 60.0,
              "collapse profile trips the signal within 2 rounds in 500/500 seeds; "
              "healthy profile never trips it");
  const double lambda = backends::lambda_for_kappa(0.7);
  int tripped_early = 0;
  int healthy_trips = 0;
  for (int k = 0; k < 500; ++k) {
    DialConfig dial;  // t_max = 5 is plenty to observe round 2
    auto syco = make_contractive_run(rng::derive_seed(6001, k), 0.9, dial,
                                     backends::CitationProfile::Sycophantic);
    bool early = false;
    engine::run_deliberation(syco, [&](const engine::RunLogRecord& r) {
      if (r.s_t && r.t <= 2) early = true;
    });
    if (early) ++tripped_early;

    DialConfig long_dial;
    long_dial.t_max = 30;
    auto healthy = make_contractive_run(rng::derive_seed(6002, k), lambda, long_dial);
    engine::run_deliberation(healthy, [&](const engine::RunLogRecord& r) {
      if (r.s_t) ++healthy_trips;
    });
  }
  EXPECT_EQ(tripped_early, 500);
  EXPECT_EQ(healthy_trips, 0);
}

TEST(Acceptance, C7_CaseStudyReplay) {
  Criterion c("C7", 1.0,
              "scripted case replays end at 3140 (one critique round, FT) and "
              "11403 under the polite persona (TF)");

  // Realignment case: a hinted wrong total is corrected after one critique.
  {
    const auto cfg = config::load_config(fixture("case_realign.json"));
    auto [agent, auditor] = factory::build_single(cfg);
    const auto result = engine::run_single_audit(cfg.query, cfg.hint, *agent, *auditor,
                                                 cfg.dial, Persona::Polite);
    ASSERT_EQ(result.status, engine::SingleAuditStatus::Answered);
    EXPECT_EQ(result.answer, "3140");
    EXPECT_EQ(result.rounds_used, 2);  // exactly one critique round before acceptance

    const std::string truth = "3140";
    ASSERT_FALSE(result.round_answers.empty());
    TransitionRecord rec{"case-realign", "scripted", Persona::Polite, "scripted",
                         result.round_answers.front() == truth, result.answer == truth,
                         std::nullopt};
    EXPECT_EQ(transition_label(rec), Transition::FT);
  }

  // Overcorrection case: a correct count is argued into a wrong one.
  {
    const auto cfg = config::load_config(fixture("case_overcorrect.json"));
    auto [agent, auditor] = factory::build_single(cfg);
    const auto result = engine::run_single_audit(cfg.query, cfg.hint, *agent, *auditor,
                                                 cfg.dial, Persona::Polite);
    ASSERT_EQ(result.status, engine::SingleAuditStatus::Answered);
    EXPECT_EQ(result.answer, "11403");

    const std::string truth = "9500";
    TransitionRecord rec{"case-overcorrect", "scripted", Persona::Polite, "scripted",
                         result.round_answers.front() == truth, result.answer == truth,
                         std::nullopt};
    EXPECT_EQ(transition_label(rec), Transition::TF);
  }
}

TEST(Acceptance, C8_DeterministicLogs) {
  Criterion c("C8", 5.0, "same seed, config, and scripts give byte-identical JSONL");
  const auto cfg = config::load_config(fixture("scripted_run.json"));
  auto render = [&cfg]() {
    auto run = factory::build_run(cfg, "det", 99, Persona::Polite);
    std::ostringstream out;
    log::RunLogWriter writer(out);
    writer.header("det", 99, cfg.dial, control::check_gain_condition(cfg.dial));
    engine::run_deliberation(run,
                             [&](const engine::RunLogRecord& r) { writer.record(r); });
    return out.str();
  };
  const std::string first = render();
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, render());
}

TEST(Acceptance, C9_ConvergenceEnvelope) {
  Criterion c("C9", 60.0,
              "500-run scripted suite: mean rounds < 2.0, early termination > 74%");
  using backends::AgentReply;
  auto reply = [](const std::string& label, std::vector<double> mass) {
    ReasoningTrace t;
    t.agent_id = "s";
    t.stated_conclusion = label;
    return AgentReply{std::move(t), BeliefDistribution(std::move(mass))};
  };

  DialConfig dial;
  dial.w = 1;  // a single settled round is enough to stop
  long rounds_sum = 0;
  int early = 0;
  for (int i = 0; i < 500; ++i) {
    engine::DeliberationRun run{.run_id = "env",
                                .cfg = dial,
                                .answer_space = backends::synthetic_answer_space()};
    const int variant = i % 50;
    if (variant < 39) {  // agree immediately
      run.agents.push_back(backends::make_scripted_agent({reply("A", {0.95, 0.05})}));
      run.agents.push_back(backends::make_scripted_agent({reply("A", {0.94, 0.06})}));
    } else if (variant < 48) {  // settle on the second round
      run.agents.push_back(backends::make_scripted_agent(
          {reply("A", {0.9, 0.1}), reply("A", {0.9, 0.1})}));
      run.agents.push_back(backends::make_scripted_agent(
          {reply("B", {0.1, 0.9}), reply("A", {0.88, 0.12})}));
    } else {  // never settle; runs to the cap
      run.agents.push_back(backends::make_scripted_agent({reply("A", {1.0, 0.0})}));
      run.agents.push_back(backends::make_scripted_agent({reply("B", {0.0, 1.0})}));
    }
    run.auditor = backends::make_constant_auditor(CritScore(0.85, 0.85, 0.85, 0.85),
                                                  dial.rho_target);
    const auto outcome = engine::run_deliberation(run);
    rounds_sum += outcome.rounds_used();
    if (outcome.kind() == DeliberationOutcome::Kind::Converged &&
        outcome.rounds_used() <= 2) {
      ++early;
    }
  }
  const double avg = static_cast<double>(rounds_sum) / 500.0;
  EXPECT_LT(avg, 2.0) << "average rounds " << avg;
  EXPECT_GT(early, 370) << early << "/500 terminated early";  // 74% of 500
}

}  // namespace
}  // namespace raudit
