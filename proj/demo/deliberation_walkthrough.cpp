// Runs one synthetic deliberation in-process and prints the per-round
// telemetry the controller sees: quality, dispersion, overlap, the PID
// error/correction pair, and where the dials moved. Useful for getting a
// feel for the loop before pointing it at a real chat backend.
//
// Usage: deliberation_walkthrough [kappa] [seed]
//   kappa  pairwise agreement level in [0.5, 0.8]  (default 0.7)
//   seed   root RNG seed                           (default 1)

#include <cstdio>
#include <cstdlib>
#include <string>

#include "raudit/raudit.hpp"

int main(int argc, char** argv) {
  using namespace raudit;

  double kappa = 0.7;
  std::uint64_t seed = 1;
  if (argc > 1) kappa = std::atof(argv[1]);
  if (argc > 2) seed = std::strtoull(argv[2], nullptr, 10);

  double lambda = 0.0;
  try {
    lambda = backends::lambda_for_kappa(kappa);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }

  DialConfig cfg;           // library defaults: rho* = 0.8, t_max = 5
  cfg.t_max = 12;           // give the plateau detector room to fire
  cfg.w = 2;

  engine::DeliberationRun run{
      .run_id = "walkthrough",
      .cfg = cfg,
      .answer_space = backends::synthetic_answer_space(),
      .query = "synthetic deliberation",
      .hint = std::nullopt,
      .persona = Persona::Polite,
      .agents = backends::make_synthetic_population(seed, lambda),
      .auditor = backends::make_constant_auditor(CritScore(0.85, 0.85, 0.85, 0.85),
                                                 cfg.rho_target),
      .corpus = backends::synthetic_corpus(),
  };

  std::printf("kappa=%.2f  lambda=%.4f  seed=%llu\n\n", kappa, lambda,
              static_cast<unsigned long long>(seed));
  std::printf("  t   rho    js     ov   s  e_t     u_t     quadrant   act          beta   tau\n");

  auto outcome = engine::run_deliberation(run, [](const engine::RunLogRecord& r) {
    std::printf("%3d  %.2f  %.3f  %.2f  %c  %+.3f  %+.3f  %-9s  %-11s  %.3f  %.3f\n",
                r.t, r.rho_bar, r.js, r.ov, r.s_t ? 'y' : '.', r.e_t, r.u_t,
                r.quadrant.c_str(), r.actuator.c_str(), r.beta, r.tau);
  });

  std::printf("\n");
  switch (outcome.kind()) {
    case DeliberationOutcome::Kind::Converged: {
      const auto& p = outcome.pooled_belief();
      std::size_t best = 0;
      for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = i;
      std::printf("converged in %d rounds: %s (pooled p=%.3f)\n", outcome.rounds_used(),
                  run.answer_space.labels()[best].c_str(), p[best]);
      break;
    }
    case DeliberationOutcome::Kind::InformedRefusal: {
      const auto& rep = outcome.refusal();
      std::string disputed;
      for (const auto& a : rep.disputed_answers) {
        if (!disputed.empty()) disputed += " vs ";
        disputed += a;
      }
      std::printf("refused after %d rounds: %s\n  gap: %s\n  next: %s\n", outcome.rounds_used(),
                  disputed.c_str(), rep.evidence_gap.c_str(), rep.pivotal_question.c_str());
      break;
    }
    case DeliberationOutcome::Kind::Failure:
      std::printf("no verdict after %d rounds\n", outcome.rounds_used());
      break;
  }
  return 0;
}
