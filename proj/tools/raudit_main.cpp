// Command-line front end: deliberation runs with JSONL logging, the
// single-agent audit loop, termination-time simulation sweeps, behavioral
// metrics reports, and a controller gain check.
//
// Exit codes: 0 success, 1 negative check result (check-gains FAIL),
// 2 error (one "error: <code>: message" line on stderr).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "raudit/factory.hpp"
#include "raudit/raudit.hpp"

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string hex_seed(std::uint64_t seed) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%llx", static_cast<unsigned long long>(seed));
  return buf;
}

raudit::Persona parse_persona(const std::string& name) {
  const auto p = raudit::persona_from_string(name);
  if (!p) throw raudit::config::ConfigError("unknown persona: " + name);
  return *p;
}

raudit::config::AppConfig load_or_default(const std::string& path) {
  if (path.empty()) return raudit::config::AppConfig{};
  return raudit::config::load_config(path);
}

void write_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + out_path);
  out << text;
}

struct RunOptions {
  std::string config_path;
  std::string out_path;
  std::string persona = "polite";
  std::uint64_t seed = 1;
  int runs = 1;
  bool sequential = false;
};

int cmd_run(const RunOptions& opt) {
  const auto cfg = load_or_default(opt.config_path);
  const raudit::Persona persona = parse_persona(opt.persona);
  const bool gains_ok = raudit::control::check_gain_condition(cfg.dial);
  if (!gains_ok) {
    std::cerr << "warning: controller gains violate the stability bound; "
                 "corrections may oscillate\n";
  }

  std::ostringstream log_text;
  raudit::log::RunLogWriter writer(log_text);
  // Outcome lines go wherever the JSONL does not.
  std::ostream& note = opt.out_path.empty() ? std::cerr : std::cout;

  for (int k = 0; k < opt.runs; ++k) {
    const std::uint64_t run_seed = raudit::rng::derive_seed(opt.seed, k);
    const std::string run_id = "run-" + hex_seed(opt.seed) + "-" + std::to_string(k);
    auto run = raudit::factory::build_run(cfg, run_id, run_seed, persona);
    run.concurrent_generation = !opt.sequential;
    writer.header(run_id, run_seed, cfg.dial, gains_ok);
    const auto outcome = raudit::engine::run_deliberation(
        run, [&](const raudit::engine::RunLogRecord& r) { writer.record(r); });

    note << run_id << ": " << to_string(outcome.kind()) << " in "
         << outcome.rounds_used() << " rounds";
    switch (outcome.kind()) {
      case raudit::DeliberationOutcome::Kind::Converged: {
        const auto& pooled = outcome.pooled_belief();
        const std::size_t best = pooled.argmax();
        char p[16];
        std::snprintf(p, sizeof(p), "%.3f", pooled[best]);
        note << "; answer=" << run.answer_space.labels()[best] << " p=" << p;
        break;
      }
      case raudit::DeliberationOutcome::Kind::InformedRefusal: {
        note << "; disputed=";
        const auto& disputed = outcome.refusal().disputed_answers;
        for (std::size_t i = 0; i < disputed.size(); ++i) {
          note << (i ? "|" : "") << disputed[i];
        }
        break;
      }
      case raudit::DeliberationOutcome::Kind::Failure:
        break;
    }
    note << "\n";
  }
  write_text(log_text.str(), opt.out_path);
  return 0;
}

struct AuditOptions {
  std::string config_path;
  std::string persona = "polite";
};

int cmd_audit(const AuditOptions& opt) {
  const auto cfg = load_or_default(opt.config_path);
  auto [agent, auditor] = raudit::factory::build_single(cfg);
  const auto result = raudit::engine::run_single_audit(
      cfg.query, cfg.hint, *agent, *auditor, cfg.dial, parse_persona(opt.persona));
  if (result.status == raudit::engine::SingleAuditStatus::Answered) {
    std::cout << "answer: " << result.answer << " (accepted after " << result.rounds_used
              << (result.rounds_used == 1 ? " round)" : " rounds)") << "\n";
  } else {
    std::cout << "refusal after " << result.rounds_used << " rounds: "
              << result.refusal_text << "\n";
  }
  return 0;
}

struct SimulateOptions {
  double kappa = 0.7;
  double epsilon = 0.05;
  std::vector<double> eps_grid;
  int seeds = 200;
  int w = 1;
  int t_max = 20;
  std::uint64_t seed = 1;
  std::string out_path;
};

int cmd_simulate(const SimulateOptions& opt) {
  double lambda = 0.0;
  try {
    lambda = raudit::backends::lambda_for_kappa(opt.kappa);
  } catch (const std::invalid_argument& e) {
    throw raudit::config::ConfigError(e.what());
  }
  std::vector<double> grid = opt.eps_grid.empty() ? std::vector<double>{opt.epsilon}
                                                  : opt.eps_grid;

  std::ostringstream csv;
  csv << "epsilon,seed,rounds,terminal\n";
  std::vector<double> mean_rounds(grid.size(), 0.0);

  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double eps = grid[gi];
    raudit::DialConfig dial;
    dial.epsilon = eps;
    dial.w = opt.w;
    dial.t_max = opt.t_max;

    long converged = 0;
    long rounds_sum = 0;
    int rounds_max = 0;
    for (int k = 0; k < opt.seeds; ++k) {
      const std::uint64_t run_seed = raudit::rng::derive_seed(opt.seed, k);
      raudit::engine::DeliberationRun run{
          .run_id = "sim",
          .cfg = dial,
          .answer_space = raudit::backends::synthetic_answer_space(),
          .query = "simulated deliberation"};
      run.agents = raudit::backends::make_synthetic_population(run_seed, lambda);
      run.auditor = raudit::backends::make_constant_auditor(
          raudit::CritScore(0.85, 0.85, 0.85, 0.85), dial.rho_target);
      run.corpus = raudit::backends::synthetic_corpus();
      const auto outcome = raudit::engine::run_deliberation(run);

      csv << eps << "," << k << "," << outcome.rounds_used() << ","
          << to_string(outcome.kind()) << "\n";
      if (outcome.kind() == raudit::DeliberationOutcome::Kind::Converged) {
        ++converged;
        rounds_sum += outcome.rounds_used();
        rounds_max = std::max(rounds_max, outcome.rounds_used());
      }
    }
    mean_rounds[gi] =
        converged > 0 ? static_cast<double>(rounds_sum) / static_cast<double>(converged)
                      : std::numeric_limits<double>::quiet_NaN();
    char line[160];
    std::snprintf(line, sizeof(line),
                  "epsilon=%.3f runs=%d converged=%ld/%d mean_rounds=%.2f max=%d\n", eps,
                  opt.seeds, converged, opt.seeds, mean_rounds[gi], rounds_max);
    std::cout << line;
  }

  if (grid.size() >= 2) {
    // Rounds to terminate grow linearly in ln(1/eps) for a geometric
    // contraction; the reference slope comes from the contraction factor.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = std::log(1.0 / grid[i]);
      sx += x;
      sy += mean_rounds[i];
      sxx += x * x;
      sxy += x * mean_rounds[i];
    }
    const double n = static_cast<double>(grid.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double reference = -1.0 / std::log(opt.kappa);
    char line[160];
    std::snprintf(line, sizeof(line),
                  "slope=%.3f rounds per ln(1/eps); reference=%.3f ratio=%.3f\n", slope,
                  reference, slope / reference);
    std::cout << line;
  }

  if (!opt.out_path.empty()) write_text(csv.str(), opt.out_path);
  return 0;
}

struct MetricsOptions {
  std::string input_path;
  std::string format = "table";
  std::string out_path;
};

int cmd_metrics(const MetricsOptions& opt) {
  const auto records = raudit::metrics::load_transitions(opt.input_path);
  const std::string report = opt.format == "json"
                                 ? raudit::metrics::render_report_json(records)
                                 : raudit::metrics::render_report_table(records);
  write_text(report, opt.out_path);
  return 0;
}

int cmd_check_gains(const std::string& config_path) {
  const auto cfg = load_or_default(config_path);
  const double lhs = raudit::control::gain_bound_lhs(cfg.dial);
  const double rhs = raudit::control::gain_bound_rhs(cfg.dial);
  const bool ok = raudit::control::check_gain_condition(cfg.dial);
  char line[96];
  std::snprintf(line, sizeof(line), "%.3f %s %.3f %s\n", lhs, ok ? "<" : ">=", rhs,
                ok ? "PASS" : "FAIL");
  std::cout << line;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop reasoning audit engine"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "run deliberations and log JSONL");
  run->add_option("--config", run_opt.config_path, "config file (JSON)");
  run->add_option("--seed", run_opt.seed, "root seed; each run derives its own");
  run->add_option("--runs", run_opt.runs, "number of runs")->check(CLI::PositiveNumber);
  run->add_option("--out", run_opt.out_path, "JSONL output path (default stdout)");
  run->add_option("--persona", run_opt.persona, "auditor persona: polite|authoritative");
  run->add_flag("--sequential", run_opt.sequential, "generate agent replies one at a time");

  AuditOptions audit_opt;
  auto* audit = app.add_subcommand("audit", "single-agent audited answer");
  audit->add_option("--config", audit_opt.config_path, "config file (JSON)");
  audit->add_option("--persona", audit_opt.persona, "auditor persona: polite|authoritative");

  SimulateOptions sim_opt;
  auto* sim = app.add_subcommand("simulate", "termination-time sweep on the synthetic backend");
  sim->add_option("--kappa", sim_opt.kappa, "per-round belief contraction factor");
  sim->add_option("--epsilon", sim_opt.epsilon, "termination threshold");
  sim->add_option("--eps-grid", sim_opt.eps_grid, "comma-separated epsilon sweep")
      ->delimiter(',');
  sim->add_option("--seeds", sim_opt.seeds, "runs per epsilon")->check(CLI::PositiveNumber);
  sim->add_option("--w", sim_opt.w, "plateau window")->check(CLI::PositiveNumber);
  sim->add_option("--t-max", sim_opt.t_max, "round cap")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_opt.seed, "root seed");
  sim->add_option("--out", sim_opt.out_path, "per-run CSV output path");

  MetricsOptions met_opt;
  auto* met = app.add_subcommand("metrics", "behavioral metrics report from transitions");
  met->add_option("--input", met_opt.input_path, "transitions file (.jsonl or .csv)")
      ->required();
  met->add_option("--format", met_opt.format, "report format")
      ->check(CLI::IsMember({"table", "json"}));
  met->add_option("--out", met_opt.out_path, "report output path (default stdout)");

  std::string gains_config;
  auto* gains = app.add_subcommand("check-gains", "verify the controller stability bound");
  gains->add_option("--config", gains_config, "config file (JSON)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (audit->parsed()) return cmd_audit(audit_opt);
    if (sim->parsed()) return cmd_simulate(sim_opt);
    if (met->parsed()) return cmd_metrics(met_opt);
    return cmd_check_gains(gains_config);
  } catch (const raudit::config::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
  } catch (const raudit::backends::AuthError& e) {
    std::cerr << "error: auth: " << e.what() << "\n";
  } catch (const raudit::engine::DeliberationAbort& e) {
    const char* code =
        e.cause == raudit::engine::DeliberationAbort::Cause::Transport ? "transport"
                                                                       : "parse";
    std::cerr << "error: " << code << ": " << e.what() << " (" << e.history.size()
              << " completed rounds logged)\n";
  } catch (const raudit::backends::TransportError& e) {
    std::cerr << "error: transport: " << e.what() << "\n";
  } catch (const raudit::backends::ParseError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
  } catch (const raudit::metrics::TransitionParseError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
  } catch (const raudit::metrics::UndefinedMetricError& e) {
    std::cerr << "error: metric-undefined: " << e.what() << "\n";
  } catch (const IoError& e) {
    std::cerr << "error: io: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
  }
  return 2;
}
