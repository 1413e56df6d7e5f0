// Walks the single-agent loop: the agent proposes an answer, the auditor
// scores it against the four-pillar rubric, and a Poor verdict feeds its
// critique back into the next attempt. Scripted on both sides so the
// output is stable; swap in make_http_chat_agent / make_llm_auditor from
// raudit/http_backend.hpp to run the same loop against a live endpoint.

#include <cstdio>

#include "raudit/raudit.hpp"

using namespace raudit;

namespace {

backends::AgentReply reply(int round, const std::string& answer, const std::string& argument) {
  ReasoningTrace t;
  t.agent_id = "demo-agent";
  t.round = round;
  t.argument_text = argument;
  t.stated_conclusion = answer;
  return backends::AgentReply{std::move(t), BeliefDistribution({0.9, 0.1})};
}

backends::AuditVerdict verdict(backends::AuditStatus status, CritScore crit,
                               std::string critique = {},
                               std::vector<PathologyLabel> pathologies = {}) {
  return backends::AuditVerdict{status, crit, std::move(critique), std::move(pathologies)};
}

}  // namespace

int main() {
  // First attempt leans on a single figure; the auditor wants the cross-check.
  std::vector<backends::AgentReply> script;
  script.push_back(reply(1, "184", "The March sheet lists 184 units shipped."));
  script.push_back(reply(2, "184",
                         "The March sheet lists 184 shipped and the carrier manifest "
                         "confirms 184 deliveries, so returns are already netted out."));
  auto agent = backends::make_scripted_agent(std::move(script));

  std::vector<backends::AuditVerdict> verdicts;
  verdicts.push_back(verdict(
      backends::AuditStatus::Poor, CritScore(0.8, 0.4, 0.6, 0.7),
      "one source only; reconcile the shipment count against the carrier manifest",
      {{PathologyKind::UnsupportedClaim, "single-source figure"}}));
  verdicts.push_back(verdict(backends::AuditStatus::Good, CritScore(0.9, 0.85, 0.8, 0.9)));
  auto auditor = backends::make_scripted_auditor(std::move(verdicts));

  DialConfig cfg;  // t_max = 5 caps the retries
  auto result = engine::run_single_audit("How many units shipped in March?", std::nullopt,
                                         *agent, *auditor, cfg, Persona::Authoritative);

  for (std::size_t i = 0; i < result.verdicts.size(); ++i) {
    const auto& v = result.verdicts[i];
    std::printf("attempt %zu: said %-5s -> %s (composite %.3f)\n", i + 1,
                result.round_answers[i].c_str(), backends::to_string(v.status),
                v.crit.composite());
    if (!v.critique.empty()) std::printf("  critique: %s\n", v.critique.c_str());
  }

  if (result.status == engine::SingleAuditStatus::Answered) {
    std::printf("\naccepted: %s after %d rounds\n", result.answer.c_str(), result.rounds_used);
  } else {
    std::printf("\n%s\n", result.refusal_text.c_str());
  }
  return 0;
}
