#pragma once

// JSON encodings for the types that cross a process or network boundary.
// Key order is fixed (ordered_json) so serialized output is byte-stable.

#include <string>

#include "json.hpp"
#include "raudit/backends.hpp"
#include "raudit/domain.hpp"

namespace raudit::wire {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const ReasoningTrace& t) {
  ordered_json j;
  j["agent_id"] = t.agent_id;
  j["round"] = t.round;
  j["argument_text"] = t.argument_text;
  j["cited_spans"] = t.cited_spans;  // std::set serializes sorted
  j["stated_conclusion"] = t.stated_conclusion;
  return j;
}

// The auditor's entire view of the world. No answer key exists here, so no
// implementation of the auditor can peek at ground truth.
inline ordered_json to_json(const backends::AuditRequest& r) {
  ordered_json j;
  j["trace"] = to_json(r.trace);
  j["persona"] = to_string(r.persona);
  ordered_json pillars = ordered_json::array();
  for (const char* p : r.required_pillars) pillars.push_back(p);
  j["required_pillars"] = pillars;
  return j;
}

inline ordered_json to_json(const backends::AgentRequest& r) {
  ordered_json j;
  j["query"] = r.query;
  j["hint"] = r.hint ? ordered_json(*r.hint) : ordered_json(nullptr);
  j["critique_history"] = r.critique_history;
  j["contentiousness"] = r.contentiousness;
  j["actuator_directive"] =
      r.actuator_directive ? ordered_json(*r.actuator_directive) : ordered_json(nullptr);
  j["admitted_span_ids"] = r.admitted_span_ids;
  return j;
}

}  // namespace raudit::wire
