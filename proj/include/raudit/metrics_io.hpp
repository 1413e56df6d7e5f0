#pragma once

// File I/O and rendering for the behavioral-metrics pipeline. Transition
// records load from JSONL or headered CSV (chosen by extension); reports
// render as JSON or an aligned text table. An infinite harm/help ratio is
// serialized as the string "inf".

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "raudit/domain.hpp"
#include "raudit/metrics.hpp"

namespace raudit::metrics {

struct TransitionParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace io_detail {

inline bool parse_bool(const std::string& s, const std::string& context) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw TransitionParseError("bad boolean '" + s + "' in " + context);
}

inline TransitionRecord from_json_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransitionParseError("line " + std::to_string(line_no) +
                               " is not valid JSON: " + e.what());
  }
  TransitionRecord r;
  try {
    r.case_id = j.at("case_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    const auto persona = persona_from_string(j.at("persona").get<std::string>());
    if (!persona) {
      throw TransitionParseError("line " + std::to_string(line_no) + ": unknown persona");
    }
    r.persona = *persona;
    r.judge_id = j.at("judge_id").get<std::string>();
    r.base_correct = j.at("base_correct").get<bool>();
    r.final_correct = j.at("final_correct").get<bool>();
    if (j.contains("detected") && !j.at("detected").is_null()) {
      r.detected = j.at("detected").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransitionParseError("line " + std::to_string(line_no) + ": " + e.what());
  }
  return r;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace io_detail

inline std::vector<TransitionRecord> load_transitions_jsonl(std::istream& in) {
  std::vector<TransitionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    records.push_back(io_detail::from_json_line(line, line_no));
  }
  return records;
}

// Headered CSV with the same field names as the JSONL form. Fields must not
// contain commas; an empty detected cell means the flag is absent.
inline std::vector<TransitionRecord> load_transitions_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TransitionParseError("csv input is empty");
  const std::vector<std::string> header = io_detail::split_csv(line);
  static const std::vector<std::string> kExpected = {
      "case_id", "model_id", "persona", "judge_id", "base_correct", "final_correct",
      "detected"};
  if (header != kExpected) {
    throw TransitionParseError("csv header mismatch; expected " +
                               std::string("case_id,model_id,persona,judge_id,"
                                           "base_correct,final_correct,detected"));
  }
  std::vector<TransitionRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = io_detail::split_csv(line);
    if (fields.size() != kExpected.size()) {
      throw TransitionParseError("line " + std::to_string(line_no) +
                                 ": wrong field count");
    }
    const std::string context = "line " + std::to_string(line_no);
    TransitionRecord r;
    r.case_id = fields[0];
    r.model_id = fields[1];
    const auto persona = persona_from_string(fields[2]);
    if (!persona) throw TransitionParseError(context + ": unknown persona " + fields[2]);
    r.persona = *persona;
    r.judge_id = fields[3];
    r.base_correct = io_detail::parse_bool(fields[4], context);
    r.final_correct = io_detail::parse_bool(fields[5], context);
    if (!fields[6].empty()) r.detected = io_detail::parse_bool(fields[6], context);
    records.push_back(r);
  }
  return records;
}

inline std::vector<TransitionRecord> load_transitions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TransitionParseError("cannot open transitions file: " + path.string());
  const std::string ext = path.extension().string();
  if (ext == ".csv") return load_transitions_csv(in);
  if (ext == ".jsonl") return load_transitions_jsonl(in);
  throw TransitionParseError("unsupported transitions format '" + ext +
                             "' (use .jsonl or .csv)");
}

// ---------------------------------------------------------------------------
// Report rendering

namespace io_detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json ratio_value(const std::optional<double>& ratio) {
  if (!ratio) return nullptr;
  if (std::isinf(*ratio)) return "inf";
  return *ratio;
}

inline ordered_json summary_json(const BehaviorSummary& s) {
  ordered_json j;
  j["counts"] = {{"tt", s.counts.tt},
                 {"tf", s.counts.tf},
                 {"ft", s.counts.ft},
                 {"ff", s.counts.ff},
                 {"total", s.counts.total()}};
  auto ci = [](const std::optional<WaldInterval>& w) -> ordered_json {
    if (!w) return nullptr;
    return {{"half_width", w->half_width}, {"low", w->low}, {"high", w->high}};
  };
  j["paranoia"] = s.paranoia ? ordered_json(*s.paranoia) : ordered_json(nullptr);
  j["paranoia_ci"] = ci(s.paranoia_ci);
  j["realignment"] = s.realignment ? ordered_json(*s.realignment) : ordered_json(nullptr);
  j["realignment_ci"] = ci(s.realignment_ci);
  j["sycophancy_ratio"] = ratio_value(s.ratio);
  j["net_effect"] = s.net;
  j["quadrant"] = s.quadrant ? ordered_json(to_string(*s.quadrant)) : ordered_json(nullptr);
  ordered_json det;
  det["coverage"] = s.detection_coverage;
  det["detected_errors"] = s.detected_errors;
  det["dissonance"] = s.dissonance ? ordered_json(*s.dissonance) : ordered_json(nullptr);
  j["detection"] = det;
  return j;
}

inline std::string pct(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", *v * 100.0);
  return buf;
}

inline std::string ratio_text(const std::optional<double>& v) {
  if (!v) return "-";
  if (std::isinf(*v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *v);
  return buf;
}

inline void table_row(std::ostream& out, const std::string& group,
                      const BehaviorSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-16s %6ld %5ld %5ld %5ld %5ld %9s %9s %7s %+5ld %4s\n",
                group.c_str(), s.counts.total(), s.counts.tt, s.counts.tf, s.counts.ft,
                s.counts.ff, pct(s.paranoia).c_str(), pct(s.realignment).c_str(),
                ratio_text(s.ratio).c_str(), s.net,
                s.quadrant ? to_string(*s.quadrant) : "-");
  out << buf;
}

}  // namespace io_detail

inline std::string render_report_json(const std::vector<TransitionRecord>& records) {
  io_detail::ordered_json j;
  j["overall"] = io_detail::summary_json(summarize(records));
  io_detail::ordered_json by_persona;
  for (const auto& [k, v] : summarize_by_persona(records)) {
    by_persona[k] = io_detail::summary_json(v);
  }
  j["by_persona"] = by_persona;
  io_detail::ordered_json by_model;
  for (const auto& [k, v] : summarize_by_model(records)) {
    by_model[k] = io_detail::summary_json(v);
  }
  j["by_model"] = by_model;
  return j.dump(2) + "\n";
}

inline std::string render_report_table(const std::vector<TransitionRecord>& records) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-16s %6s %5s %5s %5s %5s %9s %9s %7s %5s %4s\n",
                "group", "n", "TT", "TF", "FT", "FF", "paranoia", "realign", "ratio",
                "net", "quad");
  out << buf;
  io_detail::table_row(out, "overall", summarize(records));
  for (const auto& [k, v] : summarize_by_persona(records)) {
    io_detail::table_row(out, "persona:" + k, v);
  }
  for (const auto& [k, v] : summarize_by_model(records)) {
    io_detail::table_row(out, "model:" + k, v);
  }
  return out.str();
}

}  // namespace raudit::metrics
