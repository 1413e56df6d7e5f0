#include "raudit/http_backend.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>

namespace raudit::backends {
namespace {

std::string chat_body(const std::string& content) {
  nlohmann::json j;
  j["choices"] = {{{"message", {{"role", "assistant"}, {"content", content}}}}};
  return j.dump();
}

// Local chat endpoint whose behavior per hit is scripted by the test.
class FakeEndpoint {
 public:
  using Handler = std::function<void(int hit, const httplib::Request&, httplib::Response&)>;

  explicit FakeEndpoint(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   handler_(++hits_, req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  ChatEndpointConfig config() const {
    ChatEndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port_);
    cfg.model_name = "fake-chat";
    cfg.timeout_ms = 2000;
    cfg.max_retries = 2;
    return cfg;
  }

  int hits() const { return hits_; }

 private:
  httplib::Server server_;
  Handler handler_;
  std::thread thread_;
  std::atomic<int> hits_{0};
  int port_ = 0;
};

FakeEndpoint::Handler always(const std::string& content) {
  return [content](int, const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_body(content), "application/json");
  };
}

TEST(ChatTransport, PostsChatShapeAndReturnsContent) {
  std::string seen_body;
  FakeEndpoint ep([&](int, const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    res.set_content(chat_body("hello"), "application/json");
  });
  ChatTransport transport(ep.config());
  EXPECT_EQ(transport.complete("sys", "usr"), "hello");
  auto j = nlohmann::json::parse(seen_body);
  EXPECT_EQ(j["model"], "fake-chat");
  EXPECT_DOUBLE_EQ(j["temperature"].get<double>(), 0.0);
  ASSERT_EQ(j["messages"].size(), 2u);
  EXPECT_EQ(j["messages"][0]["role"], "system");
  EXPECT_EQ(j["messages"][0]["content"], "sys");
  EXPECT_EQ(j["messages"][1]["content"], "usr");
}

TEST(ChatTransport, BearerTokenComesFromTheNamedEnvVar) {
  ASSERT_EQ(setenv("RAUDIT_TEST_TOKEN", "tok-abc", 1), 0);
  std::string auth;
  FakeEndpoint ep([&](int, const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    res.set_content(chat_body("ok"), "application/json");
  });
  auto cfg = ep.config();
  cfg.auth_token_env_var = "RAUDIT_TEST_TOKEN";
  ChatTransport transport(cfg);
  transport.complete("s", "u");
  EXPECT_EQ(auth, "Bearer tok-abc");

  unsetenv("RAUDIT_TEST_TOKEN");
  EXPECT_THROW(ChatTransport{cfg}, AuthError);
}

TEST(ChatTransport, TransientStatusRetriesThenSucceeds) {
  FakeEndpoint ep([](int hit, const httplib::Request&, httplib::Response& res) {
    if (hit == 1) {
      res.status = 503;
    } else {
      res.set_content(chat_body("second try"), "application/json");
    }
  });
  ChatTransport transport(ep.config());
  EXPECT_EQ(transport.complete("s", "u"), "second try");
  EXPECT_EQ(ep.hits(), 2);
}

TEST(ChatTransport, NonTransientStatusFailsFast) {
  FakeEndpoint ep([](int, const httplib::Request&, httplib::Response& res) {
    res.status = 401;
  });
  ChatTransport transport(ep.config());
  try {
    transport.complete("s", "u");
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status_code, 401);
  }
  EXPECT_EQ(ep.hits(), 1);
}

TEST(ChatTransport, RetriesExhaustedReportsTheLastFailure) {
  FakeEndpoint ep([](int, const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  auto cfg = ep.config();
  cfg.max_retries = 1;
  ChatTransport transport(cfg);
  try {
    transport.complete("s", "u");
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status_code, 503);
    EXPECT_NE(std::string(e.what()).find("retries exhausted"), std::string::npos);
  }
  EXPECT_EQ(ep.hits(), 2);
}

TEST(ChatTransport, MalformedSuccessBodyIsNotRetried) {
  FakeEndpoint ep([](int, const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"choices\": []}", "application/json");
  });
  ChatTransport transport(ep.config());
  try {
    transport.complete("s", "u");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.raw_text, "{\"choices\": []}");
  }
  EXPECT_EQ(ep.hits(), 1);  // same prompt would fetch the same garbage
}

TEST(ChatTransport, ConnectionFailureSurfacesAsTransportError) {
  ChatEndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:9";  // discard port, nothing listens
  cfg.timeout_ms = 200;
  cfg.max_retries = 0;
  ChatTransport transport(cfg);
  EXPECT_THROW(transport.complete("s", "u"), TransportError);
}

AgentRequest sample_request() {
  AgentRequest req;
  req.query = "pick a side";
  req.contentiousness = 8;
  req.admitted_span_ids = {"e0", "e1"};
  return req;
}

TEST(HttpChatAgent, ParsesTheLineContract) {
  std::string user_msg;
  FakeEndpoint ep([&](int, const httplib::Request& req, httplib::Response& res) {
    user_msg = nlohmann::json::parse(req.body)["messages"][1]["content"];
    res.set_content(chat_body("ARGUMENT: e0 pins the total\n"
                              "CITES: e0, e9\n"
                              "CONFIDENCE: 0.8\n"
                              "ANSWER: A"),
                    "application/json");
  });
  HttpChatAgent agent(ep.config(), synthetic_answer_space());
  auto reply = agent.respond(sample_request());
  EXPECT_EQ(reply.trace.stated_conclusion, "A");
  EXPECT_EQ(reply.trace.agent_id, "http:fake-chat");
  // e9 was never admitted, so the citation is dropped at the parse boundary.
  EXPECT_EQ(reply.trace.cited_spans, (std::set<std::string>{"e0"}));
  EXPECT_NEAR(reply.belief[0], 0.8, 1e-12);
  EXPECT_NEAR(reply.belief[1], 0.2, 1e-12);
  // The rendered prompt carries the dials the engine set.
  EXPECT_NE(user_msg.find("intensity 8/10"), std::string::npos);
  EXPECT_NE(user_msg.find("e0 e1"), std::string::npos);
}

TEST(HttpChatAgent, SubChanceConfidenceIsLiftedToChance) {
  FakeEndpoint ep(always("CONFIDENCE: 0.2\nANSWER: B"));
  HttpChatAgent agent(ep.config(), synthetic_answer_space());
  auto reply = agent.respond(sample_request());
  // 0.2 on a binary space would rank A above the stated B; the floor at
  // chance leaves the belief uniform instead.
  EXPECT_DOUBLE_EQ(reply.belief[0], 0.5);
  EXPECT_DOUBLE_EQ(reply.belief[1], 0.5);
}

TEST(HttpChatAgent, RejectsRepliesOffTheContract) {
  {
    FakeEndpoint ep(always("ARGUMENT: rambling, no answer line"));
    HttpChatAgent agent(ep.config(), synthetic_answer_space());
    EXPECT_THROW(agent.respond(sample_request()), ParseError);
  }
  {
    FakeEndpoint ep(always("ANSWER: Z"));
    HttpChatAgent agent(ep.config(), synthetic_answer_space());
    EXPECT_THROW(agent.respond(sample_request()), ParseError);
  }
  {
    FakeEndpoint ep(always("CONFIDENCE: 1.5\nANSWER: A"));
    HttpChatAgent agent(ep.config(), synthetic_answer_space());
    EXPECT_THROW(agent.respond(sample_request()), ParseError);
  }
}

AuditRequest audit_request(Persona persona) {
  AuditRequest req;
  req.trace.agent_id = "agent0";
  req.trace.round = 1;
  req.trace.argument_text = "because e0 says so";
  req.trace.cited_spans = {"e0"};
  req.trace.stated_conclusion = "A";
  req.persona = persona;
  return req;
}

TEST(LlmAuditor, AcceptsACleanScoreLine) {
  FakeEndpoint ep(always(
      "logical=0.9 evidential=0.85 alternatives=0.8 causal_alignment=0.9 "
      "verdict=GOOD issues=none critique=chain holds end to end"));
  LlmAuditor auditor(ep.config(), 0.8);
  auto v = auditor.evaluate(audit_request(Persona::Polite));
  EXPECT_EQ(v.status, AuditStatus::Good);
  EXPECT_NEAR(v.crit.composite(), 0.8625, 1e-12);
  EXPECT_EQ(v.critique, "chain holds end to end");
  EXPECT_TRUE(v.pathologies.empty());
}

TEST(LlmAuditor, StatedGoodIsDowngradedWhenIssuesAreFlagged) {
  FakeEndpoint ep(always(
      "logical=0.9 evidential=0.9 alternatives=0.9 causal_alignment=0.9 "
      "verdict=GOOD issues=sycophancy critique=echoes the suggested answer"));
  LlmAuditor auditor(ep.config(), 0.8);
  auto v = auditor.evaluate(audit_request(Persona::Polite));
  EXPECT_EQ(v.status, AuditStatus::Poor);
  ASSERT_EQ(v.pathologies.size(), 1u);
  EXPECT_EQ(v.pathologies[0].kind, PathologyKind::Sycophancy);
}

TEST(LlmAuditor, WeakPillarsMapToPathologies) {
  FakeEndpoint ep(always(
      "logical=0.9 evidential=0.3 alternatives=0.9 causal_alignment=0.9 "
      "verdict=POOR issues=none"));
  LlmAuditor auditor(ep.config(), 0.8);
  auto v = auditor.evaluate(audit_request(Persona::Authoritative));
  EXPECT_EQ(v.status, AuditStatus::Poor);
  ASSERT_EQ(v.pathologies.size(), 1u);
  EXPECT_EQ(v.pathologies[0].kind, PathologyKind::UnsupportedClaim);
  // No critique offered, so the weakest pillar names the gap.
  EXPECT_NE(v.critique.find("evidential"), std::string::npos);
}

TEST(LlmAuditor, RefusalPassesThrough) {
  FakeEndpoint ep(always(
      "logical=0.5 evidential=0.5 alternatives=0.5 causal_alignment=0.5 "
      "verdict=REFUSAL issues=none critique=the evidence cannot settle this"));
  LlmAuditor auditor(ep.config(), 0.8);
  auto v = auditor.evaluate(audit_request(Persona::Polite));
  EXPECT_EQ(v.status, AuditStatus::Refusal);
}

TEST(LlmAuditor, MissingPillarIsAParseError) {
  FakeEndpoint ep(always("logical=0.9 evidential=0.9 causal_alignment=0.9 verdict=GOOD"));
  LlmAuditor auditor(ep.config(), 0.8);
  EXPECT_THROW(auditor.evaluate(audit_request(Persona::Polite)), ParseError);
}

TEST(LlmAuditor, PersonaPicksThePromptAndPayloadStaysBlind) {
  std::string system_msg, user_msg;
  FakeEndpoint ep([&](int, const httplib::Request& req, httplib::Response& res) {
    auto j = nlohmann::json::parse(req.body);
    system_msg = j["messages"][0]["content"];
    user_msg = j["messages"][1]["content"];
    res.set_content(chat_body("logical=1 evidential=1 alternatives=1 "
                              "causal_alignment=1 verdict=GOOD issues=none"),
                    "application/json");
  });
  LlmAuditor auditor(ep.config(), 0.8);

  auditor.evaluate(audit_request(Persona::Polite));
  EXPECT_NE(system_msg.find("courteous"), std::string::npos);
  EXPECT_NE(user_msg.find("required_pillars"), std::string::npos);
  EXPECT_EQ(user_msg.find("answer_key"), std::string::npos);
  EXPECT_EQ(user_msg.find("ground_truth"), std::string::npos);

  auditor.evaluate(audit_request(Persona::Authoritative));
  EXPECT_NE(system_msg.find("strict auditor"), std::string::npos);
}

}  // namespace
}  // namespace raudit::backends
