#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "semlock/corpus.hpp"
#include "semlock/service.hpp"
#include "semlock/strength.hpp"

using namespace semlock;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("semlock_service_" + name);
  fs::remove_all(dir);
  return dir;
}

struct FakeClock {
  std::chrono::system_clock::time_point now{std::chrono::seconds(1'700'000'000)};
};

}  // namespace

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceConfig cfg;
    cfg.data_dir = fresh_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    service_ = std::make_unique<AuthService>(cfg, [this] { return clock_.now; });
  }

  json call(const char* method, const char* path, const json& body, int want_status) {
    const auto r = service_->handle(method, path, body.is_null() ? "" : body.dump());
    EXPECT_EQ(r.status, want_status) << path << " " << r.body;
    return json::parse(r.body);
  }

  FakeClock clock_;
  std::unique_ptr<AuthService> service_;
};

TEST_F(ServiceTest, Layout) {
  const json j = call("GET", "/api/layout", nullptr, 200);
  EXPECT_EQ(j["cols"], 9);
  EXPECT_EQ(j["rows"], 6);
  ASSERT_EQ(j["icons"].size(), 6u);
  std::set<std::pair<int, int>> cells;
  for (const auto& icon : j["icons"]) cells.insert({icon["col"].get<int>(), icon["row"].get<int>()});
  EXPECT_EQ(cells.size(), 6u);
  EXPECT_EQ(j["snap"]["radius"], 1.25);
  EXPECT_EQ(j["policy"]["max_failures"], 5);
  // round-trips through the layout parser
  const GridSpec g = grid_from_json(j.dump());
  EXPECT_EQ(g.icons().size(), 6u);
}

TEST_F(ServiceTest, EnrollVerifyAndLockout) {
  call("POST", "/api/enroll", {{"user", "u"}, {"canonical", "cup>person:R|board>cup:R"}}, 200);
  EXPECT_EQ(call("POST", "/api/verify", {{"user", "u"}, {"canonical", "cup>person:R|board>cup:R"}}, 200)["ok"],
            true);
  const json wrong = {{"user", "u"}, {"canonical", "sun>car:T|tree>sun:L"}};
  const json first = call("POST", "/api/verify", wrong, 200);
  EXPECT_EQ(first["ok"], false);
  EXPECT_EQ(first["remaining"], 4);
  for (int i = 0; i < 3; ++i) call("POST", "/api/verify", wrong, 200);
  const auto locked = service_->handle("POST", "/api/verify", wrong.dump());
  EXPECT_EQ(locked.status, 423);
  EXPECT_EQ(locked.headers.at("Retry-After"), "30");
  const json lj = json::parse(locked.body);
  EXPECT_EQ(lj["error"], "Locked");
  EXPECT_EQ(lj["retry_after"], 30);
  // no canonical string ever comes back
  EXPECT_EQ(locked.body.find("sun>car"), std::string::npos);

  clock_.now += std::chrono::seconds(31);
  EXPECT_EQ(call("POST", "/api/verify", {{"user", "u"}, {"canonical", "cup>person:R|board>cup:R"}}, 200)["ok"],
            true);
}

TEST_F(ServiceTest, ErrorStatuses) {
  call("POST", "/api/enroll", {{"user", "u"}, {"canonical", "cup>person:R|board>cup:R"}}, 200);
  EXPECT_EQ(call("POST", "/api/enroll", {{"user", "u"}, {"canonical", "cup>person:R|board>cup:R"}}, 409)["error"],
            "DuplicateUser");
  EXPECT_EQ(call("POST", "/api/verify", {{"user", "nobody"}, {"canonical", "cup>person:R"}}, 404)["error"],
            "UnknownUser");
  EXPECT_EQ(call("POST", "/api/verify", {{"user", "u"}, {"canonical", "cup>person"}}, 400)["error"], "ParseError");
  EXPECT_EQ(call("POST", "/api/enroll", {{"user", "v"}, {"canonical", "cup>person:R"}}, 400)["error"],
            "PolicyViolation");
  const auto bad = service_->handle("POST", "/api/enroll", "{not json");
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(service_->handle("GET", "/api/verify", "").status, 405);
  EXPECT_EQ(service_->handle("GET", "/api/nothing", "").status, 404);
}

TEST_F(ServiceTest, SessionTokensAreSingleUse) {
  call("POST", "/api/enroll", {{"user", "u"}, {"canonical", "cup>person:R|board>cup:R"}}, 200);
  const json s = call("POST", "/api/session", {{"technique", "SEMANTIC"}}, 200);
  const std::string token = s["token"];
  EXPECT_EQ(token.size(), 32u);
  const json req = {{"user", "u"}, {"canonical", "cup>person:R|board>cup:R"}, {"token", token}};
  EXPECT_EQ(call("POST", "/api/verify", req, 200)["ok"], true);
  EXPECT_EQ(call("POST", "/api/verify", req, 400)["error"], "InvalidToken");
  EXPECT_NE(call("POST", "/api/session", nullptr, 200)["token"], token);
}

TEST_F(ServiceTest, EventsValidatedAndDeduplicated) {
  const json good1 = {{"pid", "p"}, {"tech", "PIN"}, {"session", "s"}, {"ready", 0}, {"touch", 10},
                      {"done", 90}, {"ok", true}, {"id", "e1"}};
  const json good2 = {{"pid", "p"}, {"tech", "SEMANTIC"}, {"session", "s"}, {"ready", 0}, {"touch", 20},
                      {"done", 70}, {"ok", false}, {"id", "e2"}};
  const json bad = {{"pid", "p"}, {"tech", "PIN"}, {"session", "s"}, {"ready", 50}, {"touch", 10},
                    {"done", 90}, {"ok", true}};
  const json r = call("POST", "/api/events", {{"records", {good1, good2}}}, 200);
  EXPECT_EQ(r["accepted"], 2);
  EXPECT_EQ(r["rejected"], 0);

  const json r2 = call("POST", "/api/events", {{"records", {good1, bad}}}, 200);
  EXPECT_EQ(r2["accepted"], 1);
  EXPECT_EQ(r2["rejected"], 1);
  EXPECT_EQ(r2["rejections"][0]["index"], 1);

  EXPECT_EQ(call("POST", "/api/events", {{"nope", 1}}, 400)["error"], "ParseError");

  const auto log = load_events(service_->event_log_path());
  EXPECT_EQ(log.records.size(), 2u);
  EXPECT_TRUE(log.rejections.empty());
  const auto m = usability_metrics(log.records);
  EXPECT_EQ(m.at(Technique::kPin).attempts, 1u);

  // ids survive a restart
  ServiceConfig cfg = service_->config();
  service_.reset();
  AuthService again(cfg);
  const auto r3 = json::parse(again.handle("POST", "/api/events", json{{"records", {good2}}}.dump()).body);
  EXPECT_EQ(r3["accepted"], 1);
  EXPECT_EQ(load_events(again.event_log_path()).records.size(), 2u);
}

TEST(ServiceConfig, FileAndEnv) {
  const fs::path dir = fresh_dir("config");
  fs::create_directories(dir);
  const fs::path file = dir / "config.json";
  write_file_atomic(file, R"({"snap_radius": 1.0, "lockout": {"max_failures": 3, "lockout_seconds": 60},
                              "port": 9000, "data_dir": "/tmp/x"})");
  ServiceConfig c = load_service_config(file);
  EXPECT_EQ(c.engine.snap_radius, 1.0);
  EXPECT_EQ(c.policy.max_failures, 3);
  EXPECT_EQ(c.policy.lockout, std::chrono::seconds(60));
  EXPECT_EQ(c.policy.min_moves, 2u);
  EXPECT_EQ(c.port, 9000);
  setenv("SEMLOCK_DATA", (dir / "data").c_str(), 1);
  apply_env_overrides(c);
  unsetenv("SEMLOCK_DATA");
  EXPECT_EQ(c.data_dir, dir / "data");
}

TEST(ServiceHttp, LiveRoundTrip) {
  ServiceConfig cfg;
  cfg.data_dir = fresh_dir("live");
  AuthService service(cfg);
  const int port = service.start_background();
  ASSERT_GT(port, 0);
  httplib::Client cli("127.0.0.1", port);
  auto layout = cli.Get("/api/layout");
  ASSERT_TRUE(layout);
  EXPECT_EQ(layout->status, 200);
  EXPECT_EQ(layout->get_header_value("Content-Type"), "application/json");

  auto enroll = cli.Post("/api/enroll", R"({"user":"w","canonical":"cup>person:R|board>cup:R"})",
                         "application/json");
  ASSERT_TRUE(enroll);
  EXPECT_EQ(enroll->status, 200);
  for (int i = 0; i < 4; ++i) {
    cli.Post("/api/verify", R"({"user":"w","canonical":"sun>car:T|tree>sun:L"})", "application/json");
  }
  auto locked = cli.Post("/api/verify", R"({"user":"w","canonical":"sun>car:T|tree>sun:L"})", "application/json");
  ASSERT_TRUE(locked);
  EXPECT_EQ(locked->status, 423);
  EXPECT_EQ(locked->get_header_value("Retry-After"), "30");
  service.stop();
}
