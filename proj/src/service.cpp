#include "semlock/service.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "semlock/corpus.hpp"
#include "semlock/error.hpp"

namespace semlock {

using nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& body) {
  return {status, body.dump(), {}};
}

HttpResponse error_response(int status, std::string_view code, std::string_view detail) {
  return json_response(status, {{"error", code}, {"detail", detail}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownUser: return 404;
    case ErrorCode::kDuplicateUser: return 409;
    case ErrorCode::kIoFailure: return 500;
    default: return 400;
  }
}

json parse_body(std::string_view body) {
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::kParseError, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed JSON body: ") + e.what());
  }
}

std::string required_string(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::kParseError, std::string("field '") + name + "' must be a string");
  }
  return it->get<std::string>();
}

std::string random_token() {
  Salt bytes = random_salt();  // 128 bits
  return to_hex(bytes);
}

}  // namespace

// ---------------------------------------------------------------------------
// Layout and config documents

std::string grid_to_json(const GridSpec& grid, int indent) {
  json j;
  j["cols"] = grid.cols();
  j["rows"] = grid.rows();
  json icons = json::array();
  for (std::size_t i = 0; i < grid.icons().size(); ++i) {
    icons.push_back({{"id", grid.icons().at(i).str()},
                     {"ordinal", i},
                     {"col", grid.placement()[i].col},
                     {"row", grid.placement()[i].row}});
  }
  j["icons"] = std::move(icons);
  return j.dump(indent);
}

namespace {

GridSpec grid_from_value(const json& j) {
  std::vector<IconId> ids;
  std::vector<Cell> cells;
  for (const json& icon : j.at("icons")) {
    ids.emplace_back(icon.at("id").get<std::string>());
    cells.push_back({icon.at("col").get<int>(), icon.at("row").get<int>()});
  }
  return GridSpec(j.at("cols").get<int>(), j.at("rows").get<int>(), IconSet(std::move(ids)),
                  std::move(cells));
}

}  // namespace

GridSpec grid_from_json(std::string_view text) {
  try {
    return grid_from_value(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("layout JSON: ") + e.what());
  }
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  ServiceConfig config;
  try {
    const json j = json::parse(read_file(path));
    if (j.contains("grid")) config.grid = grid_from_value(j["grid"]);
    if (j.contains("snap_radius")) config.engine.snap_radius = j["snap_radius"].get<double>();
    if (j.contains("lockout")) {
      const json& l = j["lockout"];
      config.policy.min_moves = l.value("min_moves", config.policy.min_moves);
      config.policy.max_failures = l.value("max_failures", config.policy.max_failures);
      config.policy.lockout =
          std::chrono::seconds(l.value("lockout_seconds", config.policy.lockout.count()));
    }
    if (j.contains("data_dir")) config.data_dir = j["data_dir"].get<std::string>();
    if (j.contains("bind")) config.bind = j["bind"].get<std::string>();
    if (j.contains("port")) config.port = j["port"].get<int>();
    if (j.contains("static_dir")) config.static_dir = j["static_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, "config " + path.string() + ": " + e.what());
  }
  return config;
}

void apply_env_overrides(ServiceConfig& config) {
  if (const char* dir = std::getenv("SEMLOCK_DATA"); dir != nullptr && *dir != '\0') {
    config.data_dir = dir;
  }
}

// ---------------------------------------------------------------------------

AuthService::AuthService(ServiceConfig config, Clock clock)
    : config_(std::move(config)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::system_clock::now(); })),
      store_(config_.data_dir / "credentials.jsonl", config_.policy, clock_) {
  std::filesystem::create_directories(config_.data_dir);
  std::ifstream log(event_log_path());
  std::string line;
  while (std::getline(log, line)) {
    try {
      const AttemptEvent e = event_from_json(line);
      if (e.id) seen_event_ids_.insert(*e.id);
    } catch (const Error&) {
      // Only valid records are ever appended; ignore torn trailing lines.
    }
  }
}

AuthService::~AuthService() { stop(); }

HttpResponse AuthService::handle(std::string_view method, std::string_view path,
                                 std::string_view body) {
  try {
    if (path == "/api/layout") {
      if (method != "GET") return error_response(405, "MethodNotAllowed", "use GET");
      return layout();
    }
    if (method != "POST") {
      if (path == "/api/session" || path == "/api/enroll" || path == "/api/verify" ||
          path == "/api/events") {
        return error_response(405, "MethodNotAllowed", "use POST");
      }
      return error_response(404, "NotFound", "no such endpoint");
    }
    if (path == "/api/session") return open_session(body);
    if (path == "/api/enroll") return enroll(body);
    if (path == "/api/verify") return verify(body);
    if (path == "/api/events") return events(body);
    return error_response(404, "NotFound", "no such endpoint");
  } catch (const Error& e) {
    return error_response(status_for(e.code()), error_code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

HttpResponse AuthService::layout() const {
  json j = json::parse(grid_to_json(config_.grid));
  j["snap"] = {{"radius", config_.engine.snap_radius},
               {"metric", "euclidean"},
               {"tie_break", {"anchor_ordinal", "side"}},
               {"side_order", {"L", "T", "R", "B"}}};
  j["policy"] = {{"min_moves", config_.policy.min_moves},
                 {"max_failures", config_.policy.max_failures},
                 {"lockout_seconds", config_.policy.lockout.count()}};
  return json_response(200, j);
}

HttpResponse AuthService::open_session(std::string_view body) {
  std::string technique = "SEMANTIC";
  if (!body.empty()) {
    const json j = parse_body(body);
    if (j.contains("technique")) technique = required_string(j, "technique");
  }
  technique_from_string(technique);
  const std::string token = random_token();
  const auto issued = std::chrono::duration_cast<std::chrono::milliseconds>(
                          clock_().time_since_epoch())
                          .count();
  {
    std::lock_guard lock(tokens_mu_);
    open_tokens_.emplace(token, technique);
  }
  return json_response(200, {{"token", token}, {"issued_at", issued}, {"technique", technique}});
}

HttpResponse AuthService::enroll(std::string_view body) {
  const json j = parse_body(body);
  const std::string user = required_string(j, "user");
  const SemanticPassword password =
      parse_canonical(required_string(j, "canonical"), config_.grid.icons());
  store_.enroll(user, password);
  return json_response(200, {{"ok", true}});
}

HttpResponse AuthService::verify(std::string_view body) {
  const json j = parse_body(body);
  const std::string user = required_string(j, "user");
  if (j.contains("token")) {
    const std::string token = required_string(j, "token");
    std::lock_guard lock(tokens_mu_);
    if (open_tokens_.erase(token) == 0) {
      return error_response(400, "InvalidToken", "attempt token unknown or already used");
    }
  }
  const SemanticPassword attempt =
      parse_canonical(required_string(j, "canonical"), config_.grid.icons());
  const VerifyResult r = store_.verify(user, attempt);
  switch (r.outcome) {
    case VerifyOutcome::kAccepted:
      return json_response(200, {{"ok", true}, {"locked", false}, {"remaining", r.remaining}});
    case VerifyOutcome::kRejected:
      return json_response(200, {{"ok", false}, {"locked", false}, {"remaining", r.remaining}});
    case VerifyOutcome::kLocked: {
      HttpResponse resp = json_response(
          423, {{"error", "Locked"},
                {"detail", "too many failed attempts"},
                {"ok", false},
                {"locked", true},
                {"remaining", 0},
                {"retry_after", r.retry_after.count()}});
      resp.headers["Retry-After"] = std::to_string(r.retry_after.count());
      return resp;
    }
  }
  return error_response(500, "Internal", "unreachable");
}

HttpResponse AuthService::events(std::string_view body) {
  const json j = parse_body(body);
  auto it = j.find("records");
  if (it == j.end() || !it->is_array()) {
    return error_response(400, "ParseError", "body must be {\"records\": [...]}");
  }
  std::size_t accepted = 0;
  json rejections = json::array();
  std::string appended;
  std::lock_guard lock(events_mu_);
  std::set<std::string> batch_ids;
  for (std::size_t i = 0; i < it->size(); ++i) {
    try {
      const AttemptEvent e = event_from_json((*it)[i].dump());
      ++accepted;
      if (e.id) {
        if (seen_event_ids_.count(*e.id) != 0 || !batch_ids.insert(*e.id).second) continue;
      }
      appended += to_json_line(e);
      appended += '\n';
    } catch (const Error& e) {
      rejections.push_back({{"index", i}, {"reason", e.what()}});
    }
  }
  if (!appended.empty()) {
    std::ofstream out(event_log_path(), std::ios::app | std::ios::binary);
    out.write(appended.data(), static_cast<std::streamsize>(appended.size()));
    out.flush();
    if (!out) return error_response(500, "IoFailure", "cannot append to the event log");
    seen_event_ids_.insert(batch_ids.begin(), batch_ids.end());
  }
  return json_response(200, {{"accepted", accepted},
                             {"rejected", rejections.size()},
                             {"rejections", rejections}});
}

// ---------------------------------------------------------------------------
// Transport

void AuthService::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, "application/json");
  };
  for (const char* p : {"/api/session", "/api/enroll", "/api/verify", "/api/events"}) {
    server_->Post(p, route);
    server_->Get(p, route);
  }
  server_->Get("/api/layout", route);
  server_->Post("/api/layout", route);
  if (!config_.static_dir.empty() && std::filesystem::is_directory(config_.static_dir)) {
    server_->set_mount_point("/", config_.static_dir.string());
  }
}

bool AuthService::listen() {
  install_routes();
  return server_->listen(config_.bind, config_.port);
}

int AuthService::start_background() {
  install_routes();
  const int port = server_->bind_to_any_port(config_.bind);
  if (port <= 0) throw Error(ErrorCode::kIoFailure, "cannot bind " + config_.bind);
  worker_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void AuthService::stop() {
  if (server_) server_->stop();
  if (worker_ && worker_->joinable()) worker_->join();
  worker_.reset();
}

}  // namespace semlock
