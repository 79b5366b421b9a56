#pragma once

// JSON-over-HTTP facade: layout, enrollment, verification and telemetry.

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <string>
#include <string_view>
#include <unordered_map>

#include "semlock/credentials.hpp"
#include "semlock/engine.hpp"
#include "semlock/model.hpp"

namespace httplib {
class Server;
}

namespace semlock {

struct ServiceConfig {
  GridSpec grid = GridSpec::default_layout();
  LockoutPolicy policy;
  EngineConfig engine;
  std::filesystem::path data_dir = "semlock-data";
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::filesystem::path static_dir;  // optional web bundle
};

/// Layout document served at /api/layout and accepted as `--layout`.
std::string grid_to_json(const GridSpec& grid, int indent = -1);
/// Accepts {"cols", "rows", "icons": [{"id", "col", "row"}, ...]}.
GridSpec grid_from_json(std::string_view text);

/// JSON config: {"grid": {...}, "snap_radius", "lockout": {"min_moves",
/// "max_failures", "lockout_seconds"}, "data_dir", "bind", "port",
/// "static_dir"}. Every key is optional.
ServiceConfig load_service_config(const std::filesystem::path& path);
/// SEMLOCK_DATA, when set, replaces the data directory.
void apply_env_overrides(ServiceConfig& config);

struct HttpResponse {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

class AuthService {
 public:
  explicit AuthService(ServiceConfig config, Clock clock = {});
  ~AuthService();

  AuthService(const AuthService&) = delete;
  AuthService& operator=(const AuthService&) = delete;

  /// Routes one request. Never throws; failures become error bodies
  /// {"error": code, "detail": text}.
  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  /// Binds and serves until stop(). Returns false if the bind fails.
  bool listen();
  /// Binds to an ephemeral port and serves on a background thread;
  /// returns the port.
  int start_background();
  void stop();

  const ServiceConfig& config() const noexcept { return config_; }
  std::filesystem::path event_log_path() const { return config_.data_dir / "events.jsonl"; }
  std::filesystem::path credential_path() const { return config_.data_dir / "credentials.jsonl"; }

 private:
  HttpResponse layout() const;
  HttpResponse open_session(std::string_view body);
  HttpResponse enroll(std::string_view body);
  HttpResponse verify(std::string_view body);
  HttpResponse events(std::string_view body);
  void install_routes();

  ServiceConfig config_;
  Clock clock_;
  CredentialStore store_;

  std::mutex events_mu_;
  std::set<std::string> seen_event_ids_;

  std::mutex tokens_mu_;
  std::unordered_map<std::string, std::string> open_tokens_;  // token -> technique

  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<std::thread> worker_;
};

}  // namespace semlock
