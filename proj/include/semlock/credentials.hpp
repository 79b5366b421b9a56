#pragma once

// Enrollment and verification of semantic passwords. Stores only a salted
// SHA-256 digest of the canonical string.

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include "semlock/model.hpp"

namespace semlock {

using Salt = std::array<std::uint8_t, 16>;
using Digest = std::array<std::uint8_t, 32>;

struct LockoutPolicy {
  std::size_t min_moves = 2;
  int max_failures = 5;  // 0 disables lockout
  std::chrono::seconds lockout{30};
};

struct CredentialRecord {
  std::string user;
  Salt salt{};
  Digest digest{};
  std::size_t min_moves = 2;
  std::int64_t created_at = 0;  // unix seconds

  /// Constant-time comparison of the digest of `attempt` against the record.
  bool matches(const SemanticPassword& attempt) const;
};

Digest digest_canonical(const Salt& salt, std::string_view canonical);
Salt random_salt();

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Throws Error(kParseError) on odd length or non-hex characters.
std::vector<std::uint8_t> from_hex(std::string_view hex);

enum class VerifyOutcome { kAccepted, kRejected, kLocked };

struct VerifyResult {
  VerifyOutcome outcome;
  int remaining;  // attempts left before lockout; -1 when lockout is disabled
  std::chrono::seconds retry_after{0};  // nonzero only when locked
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

/// Credential store backed by an append-only JSON Lines file where the last
/// record for a user wins. An empty path keeps everything in memory.
/// Failure counters are in-memory only.
class CredentialStore {
 public:
  explicit CredentialStore(std::filesystem::path file = {},
                           LockoutPolicy policy = {}, Clock clock = {});

  /// Throws kPolicyViolation, kDuplicateUser, kInvalidArgument, kIoFailure.
  CredentialRecord enroll(const std::string& user,
                          const SemanticPassword& password);

  /// Throws kUnknownUser.
  VerifyResult verify(const std::string& user, const SemanticPassword& attempt);

  std::optional<CredentialRecord> find(const std::string& user) const;
  std::size_t size() const;
  const LockoutPolicy& policy() const noexcept { return policy_; }

 private:
  struct Counter {
    int consecutive_failures = 0;
    std::optional<std::chrono::system_clock::time_point> locked_until;
  };

  void load();
  void append(const CredentialRecord& record);

  std::filesystem::path file_;
  LockoutPolicy policy_;
  Clock clock_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, CredentialRecord> records_;
  std::unordered_map<std::string, Counter> counters_;
};

std::string record_to_json_line(const CredentialRecord& record);
CredentialRecord record_from_json_line(std::string_view line);

}  // namespace semlock
