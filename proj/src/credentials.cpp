#include "semlock/credentials.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <json.hpp>

#include "semlock/error.hpp"

namespace semlock {

namespace {

constexpr std::size_t kMaxUserLength = 128;

void validate_user(const std::string& user) {
  if (user.empty() || user.size() > kMaxUserLength) {
    throw Error(ErrorCode::kInvalidArgument, "user name must be 1-128 bytes");
  }
  for (unsigned char c : user) {
    if (c < 0x20 || c == 0x7f) {
      throw Error(ErrorCode::kInvalidArgument, "user name contains control characters");
    }
  }
}

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(std::string_view hex, const char* what) {
  const auto bytes = from_hex(hex);
  if (bytes.size() != N) {
    throw Error(ErrorCode::kParseError, std::string(what) + " has wrong length");
  }
  std::array<std::uint8_t, N> out{};
  std::copy(bytes.begin(), bytes.end(), out.begin());
  return out;
}

}  // namespace

Digest digest_canonical(const Salt& salt, std::string_view canonical) {
  Digest out{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw Error(ErrorCode::kIoFailure, "EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, salt.data(), salt.size()) == 1 &&
                  EVP_DigestUpdate(ctx, canonical.data(), canonical.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, out.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok || len != out.size()) {
    throw Error(ErrorCode::kIoFailure, "SHA-256 computation failed");
  }
  return out;
}

Salt random_salt() {
  Salt salt{};
  if (RAND_bytes(salt.data(), static_cast<int>(salt.size())) != 1) {
    throw Error(ErrorCode::kIoFailure, "RAND_bytes failed");
  }
  return salt;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out += kDigits[b >> 4];
    out += kDigits[b & 0x0f];
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  auto nibble = [&](char c, std::size_t at) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw ParseError(at, "invalid hex digit");
  };
  if (hex.size() % 2 != 0) throw ParseError(hex.size(), "odd-length hex string");
  std::vector<std::uint8_t> out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(nibble(hex[i], i) << 4 |
                                            nibble(hex[i + 1], i + 1)));
  }
  return out;
}

bool CredentialRecord::matches(const SemanticPassword& attempt) const {
  const Digest d = digest_canonical(salt, canonicalize(attempt));
  return CRYPTO_memcmp(d.data(), digest.data(), d.size()) == 0;
}

std::string record_to_json_line(const CredentialRecord& record) {
  nlohmann::json j;
  j["user"] = record.user;
  j["salt_hex"] = to_hex(record.salt);
  j["digest_hex"] = to_hex(record.digest);
  j["min_moves"] = record.min_moves;
  j["created_at"] = record.created_at;
  return j.dump();
}

CredentialRecord record_from_json_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    CredentialRecord r;
    r.user = j.at("user").get<std::string>();
    r.salt = fixed_from_hex<16>(j.at("salt_hex").get<std::string>(), "salt_hex");
    r.digest = fixed_from_hex<32>(j.at("digest_hex").get<std::string>(), "digest_hex");
    r.min_moves = j.at("min_moves").get<std::size_t>();
    r.created_at = j.at("created_at").get<std::int64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("credential record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

CredentialStore::CredentialStore(std::filesystem::path file, LockoutPolicy policy,
                                 Clock clock)
    : file_(std::move(file)), policy_(policy), clock_(std::move(clock)) {
  if (!clock_) clock_ = [] { return std::chrono::system_clock::now(); };
  if (policy_.min_moves < 1 || policy_.max_failures < 0 ||
      policy_.lockout.count() < 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid lockout policy");
  }
  if (!file_.empty()) load();
}

void CredentialStore::load() {
  std::ifstream in(file_);
  if (!in) {
    if (!std::filesystem::exists(file_)) return;
    throw Error(ErrorCode::kIoFailure, "cannot read " + file_.string());
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      CredentialRecord r = record_from_json_line(line);
      records_[r.user] = std::move(r);
    } catch (const Error& e) {
      throw Error(ErrorCode::kIoFailure, file_.string() + ":" +
                                             std::to_string(line_no) + ": " + e.what());
    }
  }
}

void CredentialStore::append(const CredentialRecord& record) {
  if (file_.empty()) return;
  if (file_.has_parent_path()) {
    std::filesystem::create_directories(file_.parent_path());
  }
  std::ofstream out(file_, std::ios::app | std::ios::binary);
  const std::string line = record_to_json_line(record) + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot append to " + file_.string());
}

CredentialRecord CredentialStore::enroll(const std::string& user,
                                         const SemanticPassword& password) {
  validate_user(user);
  if (password.size() < policy_.min_moves) {
    throw Error(ErrorCode::kPolicyViolation,
                "password has " + std::to_string(password.size()) +
                    " moves; policy requires at least " +
                    std::to_string(policy_.min_moves));
  }
  std::lock_guard lock(mu_);
  if (records_.count(user) != 0) {
    throw Error(ErrorCode::kDuplicateUser, "user '" + user + "' already enrolled");
  }
  CredentialRecord record;
  record.user = user;
  // Salts are unique per record.
  do {
    record.salt = random_salt();
  } while (std::any_of(records_.begin(), records_.end(), [&](const auto& kv) {
    return kv.second.salt == record.salt;
  }));
  record.digest = digest_canonical(record.salt, canonicalize(password));
  record.min_moves = policy_.min_moves;
  record.created_at = std::chrono::duration_cast<std::chrono::seconds>(
                          clock_().time_since_epoch())
                          .count();
  append(record);
  records_.emplace(user, record);
  counters_.erase(user);
  return record;
}

VerifyResult CredentialStore::verify(const std::string& user,
                                     const SemanticPassword& attempt) {
  std::lock_guard lock(mu_);
  auto it = records_.find(user);
  if (it == records_.end()) {
    throw Error(ErrorCode::kUnknownUser, "user '" + user + "' is not enrolled");
  }
  Counter& counter = counters_[user];
  const auto now = clock_();
  const bool lockout_enabled = policy_.max_failures > 0;
  if (counter.locked_until) {
    if (now < *counter.locked_until) {
      const auto left = *counter.locked_until - now;
      auto secs = std::chrono::ceil<std::chrono::seconds>(left);
      return {VerifyOutcome::kLocked, 0, std::max(secs, std::chrono::seconds{1})};
    }
    counter = Counter{};
  }
  if (it->second.matches(attempt)) {
    counter = Counter{};
    return {VerifyOutcome::kAccepted, lockout_enabled ? policy_.max_failures : -1};
  }
  ++counter.consecutive_failures;
  if (!lockout_enabled) return {VerifyOutcome::kRejected, -1};
  if (counter.consecutive_failures >= policy_.max_failures) {
    counter.locked_until = now + policy_.lockout;
    return {VerifyOutcome::kLocked, 0, policy_.lockout};
  }
  return {VerifyOutcome::kRejected, policy_.max_failures - counter.consecutive_failures};
}

std::optional<CredentialRecord> CredentialStore::find(const std::string& user) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(user);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::size_t CredentialStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

}  // namespace semlock
