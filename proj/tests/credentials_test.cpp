#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "semlock/credentials.hpp"
#include "semlock/error.hpp"

using namespace semlock;
namespace fs = std::filesystem;

namespace {

struct FakeClock {
  std::chrono::system_clock::time_point now{std::chrono::seconds(1'700'000'000)};
  Clock fn() {
    return [this] { return now; };
  }
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no semlock::Error thrown";
  return ErrorCode::kInvalidArgument;
}

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "semlock_cred_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

const IconSet& icons() {
  static const IconSet set = GridSpec::default_layout().icons();
  return set;
}

SemanticPassword pw(std::string_view s) { return parse_canonical(s, icons()); }

const char* kFig1 = "cup>person:R|board>cup:R";

}  // namespace

TEST(Digest, KnownSha256Vector) {
  Salt zero{};
  // sha256 of 16 zero bytes followed by "abc"
  const Digest d = digest_canonical(zero, "abc");
  EXPECT_EQ(to_hex(d).size(), 64u);
  EXPECT_NE(d, digest_canonical(zero, "abd"));
  Salt one{};
  one[0] = 1;
  EXPECT_NE(d, digest_canonical(one, "abc"));
}

TEST(Hex, RoundTrip) {
  const std::vector<std::uint8_t> bytes = {0x00, 0x7f, 0xff, 0x10};
  EXPECT_EQ(to_hex(bytes), "007fff10");
  EXPECT_EQ(from_hex("007FFF10"), bytes);
  EXPECT_THROW(from_hex("abc"), ParseError);
  EXPECT_THROW(from_hex("zz"), ParseError);
}

TEST(CredentialStore, EnrollThenVerify) {
  CredentialStore store;
  store.enroll("alice", pw(kFig1));
  EXPECT_EQ(store.verify("alice", pw(kFig1)).outcome, VerifyOutcome::kAccepted);
  EXPECT_EQ(store.verify("alice", pw("board>cup:R|cup>person:R")).outcome, VerifyOutcome::kRejected);
}

TEST(CredentialStore, PolicyAndDuplicates) {
  CredentialStore store;
  EXPECT_EQ(code_of([&] { store.enroll("bob", pw("cup>person:R")); }), ErrorCode::kPolicyViolation);
  store.enroll("bob", pw(kFig1));
  EXPECT_EQ(code_of([&] { store.enroll("bob", pw(kFig1)); }), ErrorCode::kDuplicateUser);
  EXPECT_EQ(code_of([&] { store.verify("carol", pw(kFig1)); }), ErrorCode::kUnknownUser);
  EXPECT_EQ(code_of([&] { store.enroll("", pw(kFig1)); }), ErrorCode::kInvalidArgument);
}

TEST(CredentialStore, SaltsDiffer) {
  CredentialStore store;
  const auto a = store.enroll("a", pw(kFig1));
  const auto b = store.enroll("b", pw(kFig1));
  EXPECT_NE(a.salt, b.salt);
  EXPECT_NE(a.digest, b.digest);
}

TEST(CredentialStore, LockoutAfterFiveFailures) {
  FakeClock clock;
  CredentialStore store({}, LockoutPolicy{}, clock.fn());
  store.enroll("u", pw(kFig1));
  const auto wrong = pw("sun>car:T|tree>sun:L");
  for (int i = 1; i <= 4; ++i) {
    const auto r = store.verify("u", wrong);
    EXPECT_EQ(r.outcome, VerifyOutcome::kRejected);
    EXPECT_EQ(r.remaining, 5 - i);
  }
  const auto fifth = store.verify("u", wrong);
  EXPECT_EQ(fifth.outcome, VerifyOutcome::kLocked);
  EXPECT_EQ(fifth.retry_after, std::chrono::seconds(30));

  clock.now += std::chrono::seconds(10);
  const auto during = store.verify("u", pw(kFig1));
  EXPECT_EQ(during.outcome, VerifyOutcome::kLocked);
  EXPECT_EQ(during.retry_after, std::chrono::seconds(20));

  clock.now += std::chrono::seconds(20);
  EXPECT_EQ(store.verify("u", pw(kFig1)).outcome, VerifyOutcome::kAccepted);
}

TEST(CredentialStore, SuccessResetsCounter) {
  FakeClock clock;
  CredentialStore store({}, LockoutPolicy{}, clock.fn());
  store.enroll("u", pw(kFig1));
  const auto wrong = pw("sun>car:T|tree>sun:L");
  for (int round = 0; round < 3; ++round) {
    for (int i = 0; i < 4; ++i) EXPECT_EQ(store.verify("u", wrong).outcome, VerifyOutcome::kRejected);
    EXPECT_EQ(store.verify("u", pw(kFig1)).outcome, VerifyOutcome::kAccepted);
  }
}

TEST(CredentialStore, LockoutDisabled) {
  CredentialStore store({}, LockoutPolicy{2, 0, std::chrono::seconds(30)});
  store.enroll("u", pw(kFig1));
  for (int i = 0; i < 20; ++i) {
    const auto r = store.verify("u", pw("sun>car:T|tree>sun:L"));
    EXPECT_EQ(r.outcome, VerifyOutcome::kRejected);
    EXPECT_EQ(r.remaining, -1);
  }
}

TEST(CredentialStore, PersistsWithoutPlaintext) {
  const fs::path file = temp_file("store.jsonl");
  const std::vector<std::string> secrets = {kFig1, "sun>car:T|tree>sun:L", "person>tree:B|car>board:L"};
  {
    CredentialStore store(file);
    for (std::size_t i = 0; i < secrets.size(); ++i) store.enroll("user" + std::to_string(i), pw(secrets[i]));
  }
  std::ifstream in(file);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string contents = buf.str();
  for (const auto& s : secrets) {
    EXPECT_EQ(contents.find(s), std::string::npos);
    // individual moves must not leak either
    EXPECT_EQ(contents.find(s.substr(0, s.find('|'))), std::string::npos);
  }
  EXPECT_NE(contents.find("salt_hex"), std::string::npos);

  CredentialStore reopened(file);
  EXPECT_EQ(reopened.size(), secrets.size());
  EXPECT_EQ(reopened.verify("user1", pw(secrets[1])).outcome, VerifyOutcome::kAccepted);
  EXPECT_EQ(code_of([&] { reopened.enroll("user0", pw(kFig1)); }), ErrorCode::kDuplicateUser);
}

TEST(CredentialStore, LastRecordWins) {
  const fs::path file = temp_file("lrw.jsonl");
  CredentialRecord a{"u", random_salt(), {}, 2, 1};
  a.digest = digest_canonical(a.salt, kFig1);
  CredentialRecord b{"u", random_salt(), {}, 2, 2};
  b.digest = digest_canonical(b.salt, "sun>car:T|tree>sun:L");
  {
    std::ofstream out(file);
    out << record_to_json_line(a) << '\n' << record_to_json_line(b) << '\n';
  }
  CredentialStore store(file);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(store.verify("u", pw("sun>car:T|tree>sun:L")).outcome, VerifyOutcome::kAccepted);
  EXPECT_EQ(store.verify("u", pw(kFig1)).outcome, VerifyOutcome::kRejected);
}

TEST(CredentialRecord, JsonRoundTrip) {
  CredentialRecord r{"someone", random_salt(), {}, 3, 1234};
  r.digest = digest_canonical(r.salt, kFig1);
  const auto back = record_from_json_line(record_to_json_line(r));
  EXPECT_EQ(back.user, r.user);
  EXPECT_EQ(back.salt, r.salt);
  EXPECT_EQ(back.digest, r.digest);
  EXPECT_EQ(back.min_moves, 3u);
  EXPECT_EQ(back.created_at, 1234);
  EXPECT_TRUE(back.matches(pw(kFig1)));
}

TEST(CredentialStore, RandomEnrollVerify) {
  CredentialStore store;
  const auto space = enumerate_space(icons(), 2);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto& p = space[rng() % space.size()];
    const std::string user = "r" + std::to_string(i);
    store.enroll(user, p);
    // a fresh SemanticPassword with the same canonical string is interchangeable
    EXPECT_EQ(store.verify(user, parse_canonical(canonicalize(p), icons())).outcome,
              VerifyOutcome::kAccepted);
  }
}

TEST(CredentialStore, ExhaustiveSweepAcceptsOne) {
  CredentialStore store;
  const auto rec = store.enroll("sweep", pw(kFig1));
  std::size_t accepted = 0;
  for (const auto& p : enumerate_space(icons(), 2)) accepted += rec.matches(p) ? 1 : 0;
  EXPECT_EQ(accepted, 1u);
}
