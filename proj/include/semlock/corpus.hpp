#pragma once

// JSON Lines corpora: Stage-1 icon pairs, Stage-2 semantic passwords,
// pattern passwords and login telemetry. Loading validates every line and
// reports rejections instead of dropping them.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semlock/model.hpp"

namespace semlock {

struct PairObservation {
  std::string participant;
  IconId first;
  IconId second;
  std::int64_t session = 0;

  friend bool operator==(const PairObservation&, const PairObservation&) = default;
};

struct PasswordRecord {
  std::string participant;
  SemanticPassword password;

  friend bool operator==(const PasswordRecord&, const PasswordRecord&) = default;
};

inline constexpr std::size_t kMinPatternNodes = 3;

struct PatternRecord {
  std::string participant;
  std::vector<int> nodes;  // 1..9, row-major on a 3 x 3 grid

  friend bool operator==(const PatternRecord&, const PatternRecord&) = default;
};

enum class Technique { kPin, kPattern, kSemantic };

std::string_view technique_name(Technique t) noexcept;
/// "PIN" | "PATTERN" | "SEMANTIC"; throws Error(kParseError).
Technique technique_from_string(std::string_view s);

struct AttemptEvent {
  std::string participant;
  Technique technique = Technique::kSemantic;
  std::string session;
  std::optional<std::int64_t> ready_ms;
  std::optional<std::int64_t> touch_ms;
  std::optional<std::int64_t> done_ms;
  bool success = false;
  std::optional<std::string> id;  // client-supplied, used for deduplication

  friend bool operator==(const AttemptEvent&, const AttemptEvent&) = default;
};

enum class CorpusKind { kPairs, kPasswords, kPatterns, kEvents };

std::string_view corpus_kind_name(CorpusKind kind) noexcept;
CorpusKind corpus_kind_from_string(std::string_view s);

struct Rejection {
  std::size_t line;  // 1-based
  std::string reason;
};

template <typename T>
struct LoadResult {
  std::vector<T> records;
  std::vector<Rejection> rejections;
};

struct LoadOptions {
  /// Throw Error(kMalformedLine) at the first invalid line instead of
  /// reporting it.
  bool strict = false;
};

// Single-record validation. Each throws Error with a human-readable reason.
// `icons` restricts the allowed icon ids when non-null.
PairObservation pair_from_json(std::string_view line, const IconSet* icons);
PasswordRecord password_from_json(std::string_view line, const IconSet& icons);
PatternRecord pattern_from_json(std::string_view line);
AttemptEvent event_from_json(std::string_view line);

/// Checks the invariants that do not depend on the wire format.
void validate_pattern(const PatternRecord& record);
void validate_event(const AttemptEvent& event);

std::string to_json_line(const PairObservation& r);
std::string to_json_line(const PasswordRecord& r);
std::string to_json_line(const PatternRecord& r);
std::string to_json_line(const AttemptEvent& r);

LoadResult<PairObservation> read_pairs(std::istream& in, const IconSet* icons,
                                       LoadOptions options = {});
LoadResult<PasswordRecord> read_passwords(std::istream& in, const IconSet& icons,
                                          LoadOptions options = {});
LoadResult<PatternRecord> read_patterns(std::istream& in, LoadOptions options = {});
LoadResult<AttemptEvent> read_events(std::istream& in, LoadOptions options = {});

/// Path variants; throw Error(kIoFailure) when the file cannot be read.
LoadResult<PairObservation> load_pairs(const std::filesystem::path& path,
                                       const IconSet* icons, LoadOptions options = {});
LoadResult<PasswordRecord> load_passwords(const std::filesystem::path& path,
                                          const IconSet& icons,
                                          LoadOptions options = {});
LoadResult<PatternRecord> load_patterns(const std::filesystem::path& path,
                                        LoadOptions options = {});
LoadResult<AttemptEvent> load_events(const std::filesystem::path& path,
                                     LoadOptions options = {});

template <typename T>
std::string to_jsonl(std::span<const T> records) {
  std::string out;
  for (const T& r : records) {
    out += to_json_line(r);
    out += '\n';
  }
  return out;
}

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Keeps the first occurrence of each (participant, canonical) pair.
std::vector<PasswordRecord> dedupe_per_participant(std::span<const PasswordRecord> records);

// ---------------------------------------------------------------------------
// Seeded synthetic corpora

/// Platform-independent draws on top of mt19937_64 (whose output sequence is
/// fixed by the standard, unlike the std distributions).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1), 53-bit resolution
  std::size_t below(std::size_t n);
  /// Index drawn proportionally to `weights` (all >= 0, positive sum).
  std::size_t weighted(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

struct PasswordProfile {
  std::vector<double> icon_weights;        // per icon ordinal
  std::array<double, 4> side_weights{};    // L, T, R, B
  std::map<std::size_t, double> length_weights{{2, 1.0}};
  std::size_t record_count = 0;
  std::size_t passwords_per_participant = 10;

  static PasswordProfile uniform(std::size_t icons, std::size_t count);
  /// Uniform icons; sides lean toward TOP and RIGHT.
  static PasswordProfile paper_like(std::size_t icons, std::size_t count);
};

/// Throws Error(kInvalidProfile) for non-positive or non-finite weights.
void validate_profile(const PasswordProfile& profile, const IconSet& icons);

/// Each move draws its moved icon by icon weight, its anchor by icon weight
/// among the remaining icons and its side by side weight.
std::vector<PasswordRecord> synthesize_passwords(std::uint64_t seed,
                                                 const PasswordProfile& profile,
                                                 const IconSet& icons);

struct PatternProfile {
  std::array<double, 9> start_weights{};
  std::map<std::size_t, double> length_weights;  // lengths 3..9
  std::size_t record_count = 0;
  std::size_t patterns_per_participant = 10;

  static PatternProfile uniform(std::size_t count);
  /// Top-left start node with weight 0.437, the rest shared evenly.
  static PatternProfile top_left_biased(std::size_t count);
};

/// Start node by start weight, then uniformly among unvisited nodes.
std::vector<PatternRecord> synthesize_patterns(std::uint64_t seed,
                                               const PatternProfile& profile);

struct PairProfile {
  std::size_t icon_count = 40;
  std::size_t group_size = 4;       // icons in the same group read as related
  double within_group = 0.75;       // probability a pair is drawn within a group
  std::size_t record_count = 0;
  std::size_t pairs_per_participant = 10;
};

IconSet stage1_icons(std::size_t count);

std::vector<PairObservation> synthesize_pairs(std::uint64_t seed,
                                              const PairProfile& profile);

struct EventProfile {
  std::size_t record_count = 0;
  std::size_t participants = 10;
};

std::vector<AttemptEvent> synthesize_events(std::uint64_t seed,
                                            const EventProfile& profile);

}  // namespace semlock
