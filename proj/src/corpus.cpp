#include "semlock/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "semlock/error.hpp"

namespace semlock {

using nlohmann::json;

namespace {

json parse_line(std::string_view line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedLine, std::string("malformed JSON: ") + e.what());
  }
}

const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedLine, "record is not a JSON object");
  auto it = j.find(name);
  if (it == j.end()) {
    throw Error(ErrorCode::kMalformedLine, std::string("missing field '") + name + "'");
  }
  return *it;
}

std::string opaque_id(const json& j, const char* name) {
  const json& v = field(j, name);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw Error(ErrorCode::kMalformedLine, std::string("field '") + name +
                                             "' must be a string or integer");
}

std::string string_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_string()) {
    throw Error(ErrorCode::kMalformedLine, std::string("field '") + name + "' must be a string");
  }
  return v.get<std::string>();
}

std::int64_t int_field(const json& v, const char* name) {
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::kMalformedLine, std::string("field '") + name + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::optional<std::int64_t> optional_time(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return int_field(*it, name);
}

IconId checked_icon(const std::string& id, const IconSet* icons) {
  if (!IconId::is_valid(id)) {
    throw Error(ErrorCode::kInvalidIcon, "invalid icon id '" + id + "'");
  }
  if (icons != nullptr && !icons->contains(id)) {
    throw Error(ErrorCode::kUnknownIcon, "icon '" + id + "' is not in the icon set");
  }
  return IconId(id);
}

template <typename T, typename ParseFn>
LoadResult<T> read_lines(std::istream& in, LoadOptions options, ParseFn parse) {
  LoadResult<T> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      result.records.push_back(parse(line));
    } catch (const Error& e) {
      if (options.strict) {
        throw Error(ErrorCode::kMalformedLine,
                    "line " + std::to_string(line_no) + ": " + e.what());
      }
      result.rejections.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw Error(ErrorCode::kIoFailure, "read failure");
  return result;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return in;
}

std::string participant_id(std::size_t index, std::size_t per_participant) {
  std::ostringstream os;
  os << 'p' << std::setw(4) << std::setfill('0')
     << index / std::max<std::size_t>(per_participant, 1);
  return os.str();
}

bool positive_finite(double w) { return std::isfinite(w) && w > 0.0; }

std::size_t draw_length(SeededRng& rng, const std::map<std::size_t, double>& weights) {
  std::vector<std::size_t> lengths;
  std::vector<double> w;
  for (const auto& [len, weight] : weights) {
    lengths.push_back(len);
    w.push_back(weight);
  }
  return lengths[rng.weighted(w)];
}

}  // namespace

std::string_view technique_name(Technique t) noexcept {
  switch (t) {
    case Technique::kPin: return "PIN";
    case Technique::kPattern: return "PATTERN";
    case Technique::kSemantic: return "SEMANTIC";
  }
  return "?";
}

Technique technique_from_string(std::string_view s) {
  if (s == "PIN") return Technique::kPin;
  if (s == "PATTERN") return Technique::kPattern;
  if (s == "SEMANTIC") return Technique::kSemantic;
  throw Error(ErrorCode::kParseError, "unknown technique '" + std::string(s) + "'");
}

std::string_view corpus_kind_name(CorpusKind kind) noexcept {
  switch (kind) {
    case CorpusKind::kPairs: return "pairs";
    case CorpusKind::kPasswords: return "passwords";
    case CorpusKind::kPatterns: return "patterns";
    case CorpusKind::kEvents: return "events";
  }
  return "?";
}

CorpusKind corpus_kind_from_string(std::string_view s) {
  for (CorpusKind k : {CorpusKind::kPairs, CorpusKind::kPasswords,
                       CorpusKind::kPatterns, CorpusKind::kEvents}) {
    if (s == corpus_kind_name(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown corpus kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Record parsing and validation

PairObservation pair_from_json(std::string_view line, const IconSet* icons) {
  const json j = parse_line(line);
  PairObservation r{opaque_id(j, "pid"), checked_icon(string_field(j, "first"), icons),
                    checked_icon(string_field(j, "second"), icons),
                    int_field(field(j, "session"), "session")};
  if (r.first == r.second) {
    throw Error(ErrorCode::kInvalidMove, "pair repeats icon '" + r.first.str() + "'");
  }
  return r;
}

PasswordRecord password_from_json(std::string_view line, const IconSet& icons) {
  const json j = parse_line(line);
  std::string pid = opaque_id(j, "pid");
  return PasswordRecord{std::move(pid), parse_canonical(string_field(j, "canonical"), icons)};
}

void validate_pattern(const PatternRecord& record) {
  if (record.nodes.size() < kMinPatternNodes) {
    throw Error(ErrorCode::kInvalidArgument,
                "pattern has " + std::to_string(record.nodes.size()) +
                    " nodes; minimum length is 3");
  }
  std::array<bool, 10> seen{};
  for (int node : record.nodes) {
    if (node < 1 || node > 9) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pattern node " + std::to_string(node) + " outside 1..9");
    }
    if (seen[node]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pattern repeats node " + std::to_string(node));
    }
    seen[node] = true;
  }
}

PatternRecord pattern_from_json(std::string_view line) {
  const json j = parse_line(line);
  PatternRecord r;
  r.participant = opaque_id(j, "pid");
  const json& nodes = field(j, "nodes");
  if (!nodes.is_array()) throw Error(ErrorCode::kMalformedLine, "field 'nodes' must be an array");
  for (const json& n : nodes) r.nodes.push_back(static_cast<int>(int_field(n, "nodes")));
  validate_pattern(r);
  return r;
}

void validate_event(const AttemptEvent& e) {
  if (e.ready_ms && e.touch_ms && *e.touch_ms < *e.ready_ms) {
    throw Error(ErrorCode::kInvalidArgument, "first touch precedes ready time");
  }
  if (e.touch_ms && e.done_ms && *e.done_ms < *e.touch_ms) {
    throw Error(ErrorCode::kInvalidArgument, "completion precedes first touch");
  }
  if (e.ready_ms && e.done_ms && *e.done_ms < *e.ready_ms) {
    throw Error(ErrorCode::kInvalidArgument, "completion precedes ready time");
  }
}

AttemptEvent event_from_json(std::string_view line) {
  const json j = parse_line(line);
  AttemptEvent e;
  e.participant = opaque_id(j, "pid");
  try {
    e.technique = technique_from_string(string_field(j, "tech"));
  } catch (const Error& err) {
    throw Error(ErrorCode::kMalformedLine, err.what());
  }
  e.session = opaque_id(j, "session");
  e.ready_ms = optional_time(j, "ready");
  e.touch_ms = optional_time(j, "touch");
  e.done_ms = optional_time(j, "done");
  const json& ok = field(j, "ok");
  if (!ok.is_boolean()) throw Error(ErrorCode::kMalformedLine, "field 'ok' must be a boolean");
  e.success = ok.get<bool>();
  if (auto it = j.find("id"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::kMalformedLine, "field 'id' must be a string");
    e.id = it->get<std::string>();
  }
  validate_event(e);
  return e;
}

std::string to_json_line(const PairObservation& r) {
  json j;
  j["pid"] = r.participant;
  j["first"] = r.first.str();
  j["second"] = r.second.str();
  j["session"] = r.session;
  return j.dump();
}

std::string to_json_line(const PasswordRecord& r) {
  json j;
  j["pid"] = r.participant;
  j["canonical"] = canonicalize(r.password);
  return j.dump();
}

std::string to_json_line(const PatternRecord& r) {
  json j;
  j["pid"] = r.participant;
  j["nodes"] = r.nodes;
  return j.dump();
}

std::string to_json_line(const AttemptEvent& r) {
  json j;
  j["pid"] = r.participant;
  j["tech"] = technique_name(r.technique);
  j["session"] = r.session;
  if (r.ready_ms) j["ready"] = *r.ready_ms;
  if (r.touch_ms) j["touch"] = *r.touch_ms;
  if (r.done_ms) j["done"] = *r.done_ms;
  j["ok"] = r.success;
  if (r.id) j["id"] = *r.id;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Loaders

LoadResult<PairObservation> read_pairs(std::istream& in, const IconSet* icons,
                                       LoadOptions options) {
  return read_lines<PairObservation>(
      in, options, [icons](const std::string& l) { return pair_from_json(l, icons); });
}

LoadResult<PasswordRecord> read_passwords(std::istream& in, const IconSet& icons,
                                          LoadOptions options) {
  return read_lines<PasswordRecord>(
      in, options, [&icons](const std::string& l) { return password_from_json(l, icons); });
}

LoadResult<PatternRecord> read_patterns(std::istream& in, LoadOptions options) {
  return read_lines<PatternRecord>(
      in, options, [](const std::string& l) { return pattern_from_json(l); });
}

LoadResult<AttemptEvent> read_events(std::istream& in, LoadOptions options) {
  return read_lines<AttemptEvent>(
      in, options, [](const std::string& l) { return event_from_json(l); });
}

LoadResult<PairObservation> load_pairs(const std::filesystem::path& path,
                                       const IconSet* icons, LoadOptions options) {
  auto in = open_input(path);
  return read_pairs(in, icons, options);
}

LoadResult<PasswordRecord> load_passwords(const std::filesystem::path& path,
                                          const IconSet& icons, LoadOptions options) {
  auto in = open_input(path);
  return read_passwords(in, icons, options);
}

LoadResult<PatternRecord> load_patterns(const std::filesystem::path& path,
                                        LoadOptions options) {
  auto in = open_input(path);
  return read_patterns(in, options);
}

LoadResult<AttemptEvent> load_events(const std::filesystem::path& path,
                                     LoadOptions options) {
  auto in = open_input(path);
  return read_events(in, options);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot rename onto " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<PasswordRecord> dedupe_per_participant(std::span<const PasswordRecord> records) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<PasswordRecord> out;
  for (const PasswordRecord& r : records) {
    if (seen.emplace(r.participant, canonicalize(r.password)).second) out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthesis

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t SeededRng::below(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "below(0)");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

std::size_t SeededRng::weighted(std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::kInvalidProfile, "weights must have a positive finite sum");
  }
  const double target = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

PasswordProfile PasswordProfile::uniform(std::size_t icons, std::size_t count) {
  PasswordProfile p;
  p.icon_weights.assign(icons, 1.0);
  p.side_weights = {1.0, 1.0, 1.0, 1.0};
  p.record_count = count;
  return p;
}

PasswordProfile PasswordProfile::paper_like(std::size_t icons, std::size_t count) {
  PasswordProfile p = uniform(icons, count);
  p.side_weights = {0.22, 0.28, 0.28, 0.22};
  return p;
}

void validate_profile(const PasswordProfile& profile, const IconSet& icons) {
  if (profile.icon_weights.size() != icons.size()) {
    throw Error(ErrorCode::kInvalidProfile, "need one weight per icon");
  }
  if (icons.size() < 2) throw Error(ErrorCode::kInvalidProfile, "need at least 2 icons");
  if (!std::all_of(profile.icon_weights.begin(), profile.icon_weights.end(), positive_finite) ||
      !std::all_of(profile.side_weights.begin(), profile.side_weights.end(), positive_finite)) {
    throw Error(ErrorCode::kInvalidProfile, "weights must be positive and finite");
  }
  if (profile.length_weights.empty()) {
    throw Error(ErrorCode::kInvalidProfile, "length weights are empty");
  }
  for (const auto& [len, w] : profile.length_weights) {
    if (len < 1 || !positive_finite(w)) {
      throw Error(ErrorCode::kInvalidProfile, "length weights need length >= 1 and weight > 0");
    }
  }
}

std::vector<PasswordRecord> synthesize_passwords(std::uint64_t seed,
                                                 const PasswordProfile& profile,
                                                 const IconSet& icons) {
  validate_profile(profile, icons);
  SeededRng rng(seed);
  std::vector<PasswordRecord> out;
  out.reserve(profile.record_count);
  std::vector<double> anchor_weights;
  for (std::size_t i = 0; i < profile.record_count; ++i) {
    const std::size_t len = draw_length(rng, profile.length_weights);
    std::vector<Move> moves;
    moves.reserve(len);
    for (std::size_t m = 0; m < len; ++m) {
      const std::size_t moved = rng.weighted(profile.icon_weights);
      anchor_weights = profile.icon_weights;
      anchor_weights[moved] = 0.0;
      const std::size_t anchor = rng.weighted(anchor_weights);
      const Side side = kAllSides[rng.weighted(profile.side_weights)];
      moves.push_back(Move{icons.at(moved), icons.at(anchor), side});
    }
    out.push_back({participant_id(i, profile.passwords_per_participant),
                   SemanticPassword(std::move(moves))});
  }
  return out;
}

PatternProfile PatternProfile::uniform(std::size_t count) {
  PatternProfile p;
  p.start_weights.fill(1.0);
  for (std::size_t len = 3; len <= 9; ++len) p.length_weights[len] = 1.0;
  p.record_count = count;
  return p;
}

PatternProfile PatternProfile::top_left_biased(std::size_t count) {
  PatternProfile p = uniform(count);
  p.start_weights.fill((1.0 - 0.437) / 8.0);
  p.start_weights[0] = 0.437;
  return p;
}

std::vector<PatternRecord> synthesize_patterns(std::uint64_t seed,
                                               const PatternProfile& profile) {
  if (!std::all_of(profile.start_weights.begin(), profile.start_weights.end(),
                   positive_finite)) {
    throw Error(ErrorCode::kInvalidProfile, "start weights must be positive and finite");
  }
  if (profile.length_weights.empty()) {
    throw Error(ErrorCode::kInvalidProfile, "length weights are empty");
  }
  for (const auto& [len, w] : profile.length_weights) {
    if (len < kMinPatternNodes || len > 9 || !positive_finite(w)) {
      throw Error(ErrorCode::kInvalidProfile, "pattern lengths must be 3..9 with weight > 0");
    }
  }
  SeededRng rng(seed);
  std::vector<PatternRecord> out;
  out.reserve(profile.record_count);
  for (std::size_t i = 0; i < profile.record_count; ++i) {
    const std::size_t len = draw_length(rng, profile.length_weights);
    std::vector<int> remaining = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    PatternRecord r{participant_id(i, profile.patterns_per_participant), {}};
    const int start = static_cast<int>(rng.weighted(profile.start_weights)) + 1;
    r.nodes.push_back(start);
    remaining.erase(std::find(remaining.begin(), remaining.end(), start));
    while (r.nodes.size() < len) {
      const std::size_t pick = rng.below(remaining.size());
      r.nodes.push_back(remaining[pick]);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    out.push_back(std::move(r));
  }
  return out;
}

IconSet stage1_icons(std::size_t count) {
  std::vector<IconId> ids;
  for (std::size_t i = 0; i < count; ++i) {
    std::ostringstream os;
    os << "icon" << std::setw(2) << std::setfill('0') << i;
    ids.emplace_back(os.str());
  }
  return IconSet(std::move(ids));
}

std::vector<PairObservation> synthesize_pairs(std::uint64_t seed,
                                              const PairProfile& profile) {
  if (profile.icon_count < 2 || profile.group_size < 2 ||
      profile.group_size > profile.icon_count || !(profile.within_group >= 0.0) ||
      profile.within_group > 1.0) {
    throw Error(ErrorCode::kInvalidProfile, "invalid pair profile");
  }
  const IconSet icons = stage1_icons(profile.icon_count);
  SeededRng rng(seed);
  std::vector<PairObservation> out;
  out.reserve(profile.record_count);
  const std::size_t per = std::max<std::size_t>(profile.pairs_per_participant, 1);
  for (std::size_t i = 0; i < profile.record_count; ++i) {
    const std::size_t a = rng.below(profile.icon_count);
    std::size_t b;
    const std::size_t group_start = a / profile.group_size * profile.group_size;
    const std::size_t group_end = std::min(group_start + profile.group_size, profile.icon_count);
    if (rng.uniform() < profile.within_group && group_end - group_start >= 2) {
      do {
        b = group_start + rng.below(group_end - group_start);
      } while (b == a);
    } else {
      do {
        b = rng.below(profile.icon_count);
      } while (b == a);
    }
    out.push_back({participant_id(i, per), icons.at(a), icons.at(b),
                   static_cast<std::int64_t>(1 + (i / per) % 3)});
  }
  return out;
}

std::vector<AttemptEvent> synthesize_events(std::uint64_t seed,
                                            const EventProfile& profile) {
  struct Shape {
    Technique tech;
    std::int64_t delay_lo, delay_hi, speed_lo, speed_hi;
    double success;
  };
  static constexpr std::array<Shape, 3> kShapes = {{
      {Technique::kPin, 400, 1600, 900, 2200, 0.93},
      {Technique::kPattern, 400, 1800, 600, 1900, 0.88},
      {Technique::kSemantic, 500, 2200, 700, 2000, 0.91},
  }};
  if (profile.participants == 0) throw Error(ErrorCode::kInvalidProfile, "need participants");
  SeededRng rng(seed);
  std::vector<AttemptEvent> out;
  out.reserve(profile.record_count);
  std::int64_t clock = 0;
  auto span_draw = [&](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng.below(static_cast<std::size_t>(hi - lo + 1)));
  };
  for (std::size_t i = 0; i < profile.record_count; ++i) {
    const Shape& s = kShapes[i % kShapes.size()];
    AttemptEvent e;
    std::ostringstream pid;
    pid << 'p' << std::setw(4) << std::setfill('0') << (i / kShapes.size()) % profile.participants;
    e.participant = pid.str();
    e.technique = s.tech;
    e.session = "s" + std::to_string(i / (kShapes.size() * profile.participants));
    clock += 1000 + span_draw(0, 4000);
    e.ready_ms = clock;
    e.touch_ms = clock + span_draw(s.delay_lo, s.delay_hi);
    e.done_ms = *e.touch_ms + span_draw(s.speed_lo, s.speed_hi);
    clock = *e.done_ms;
    e.success = rng.uniform() < s.success;
    e.id = "e" + std::to_string(i);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace semlock
