#include "semlock/model.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "semlock/error.hpp"

namespace semlock {

namespace {

constexpr std::size_t kMaxIconLength = 16;

bool is_icon_char(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw Error(ErrorCode::kOverflow, "password space exceeds 2^64 - 1");
  }
  return a * b;
}

}  // namespace

// ---------------------------------------------------------------------------
// IconId / Side

IconId::IconId(std::string value) : value_(std::move(value)) {
  if (!is_valid(value_)) {
    throw Error(ErrorCode::kInvalidIcon,
                "icon id must match [a-z0-9_]{1,16}: '" + value_ + "'");
  }
}

bool IconId::is_valid(std::string_view value) noexcept {
  return !value.empty() && value.size() <= kMaxIconLength &&
         std::all_of(value.begin(), value.end(), is_icon_char);
}

char side_char(Side side) noexcept {
  switch (side) {
    case Side::kLeft: return 'L';
    case Side::kTop: return 'T';
    case Side::kRight: return 'R';
    case Side::kBottom: return 'B';
  }
  return '?';
}

std::string_view side_name(Side side) noexcept {
  switch (side) {
    case Side::kLeft: return "LEFT";
    case Side::kTop: return "TOP";
    case Side::kRight: return "RIGHT";
    case Side::kBottom: return "BOTTOM";
  }
  return "?";
}

Side side_from_char(char c) {
  switch (c) {
    case 'L': return Side::kLeft;
    case 'T': return Side::kTop;
    case 'R': return Side::kRight;
    case 'B': return Side::kBottom;
    default:
      throw Error(ErrorCode::kInvalidSide,
                  std::string("invalid side character '") + c + "'");
  }
}

Side side_from_string(std::string_view s) {
  if (s.size() == 1) return side_from_char(s.front());
  for (Side side : kAllSides) {
    if (s == side_name(side)) return side;
  }
  throw Error(ErrorCode::kInvalidSide, "invalid side '" + std::string(s) + "'");
}

Cell neighbor(Cell anchor, Side side) noexcept {
  switch (side) {
    case Side::kLeft: return {anchor.col - 1, anchor.row};
    case Side::kTop: return {anchor.col, anchor.row - 1};
    case Side::kRight: return {anchor.col + 1, anchor.row};
    case Side::kBottom: return {anchor.col, anchor.row + 1};
  }
  return anchor;
}

// ---------------------------------------------------------------------------
// Moves and passwords

std::string canonical_move(const Move& move) {
  if (move.moved == move.anchor) {
    throw Error(ErrorCode::kInvalidMove,
                "icon '" + move.moved.str() + "' cannot anchor itself");
  }
  std::string out;
  out.reserve(move.moved.str().size() + move.anchor.str().size() + 3);
  out += move.moved.str();
  out += '>';
  out += move.anchor.str();
  out += ':';
  out += side_char(move.side);
  return out;
}

SemanticPassword::SemanticPassword(std::vector<Move> moves)
    : moves_(std::move(moves)) {
  if (moves_.empty()) {
    throw Error(ErrorCode::kInvalidMove, "a password needs at least one move");
  }
  for (const Move& m : moves_) {
    if (m.moved == m.anchor) {
      throw Error(ErrorCode::kInvalidMove,
                  "icon '" + m.moved.str() + "' cannot anchor itself");
    }
  }
}

std::string canonicalize(const SemanticPassword& password) {
  std::string out;
  for (const Move& m : password.moves()) {
    if (!out.empty()) out += '|';
    out += canonical_move(m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// IconSet

IconSet::IconSet(std::vector<IconId> ids) : ids_(std::move(ids)) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    auto [it, inserted] = index_.emplace(ids_[i].str(), static_cast<int>(i));
    if (!inserted) {
      throw Error(ErrorCode::kInvalidIcon,
                  "duplicate icon id '" + ids_[i].str() + "'");
    }
  }
}

IconSet IconSet::generic(std::size_t n) {
  std::vector<IconId> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (n <= 26) {
      ids.emplace_back(std::string(1, static_cast<char>('a' + i)));
    } else {
      std::ostringstream os;
      os << 'i' << std::setw(3) << std::setfill('0') << i;
      ids.emplace_back(os.str());
    }
  }
  return IconSet(std::move(ids));
}

bool IconSet::contains(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

int IconSet::ordinal(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownIcon,
                "unknown icon '" + std::string(id) + "'");
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class CanonicalParser {
 public:
  CanonicalParser(std::string_view text, const IconSet& icons)
      : text_(text), icons_(icons) {}

  SemanticPassword parse() {
    std::vector<Move> moves;
    if (text_.empty()) throw ParseError(0, "empty password string");
    while (true) {
      moves.push_back(parse_move());
      if (pos_ == text_.size()) break;
      expect('|');
    }
    return SemanticPassword(std::move(moves));
  }

 private:
  Move parse_move() {
    const std::size_t moved_at = pos_;
    std::string moved = parse_icon();
    expect('>');
    const std::size_t anchor_at = pos_;
    std::string anchor = parse_icon();
    expect(':');
    if (pos_ >= text_.size()) throw ParseError(pos_, "expected side character");
    const std::size_t side_at = pos_;
    Side side;
    try {
      side = side_from_char(text_[pos_]);
    } catch (const Error&) {
      throw Error(ErrorCode::kInvalidSide,
                  std::string("invalid side character '") + text_[pos_] +
                      "' at byte " + std::to_string(side_at));
    }
    ++pos_;
    check_known(moved, moved_at);
    check_known(anchor, anchor_at);
    if (moved == anchor) {
      throw Error(ErrorCode::kInvalidMove,
                  "icon '" + moved + "' cannot anchor itself at byte " +
                      std::to_string(moved_at));
    }
    return Move{IconId(std::move(moved)), IconId(std::move(anchor)), side};
  }

  std::string parse_icon() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_icon_char(text_[pos_])) ++pos_;
    if (pos_ == start) throw ParseError(start, "expected icon id");
    if (pos_ - start > kMaxIconLength) {
      throw ParseError(start, "icon id longer than 16 characters");
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) {
      throw ParseError(pos_, std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  void check_known(const std::string& id, std::size_t at) const {
    if (!icons_.contains(id)) {
      throw Error(ErrorCode::kUnknownIcon, "unknown icon '" + id +
                                               "' at byte " +
                                               std::to_string(at));
    }
  }

  std::string_view text_;
  const IconSet& icons_;
  std::size_t pos_ = 0;
};

}  // namespace

SemanticPassword parse_canonical(std::string_view text, const IconSet& icons) {
  return CanonicalParser(text, icons).parse();
}

// ---------------------------------------------------------------------------
// GridSpec

GridSpec::GridSpec(int cols, int rows, IconSet icons, std::vector<Cell> placement)
    : cols_(cols), rows_(rows), icons_(std::move(icons)),
      placement_(std::move(placement)) {
  if (cols_ < 2 || rows_ < 2) {
    throw Error(ErrorCode::kInvalidGrid, "grid needs at least 2 x 2 cells");
  }
  if (icons_.size() > static_cast<std::size_t>(cols_) * rows_) {
    throw Error(ErrorCode::kInvalidGrid, "more icons than grid cells");
  }
  if (placement_.size() != icons_.size()) {
    throw Error(ErrorCode::kInvalidGrid, "every icon needs exactly one cell");
  }
  std::set<Cell> seen;
  for (std::size_t i = 0; i < placement_.size(); ++i) {
    if (!in_bounds(placement_[i])) {
      throw Error(ErrorCode::kInvalidGrid,
                  "icon '" + icons_.at(i).str() + "' placed out of bounds");
    }
    if (!seen.insert(placement_[i]).second) {
      throw Error(ErrorCode::kInvalidGrid,
                  "icon '" + icons_.at(i).str() + "' shares a cell");
    }
  }
}

GridSpec GridSpec::default_layout() {
  IconSet icons({IconId("person"), IconId("cup"), IconId("board"),
                 IconId("tree"), IconId("car"), IconId("sun")});
  return GridSpec(9, 6, std::move(icons),
                  {{1, 1}, {4, 1}, {7, 1}, {1, 4}, {4, 4}, {7, 4}});
}

Cell GridSpec::cell_of(std::string_view icon) const {
  return placement_.at(static_cast<std::size_t>(icons_.ordinal(icon)));
}

bool GridSpec::in_bounds(Cell cell) const noexcept {
  return cell.col >= 0 && cell.col < cols_ && cell.row >= 0 && cell.row < rows_;
}

// ---------------------------------------------------------------------------
// Password space

std::uint64_t theoretical_space(std::uint64_t n, std::uint64_t k) {
  if (n < 2 || k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need n >= 2 icons and k >= 1 moves");
  }
  const std::uint64_t moves = checked_mul(checked_mul(4, n), n - 1);
  std::uint64_t total = 1;
  for (std::uint64_t i = 0; i < k; ++i) total = checked_mul(total, moves);
  return total;
}

std::vector<Move> move_alphabet(const IconSet& icons) {
  std::vector<std::pair<std::string, Move>> keyed;
  for (const IconId& moved : icons.ids()) {
    for (const IconId& anchor : icons.ids()) {
      if (moved == anchor) continue;
      for (Side side : kAllSides) {
        Move m{moved, anchor, side};
        keyed.emplace_back(canonical_move(m), std::move(m));
      }
    }
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Move> out;
  out.reserve(keyed.size());
  for (auto& [key, move] : keyed) out.push_back(std::move(move));
  return out;
}

std::vector<SemanticPassword> enumerate_space(const IconSet& icons,
                                              std::uint64_t k,
                                              std::uint64_t cap) {
  std::uint64_t total = 0;
  try {
    total = theoretical_space(icons.size(), k);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kOverflow) throw;
    throw Error(ErrorCode::kSpaceTooLarge, "password space exceeds cap");
  }
  if (total > cap) {
    throw Error(ErrorCode::kSpaceTooLarge,
                "password space of " + std::to_string(total) +
                    " exceeds cap " + std::to_string(cap));
  }
  // No canonical move string is a prefix of another (each ends in its side
  // character), so the odometer order over a sorted alphabet is exactly the
  // lexicographic order of the joined strings.
  const std::vector<Move> alphabet = move_alphabet(icons);
  std::vector<SemanticPassword> out;
  out.reserve(total);
  std::vector<std::size_t> digits(k, 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    std::vector<Move> moves;
    moves.reserve(k);
    for (std::size_t d : digits) moves.push_back(alphabet[d]);
    out.emplace_back(std::move(moves));
    for (std::size_t pos = k; pos-- > 0;) {
      if (++digits[pos] < alphabet.size()) break;
      digits[pos] = 0;
    }
  }
  return out;
}

std::vector<SemanticPassword> enumerate_space(std::uint64_t n, std::uint64_t k,
                                              std::uint64_t cap) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need n >= 2 icons");
  }
  return enumerate_space(IconSet::generic(n), k, cap);
}

}  // namespace semlock
