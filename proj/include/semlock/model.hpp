#pragma once

// Password model: icons, sides, moves, semantic passwords and the
// theoretical password space they span.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semlock {

/// Short ASCII icon identifier matching `[a-z0-9_]{1,16}`.
class IconId {
 public:
  explicit IconId(std::string value);

  const std::string& str() const noexcept { return value_; }

  static bool is_valid(std::string_view value) noexcept;

  friend bool operator==(const IconId&, const IconId&) = default;
  friend auto operator<=>(const IconId&, const IconId&) = default;

 private:
  std::string value_;
};

/// Resting position of a moved icon relative to its anchor. The enumerator
/// order is the tie-break order used everywhere (L < T < R < B).
enum class Side : std::uint8_t { kLeft = 0, kTop = 1, kRight = 2, kBottom = 3 };

inline constexpr std::array<Side, 4> kAllSides = {Side::kLeft, Side::kTop,
                                                  Side::kRight, Side::kBottom};

char side_char(Side side) noexcept;
std::string_view side_name(Side side) noexcept;
/// Throws Error(kInvalidSide) for anything other than L/T/R/B.
Side side_from_char(char c);
/// Accepts the single-letter code or the upper-case name ("RIGHT").
Side side_from_string(std::string_view s);

struct Cell {
  int col = 0;
  int row = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Cell adjacent to `anchor` on `side`. Row 0 is the top row.
Cell neighbor(Cell anchor, Side side) noexcept;

/// One drag action: `moved` comes to rest on `side` of `anchor`.
struct Move {
  IconId moved;
  IconId anchor;
  Side side;

  friend bool operator==(const Move&, const Move&) = default;
};

/// `moved>anchor:S`. Throws Error(kInvalidMove) when moved == anchor.
std::string canonical_move(const Move& move);

/// Ordered, non-empty sequence of moves. Identity is the sequence itself,
/// not the spatial configuration it produces.
class SemanticPassword {
 public:
  explicit SemanticPassword(std::vector<Move> moves);

  std::span<const Move> moves() const noexcept { return moves_; }
  std::size_t size() const noexcept { return moves_.size(); }

  friend bool operator==(const SemanticPassword&,
                         const SemanticPassword&) = default;

 private:
  std::vector<Move> moves_;
};

std::string canonicalize(const SemanticPassword& password);

/// Icon set with display ordinals equal to insertion position.
class IconSet {
 public:
  IconSet() = default;
  explicit IconSet(std::vector<IconId> ids);

  /// n generic icons: "a".."z" for n <= 26, otherwise "i000", "i001", ...
  static IconSet generic(std::size_t n);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<IconId>& ids() const noexcept { return ids_; }
  bool contains(std::string_view id) const;
  /// Throws Error(kUnknownIcon).
  int ordinal(std::string_view id) const;
  const IconId& at(std::size_t ordinal) const { return ids_.at(ordinal); }

 private:
  std::vector<IconId> ids_;
  std::unordered_map<std::string, int> index_;
};

/// Throws ParseError (byte offset), Error(kInvalidSide), Error(kUnknownIcon)
/// or Error(kInvalidMove).
SemanticPassword parse_canonical(std::string_view text, const IconSet& icons);

/// Board geometry plus the default placement of every icon.
class GridSpec {
 public:
  /// `placement[i]` is the cell of `icons.at(i)`. Throws Error(kInvalidGrid).
  GridSpec(int cols, int rows, IconSet icons, std::vector<Cell> placement);

  /// 9 x 6 board with the six study icons.
  static GridSpec default_layout();

  int cols() const noexcept { return cols_; }
  int rows() const noexcept { return rows_; }
  const IconSet& icons() const noexcept { return icons_; }
  const std::vector<Cell>& placement() const noexcept { return placement_; }
  Cell cell_of(std::string_view icon) const;
  bool in_bounds(Cell cell) const noexcept;

 private:
  int cols_;
  int rows_;
  IconSet icons_;
  std::vector<Cell> placement_;
};

inline constexpr std::uint64_t kDefaultSpaceCap = 10'000'000;

/// (4 n (n-1))^k, exact. Throws Error(kOverflow) rather than wrapping.
std::uint64_t theoretical_space(std::uint64_t n, std::uint64_t k);

/// All 4 n (n-1) single moves, sorted by canonical string.
std::vector<Move> move_alphabet(const IconSet& icons);

/// Every k-move password over `icons`, in canonical-string order.
/// Throws Error(kSpaceTooLarge) when the space exceeds `cap`.
std::vector<SemanticPassword> enumerate_space(
    const IconSet& icons, std::uint64_t k,
    std::uint64_t cap = kDefaultSpaceCap);

std::vector<SemanticPassword> enumerate_space(
    std::uint64_t n, std::uint64_t k, std::uint64_t cap = kDefaultSpaceCap);

}  // namespace semlock

template <>
struct std::hash<semlock::IconId> {
  std::size_t operator()(const semlock::IconId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
