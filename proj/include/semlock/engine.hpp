#pragma once

// Interactive entry state machine: drag tracking, sticky-snap candidate
// detection and atomic commit of moves.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semlock/model.hpp"

namespace semlock {

/// Continuous board position in cell units. Cell (c, r) covers
/// [c, c+1) x [r, r+1); its center is (c + 0.5, r + 0.5).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

Point cell_center(Cell cell) noexcept;

struct SnapCandidate {
  IconId anchor;
  Side side;
  Cell target;
  double distance;  // Euclidean, cell units
};

struct EngineConfig {
  double snap_radius = 1.25;
};

/// One entry session. Not thread-safe; distinct sessions are independent.
class PlacementState {
 public:
  explicit PlacementState(GridSpec grid, EngineConfig config = {});

  /// Lifts `icon` off the board. Throws kDragInProgress / kUnknownIcon.
  void begin_drag(std::string_view icon);

  /// Records the pointer position and returns the current snap preview.
  /// Throws kNoActiveDrag.
  std::optional<SnapCandidate> update_drag(Point pos);

  /// Drops the dragged icon. Commits and returns the move when `pos` has a
  /// snap candidate; otherwise the icon returns to where it was lifted.
  std::optional<Move> end_drag(Point pos);

  /// Nearest free side cell within the snap radius for the dragged icon.
  /// Ties: lower anchor ordinal first, then side order L < T < R < B.
  std::optional<SnapCandidate> snap_candidate(Point pos) const;

  /// Throws kEmptyAttempt when nothing has been committed.
  SemanticPassword capture() const;

  /// Back to the default layout with no committed moves.
  void reset();

  const GridSpec& grid() const noexcept { return grid_; }
  const EngineConfig& config() const noexcept { return config_; }
  std::span<const Move> committed() const noexcept { return committed_; }
  std::optional<IconId> dragging() const;
  /// Current cell; empty while the icon is lifted.
  std::optional<Cell> cell_of(std::string_view icon) const;
  std::optional<IconId> occupant(Cell cell) const;

  /// Occupancy is injective, every icon not being dragged sits in exactly one
  /// in-bounds cell, and committed moves reference known icons.
  bool invariants_hold() const;

 private:
  struct Drag {
    int ordinal;
    Cell origin;
    Point pos;
  };

  GridSpec grid_;
  EngineConfig config_;
  std::vector<std::optional<Cell>> cells_;  // by icon ordinal
  std::map<Cell, int> occupancy_;
  std::vector<Move> committed_;
  std::optional<Drag> drag_;
};

enum class DragEventKind { kBegin, kMove, kEnd };

/// One line of a drag-event log:
/// {"t": ms, "ev": "begin"|"move"|"end", "icon": id?, "x": float, "y": float}
struct DragEvent {
  std::int64_t t_ms = 0;
  DragEventKind kind = DragEventKind::kMove;
  std::optional<std::string> icon;
  double x = 0.0;
  double y = 0.0;
};

/// Throws ParseError naming the 1-based line on malformed input.
std::vector<DragEvent> parse_drag_log(std::string_view jsonl);
std::string format_drag_log(std::span<const DragEvent> events);

/// Feeds `events` through `state`, invoking `after_each` after every event.
/// Returns the moves committed during the replay.
std::vector<Move> replay(
    PlacementState& state, std::span<const DragEvent> events,
    const std::function<void(const PlacementState&)>& after_each = {});

}  // namespace semlock
