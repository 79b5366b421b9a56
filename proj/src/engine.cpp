#include "semlock/engine.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "semlock/error.hpp"

namespace semlock {

Point cell_center(Cell cell) noexcept {
  return {cell.col + 0.5, cell.row + 0.5};
}

PlacementState::PlacementState(GridSpec grid, EngineConfig config)
    : grid_(std::move(grid)), config_(config) {
  if (!(config_.snap_radius >= 0.0) || !std::isfinite(config_.snap_radius)) {
    throw Error(ErrorCode::kInvalidArgument, "snap radius must be finite and >= 0");
  }
  reset();
}

void PlacementState::reset() {
  cells_.assign(grid_.placement().begin(), grid_.placement().end());
  occupancy_.clear();
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    occupancy_.emplace(*cells_[i], static_cast<int>(i));
  }
  committed_.clear();
  drag_.reset();
}

void PlacementState::begin_drag(std::string_view icon) {
  if (drag_) {
    throw Error(ErrorCode::kDragInProgress,
                "already dragging '" + grid_.icons().at(drag_->ordinal).str() + "'");
  }
  const int ordinal = grid_.icons().ordinal(icon);
  const Cell origin = *cells_[ordinal];
  occupancy_.erase(origin);
  cells_[ordinal].reset();
  drag_ = Drag{ordinal, origin, cell_center(origin)};
}

std::optional<SnapCandidate> PlacementState::snap_candidate(Point pos) const {
  if (!drag_) throw Error(ErrorCode::kNoActiveDrag, "no icon is being dragged");
  const double r2 = config_.snap_radius * config_.snap_radius;
  std::optional<SnapCandidate> best;
  double best_d2 = 0.0;
  // Iterating anchors by ordinal and sides in enum order, a later candidate
  // only wins on strictly smaller distance, which realizes the tie-break.
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    if (!cells_[a]) continue;
    for (Side side : kAllSides) {
      const Cell target = neighbor(*cells_[a], side);
      if (!grid_.in_bounds(target) || occupancy_.count(target) != 0) continue;
      const Point c = cell_center(target);
      const double dx = c.x - pos.x;
      const double dy = c.y - pos.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 > r2) continue;
      if (!best || d2 < best_d2) {
        best_d2 = d2;
        best = SnapCandidate{grid_.icons().at(a), side, target, std::sqrt(d2)};
      }
    }
  }
  return best;
}

std::optional<SnapCandidate> PlacementState::update_drag(Point pos) {
  auto candidate = snap_candidate(pos);
  drag_->pos = pos;
  return candidate;
}

std::optional<Move> PlacementState::end_drag(Point pos) {
  auto candidate = snap_candidate(pos);
  const Drag drag = *drag_;
  drag_.reset();
  const Cell dest = candidate ? candidate->target : drag.origin;
  cells_[drag.ordinal] = dest;
  occupancy_.emplace(dest, drag.ordinal);
  if (!candidate) return std::nullopt;
  Move move{grid_.icons().at(drag.ordinal), candidate->anchor, candidate->side};
  committed_.push_back(move);
  return move;
}

SemanticPassword PlacementState::capture() const {
  if (committed_.empty()) {
    throw Error(ErrorCode::kEmptyAttempt, "no moves committed");
  }
  return SemanticPassword(committed_);
}

std::optional<IconId> PlacementState::dragging() const {
  if (!drag_) return std::nullopt;
  return grid_.icons().at(drag_->ordinal);
}

std::optional<Cell> PlacementState::cell_of(std::string_view icon) const {
  return cells_[grid_.icons().ordinal(icon)];
}

std::optional<IconId> PlacementState::occupant(Cell cell) const {
  auto it = occupancy_.find(cell);
  if (it == occupancy_.end()) return std::nullopt;
  return grid_.icons().at(it->second);
}

bool PlacementState::invariants_hold() const {
  std::set<Cell> seen;
  std::size_t placed = 0;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const bool lifted = drag_ && drag_->ordinal == static_cast<int>(i);
    if (lifted != !cells_[i].has_value()) return false;
    if (!cells_[i]) continue;
    ++placed;
    if (!grid_.in_bounds(*cells_[i]) || !seen.insert(*cells_[i]).second) return false;
    auto it = occupancy_.find(*cells_[i]);
    if (it == occupancy_.end() || it->second != static_cast<int>(i)) return false;
  }
  if (occupancy_.size() != placed) return false;
  for (const Move& m : committed_) {
    if (!grid_.icons().contains(m.moved.str()) ||
        !grid_.icons().contains(m.anchor.str()) || m.moved == m.anchor) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Drag-event logs

namespace {

DragEventKind kind_from_string(const std::string& s, std::size_t line) {
  if (s == "begin") return DragEventKind::kBegin;
  if (s == "move") return DragEventKind::kMove;
  if (s == "end") return DragEventKind::kEnd;
  throw Error(ErrorCode::kParseError,
              "line " + std::to_string(line) + ": unknown event '" + s + "'");
}

std::string_view kind_to_string(DragEventKind kind) {
  switch (kind) {
    case DragEventKind::kBegin: return "begin";
    case DragEventKind::kMove: return "move";
    case DragEventKind::kEnd: return "end";
  }
  return "?";
}

}  // namespace

std::vector<DragEvent> parse_drag_log(std::string_view jsonl) {
  std::vector<DragEvent> events;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (offset < jsonl.size()) {
    std::size_t end = jsonl.find('\n', offset);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(offset, end - offset);
    const std::size_t line_start = offset;
    offset = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DragEvent ev;
      ev.t_ms = j.at("t").get<std::int64_t>();
      ev.kind = kind_from_string(j.at("ev").get<std::string>(), line_no);
      if (j.contains("icon") && !j["icon"].is_null()) {
        ev.icon = j["icon"].get<std::string>();
      }
      ev.x = j.at("x").get<double>();
      ev.y = j.at("y").get<double>();
      if (ev.kind == DragEventKind::kBegin && !ev.icon) {
        throw Error(ErrorCode::kParseError, "begin event without icon");
      }
      events.push_back(std::move(ev));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_start, "drag log line " + std::to_string(line_no) +
                                       ": " + e.what());
    } catch (const Error& e) {
      throw ParseError(line_start, "drag log line " + std::to_string(line_no) +
                                       ": " + e.what());
    }
  }
  return events;
}

std::string format_drag_log(std::span<const DragEvent> events) {
  std::ostringstream os;
  for (const DragEvent& ev : events) {
    nlohmann::json j;
    j["t"] = ev.t_ms;
    j["ev"] = kind_to_string(ev.kind);
    if (ev.icon) j["icon"] = *ev.icon;
    j["x"] = ev.x;
    j["y"] = ev.y;
    os << j.dump() << '\n';
  }
  return os.str();
}

std::vector<Move> replay(
    PlacementState& state, std::span<const DragEvent> events,
    const std::function<void(const PlacementState&)>& after_each) {
  std::vector<Move> committed;
  for (const DragEvent& ev : events) {
    const Point pos{ev.x, ev.y};
    switch (ev.kind) {
      case DragEventKind::kBegin:
        state.begin_drag(*ev.icon);
        break;
      case DragEventKind::kMove:
        state.update_drag(pos);
        break;
      case DragEventKind::kEnd:
        if (auto move = state.end_drag(pos)) committed.push_back(*move);
        break;
    }
    if (after_each) after_each(state);
  }
  return committed;
}

}  // namespace semlock
