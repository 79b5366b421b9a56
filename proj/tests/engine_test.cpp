#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "semlock/engine.hpp"
#include "semlock/error.hpp"

using namespace semlock;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no semlock::Error thrown";
  return ErrorCode::kInvalidArgument;
}

// Brute-force reference for the snap rule: scan every free side cell of every
// placed icon, keep the closest, break ties by anchor ordinal then side.
std::optional<SnapCandidate> scan_candidates(const PlacementState& s, const GridSpec& g, Point p,
                                             double radius) {
  std::optional<SnapCandidate> best;
  for (std::size_t o = 0; o < g.icons().size(); ++o) {
    const IconId& anchor = g.icons().at(o);
    if (s.dragging() && *s.dragging() == anchor) continue;
    auto at = s.cell_of(anchor.str());
    if (!at) continue;
    for (Side side : kAllSides) {
      const Cell c = neighbor(*at, side);
      if (!g.in_bounds(c) || s.occupant(c)) continue;
      const double d = std::hypot(p.x - (c.col + 0.5), p.y - (c.row + 0.5));
      if (d > radius) continue;
      if (!best || d < best->distance) best = SnapCandidate{anchor, side, c, d};
    }
  }
  return best;
}

}  // namespace

class EngineTest : public ::testing::Test {
 protected:
  GridSpec grid_ = GridSpec::default_layout();
  PlacementState state_{grid_};
};

TEST_F(EngineTest, BeginDragErrors) {
  state_.begin_drag("cup");
  ASSERT_TRUE(state_.dragging());
  EXPECT_EQ(state_.dragging()->str(), "cup");
  EXPECT_EQ(code_of([&] { state_.begin_drag("person"); }), ErrorCode::kDragInProgress);

  PlacementState fresh(grid_);
  EXPECT_EQ(code_of([&] { fresh.begin_drag("ghost"); }), ErrorCode::kUnknownIcon);
  EXPECT_EQ(code_of([&] { fresh.update_drag({0, 0}); }), ErrorCode::kNoActiveDrag);
  EXPECT_EQ(code_of([&] { fresh.end_drag({0, 0}); }), ErrorCode::kNoActiveDrag);
}

TEST_F(EngineTest, ZeroDistanceCandidate) {
  state_.begin_drag("cup");
  const auto c = state_.update_drag({2.5, 1.5});
  ASSERT_TRUE(c);
  EXPECT_EQ(c->anchor.str(), "person");
  EXPECT_EQ(c->side, Side::kRight);
  EXPECT_EQ(c->distance, 0.0);
}

TEST_F(EngineTest, FarPositionHasNoCandidate) {
  state_.begin_drag("cup");
  EXPECT_FALSE(state_.update_drag({8.9, 2.9}));
}

TEST_F(EngineTest, TieBreakPrefersLowerOrdinal) {
  state_.begin_drag("tree");
  const auto c = state_.update_drag({3.0, 1.5});
  ASSERT_TRUE(c);
  EXPECT_EQ(c->anchor.str(), "person");
  EXPECT_EQ(c->side, Side::kRight);
  EXPECT_DOUBLE_EQ(c->distance, 0.5);
  const auto ref = scan_candidates(state_, grid_, {3.0, 1.5}, 1.25);
  ASSERT_TRUE(ref);
  EXPECT_EQ(ref->anchor, c->anchor);
  EXPECT_EQ(ref->side, c->side);
}

TEST_F(EngineTest, TieBreakOnSideOrder) {
  // above-left diagonal of person's top and left cells: both at the same
  // distance, LEFT wins over TOP.
  state_.begin_drag("cup");
  const auto c = state_.update_drag({0.5, 0.5});
  ASSERT_TRUE(c);
  EXPECT_EQ(c->anchor.str(), "person");
  EXPECT_EQ(c->side, Side::kLeft);
}

TEST_F(EngineTest, FigureOneSequence) {
  state_.begin_drag("cup");
  const auto m1 = state_.end_drag({2.5, 1.5});
  ASSERT_TRUE(m1);
  EXPECT_EQ(canonical_move(*m1), "cup>person:R");
  EXPECT_EQ(*state_.cell_of("cup"), (Cell{2, 1}));

  state_.begin_drag("board");
  const auto m2 = state_.end_drag({3.4, 1.6});
  ASSERT_TRUE(m2);
  EXPECT_EQ(canonical_move(*m2), "board>cup:R");

  const auto p = state_.capture();
  EXPECT_EQ(canonicalize(p), "cup>person:R|board>cup:R");
  EXPECT_EQ(canonicalize(state_.capture()), canonicalize(p));
  EXPECT_TRUE(state_.invariants_hold());
}

TEST_F(EngineTest, DropOutsideRadiusRestores) {
  state_.begin_drag("sun");
  EXPECT_FALSE(state_.end_drag({8.9, 2.9}));
  EXPECT_TRUE(state_.committed().empty());
  EXPECT_EQ(*state_.cell_of("sun"), grid_.cell_of("sun"));
  EXPECT_FALSE(state_.dragging());
}

TEST_F(EngineTest, ResetThenCaptureIsEmpty) {
  state_.begin_drag("cup");
  state_.end_drag({2.5, 1.5});
  state_.reset();
  EXPECT_EQ(code_of([&] { state_.capture(); }), ErrorCode::kEmptyAttempt);
  EXPECT_EQ(*state_.cell_of("cup"), grid_.cell_of("cup"));
}

TEST_F(EngineTest, DraggedIconIsNotItsOwnAnchor) {
  // The cell right of cup is free, but cup is the one being dragged.
  state_.begin_drag("cup");
  const auto c = state_.update_drag({5.5, 1.5});
  if (c) EXPECT_NE(c->anchor.str(), "cup");
}

TEST_F(EngineTest, RandomDragsMatchScanAndKeepInjectivity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-0.5, 9.5), uy(-0.5, 6.5);
  for (int session = 0; session < 200; ++session) {
    PlacementState s(grid_);
    for (int d = 0; d < 6; ++d) {
      const std::string icon = grid_.icons().at(rng() % grid_.icons().size()).str();
      s.begin_drag(icon);
      Point p{};
      for (int step = 0; step < 4; ++step) {
        p = {ux(rng), uy(rng)};
        const auto got = s.update_drag(p);
        const auto ref = scan_candidates(s, grid_, p, 1.25);
        ASSERT_EQ(got.has_value(), ref.has_value());
        if (got) {
          EXPECT_EQ(got->anchor, ref->anchor);
          EXPECT_EQ(got->side, ref->side);
          EXPECT_EQ(got->target, ref->target);
        }
      }
      const auto preview = s.snap_candidate(p);
      const std::size_t before = s.committed().size();
      const auto m = s.end_drag(p);
      ASSERT_EQ(m.has_value(), preview.has_value());
      if (m) {
        EXPECT_EQ(m->anchor, preview->anchor);
        EXPECT_EQ(m->side, preview->side);
        EXPECT_EQ(*s.cell_of(icon), preview->target);
        EXPECT_EQ(s.committed().size(), before + 1);
      }
      ASSERT_TRUE(s.invariants_hold());
      std::set<Cell> cells;
      for (const auto& id : grid_.icons().ids()) cells.insert(*s.cell_of(id.str()));
      EXPECT_EQ(cells.size(), grid_.icons().size());
    }
  }
}

TEST(DragLog, ParseFormatReplay) {
  const std::string log =
      "{\"t\":0,\"ev\":\"begin\",\"icon\":\"cup\",\"x\":4.5,\"y\":1.5}\n"
      "{\"t\":40,\"ev\":\"move\",\"x\":3.1,\"y\":1.5}\n"
      "{\"t\":80,\"ev\":\"end\",\"x\":2.6,\"y\":1.4}\n"
      "{\"t\":300,\"ev\":\"begin\",\"icon\":\"board\",\"x\":7.5,\"y\":1.5}\n"
      "{\"t\":380,\"ev\":\"end\",\"x\":3.5,\"y\":1.5}\n";
  const auto events = parse_drag_log(log);
  ASSERT_EQ(events.size(), 5u);
  EXPECT_EQ(parse_drag_log(format_drag_log(events)).size(), 5u);

  const GridSpec g = GridSpec::default_layout();
  PlacementState s(g);
  int calls = 0;
  const auto moves = replay(s, events, [&](const PlacementState& st) {
    ++calls;
    EXPECT_TRUE(st.invariants_hold());
  });
  EXPECT_EQ(calls, 5);
  ASSERT_EQ(moves.size(), 2u);
  EXPECT_EQ(canonicalize(SemanticPassword(moves)), "cup>person:R|board>cup:R");
}

TEST(DragLog, BadLineReportsLine) {
  try {
    parse_drag_log("{\"t\":0,\"ev\":\"begin\",\"icon\":\"cup\",\"x\":1,\"y\":1}\n{\"t\":1,\"ev\":\"jump\"}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}
