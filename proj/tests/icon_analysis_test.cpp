#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "semlock/error.hpp"
#include "semlock/icon_analysis.hpp"

using namespace semlock;

namespace {

std::vector<IconId> ids(std::size_t m) {
  std::vector<IconId> out;
  for (std::size_t i = 0; i < m; ++i) out.emplace_back(std::string(1, static_cast<char>('a' + i)));
  return out;
}

using Counts = std::vector<std::vector<std::uint64_t>>;

Counts random_counts(std::mt19937_64& rng, std::size_t m, std::uint64_t hi) {
  Counts c(m, std::vector<std::uint64_t>(m, 0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) c[i][j] = c[j][i] = rng() % (hi + 1);
  }
  return c;
}

// Every k-subset in lexicographic order; returns the first minimum.
std::pair<std::uint64_t, std::vector<std::size_t>> brute_min(const Counts& c, std::size_t k, bool use_max) {
  const std::size_t m = c.size();
  std::vector<bool> pick(m, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(k), true);
  std::uint64_t best = UINT64_MAX;
  std::vector<std::size_t> best_set;
  do {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < m; ++i)
      if (pick[i]) s.push_back(i);
    std::uint64_t v = 0;
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b)
        v = use_max ? std::max(v, c[s[a]][s[b]]) : v + c[s[a]][s[b]];
    if (v < best) {
      best = v;
      best_set = s;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return {best, best_set};
}

}  // namespace

TEST(CountPairs, DirectCount) {
  const IconSet icons = IconSet::generic(3);
  const std::vector<PairObservation> obs = {{"p", IconId("a"), IconId("b"), 1},
                                            {"p", IconId("b"), IconId("a"), 1},
                                            {"q", IconId("b"), IconId("c"), 2}};
  const auto m = count_pairs(obs, icons);
  EXPECT_EQ(m.count(0, 1), 2u);
  EXPECT_EQ(m.count(1, 0), 2u);
  EXPECT_EQ(m.count(1, 2), 1u);
  EXPECT_EQ(m.count(0, 2), 0u);
  EXPECT_EQ(m.total(), 3u);

  const auto empty = count_pairs({}, icons);
  EXPECT_EQ(empty.total(), 0u);

  const std::vector<PairObservation> bad = {{"p", IconId("a"), IconId("z"), 1}};
  try {
    count_pairs(bad, icons);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownIcon);
  }
}

TEST(CountPairs, TotalMatchesObservations) {
  std::mt19937_64 rng(2);
  const IconSet icons = IconSet::generic(12);
  for (int t = 0; t < 20; ++t) {
    std::vector<PairObservation> obs;
    const std::size_t n = rng() % 500;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = rng() % 12;
      std::size_t b = rng() % 11;
      if (b >= a) ++b;
      obs.push_back({"p", icons.at(a), icons.at(b), 1});
    }
    const auto m = count_pairs(obs, icons);
    EXPECT_EQ(m.total(), n);
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < 12; ++i) {
      EXPECT_EQ(m.count(i, i), 0u);
      for (std::size_t j = i + 1; j < 12; ++j) {
        EXPECT_EQ(m.count(i, j), m.count(j, i));
        sum += m.count(i, j);
      }
    }
    EXPECT_EQ(sum, n);
  }
}

TEST(FromCounts, RejectsAsymmetric) {
  EXPECT_THROW(CooccurrenceMatrix::from_counts(ids(2), {{0, 1}, {2, 0}}), Error);
  EXPECT_THROW(CooccurrenceMatrix::from_counts(ids(2), {{1, 0}, {0, 0}}), Error);
  EXPECT_THROW(CooccurrenceMatrix::from_counts(ids(3), {{0, 0}, {0, 0}}), Error);
}

TEST(Select, AllZeroPicksSmallestIds) {
  const auto m = CooccurrenceMatrix::from_counts(ids(6), Counts(6, std::vector<std::uint64_t>(6, 0)));
  for (auto mode : {SelectionMode::kExact, SelectionMode::kGreedy}) {
    const auto s = select_least_related(m, 3, mode);
    ASSERT_EQ(s.icons.size(), 3u);
    EXPECT_EQ(s.icons[0].str(), "a");
    EXPECT_EQ(s.icons[1].str(), "b");
    EXPECT_EQ(s.icons[2].str(), "c");
    EXPECT_EQ(s.objective, 0u);
  }
}

TEST(Select, SingleNonzeroEntry) {
  Counts c(6, std::vector<std::uint64_t>(6, 0));
  c[0][1] = c[1][0] = 5;
  const auto m = CooccurrenceMatrix::from_counts(ids(6), c);
  const auto s = select_least_related(m, 5, SelectionMode::kExact);
  std::vector<std::string> got;
  for (const auto& id : s.icons) got.push_back(id.str());
  EXPECT_EQ(got, (std::vector<std::string>{"a", "c", "d", "e", "f"}));
  EXPECT_EQ(s.objective, 0u);
}

TEST(Select, Errors) {
  const auto m = CooccurrenceMatrix::from_counts(ids(4), Counts(4, std::vector<std::uint64_t>(4, 0)));
  auto code = [&](std::size_t k) {
    try {
      select_least_related(m, k, SelectionMode::kExact);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kEmptyInput;
  };
  EXPECT_EQ(code(5), ErrorCode::kKTooLarge);
  EXPECT_EQ(code(0), ErrorCode::kInvalidArgument);

  CooccurrenceMatrix big(stage1_icons(60).ids());
  try {
    select_least_related(big, 10, SelectionMode::kExact);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSubsetTooLarge);
  }
  EXPECT_EQ(select_least_related(big, 10, SelectionMode::kGreedy).icons.size(), 10u);
}

TEST(Select, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Counts c = random_counts(rng, 10, trial % 2 ? 3 : 50);
    const auto m = CooccurrenceMatrix::from_counts(ids(10), c);
    for (bool use_max : {false, true}) {
      const auto obj = use_max ? SelectionObjective::kMax : SelectionObjective::kSum;
      const auto [best, best_set] = brute_min(c, 4, use_max);
      const auto exact = select_least_related(m, 4, SelectionMode::kExact, obj);
      const auto greedy = select_least_related(m, 4, SelectionMode::kGreedy, obj);
      EXPECT_EQ(exact.objective, best);
      ASSERT_EQ(exact.icons.size(), 4u);
      for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(exact.icons[i], m.icons()[best_set[i]]);
      EXPECT_GE(greedy.objective, exact.objective);
      std::vector<std::size_t> members;
      for (const auto& id : greedy.icons) members.push_back(static_cast<std::size_t>(id.str()[0] - 'a'));
      EXPECT_EQ(subset_objective(m, members, obj), greedy.objective);
    }
  }
}

TEST(Select, InvariantUnderPresentationOrder) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Counts c = random_counts(rng, 9, 4);
    const auto base = select_least_related(CooccurrenceMatrix::from_counts(ids(9), c), 4,
                                           SelectionMode::kExact);
    std::vector<std::size_t> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<IconId> pids;
    Counts pc(9, std::vector<std::uint64_t>(9, 0));
    for (std::size_t i = 0; i < 9; ++i) {
      pids.push_back(ids(9)[perm[i]]);
      for (std::size_t j = 0; j < 9; ++j) pc[i][j] = c[perm[i]][perm[j]];
    }
    const auto shuffled = select_least_related(CooccurrenceMatrix::from_counts(pids, pc), 4,
                                               SelectionMode::kExact);
    EXPECT_EQ(shuffled.icons, base.icons);
    EXPECT_EQ(shuffled.objective, base.objective);

    // order-preserving rename: a->k0a, b->k0b, ...
    std::vector<IconId> renamed;
    for (const auto& id : ids(9)) renamed.emplace_back("k0" + id.str());
    const auto r = select_least_related(CooccurrenceMatrix::from_counts(renamed, c), 4,
                                        SelectionMode::kExact);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(r.icons[i].str(), "k0" + base.icons[i].str());
  }
}

TEST(Select, FortyIconsSixPicksTerminates) {
  PairProfile p;
  p.record_count = 3708;
  const auto obs = synthesize_pairs(7, p);
  const auto m = count_pairs(obs, stage1_icons(40));
  const auto s = select_least_related(m, 6, SelectionMode::kExact);
  EXPECT_EQ(s.icons.size(), 6u);
  EXPECT_LE(s.objective, select_least_related(m, 6, SelectionMode::kGreedy).objective);
  EXPECT_EQ(binomial(40, 6), 3838380u);
}

TEST(Binomial, Values) {
  EXPECT_EQ(binomial(10, 4), 210u);
  EXPECT_EQ(binomial(5, 0), 1u);
  EXPECT_EQ(binomial(3, 5), 0u);
  EXPECT_EQ(binomial(200, 100), UINT64_MAX);
}

TEST(GammaQ, AgainstClosedForms) {
  for (double x : {0.01, 0.4, 1.0, 2.5, 7.0, 30.0}) {
    const double q15 = std::erfc(std::sqrt(x)) + 2.0 * std::sqrt(x / M_PI) * std::exp(-x);
    EXPECT_NEAR(regularized_gamma_q(1.5, x), q15, 1e-10 * q15) << x;
    EXPECT_NEAR(regularized_gamma_q(0.5, x), std::erfc(std::sqrt(x)), 1e-10 * std::erfc(std::sqrt(x)));
    EXPECT_NEAR(regularized_gamma_q(1.0, x), std::exp(-x), 1e-10 * std::exp(-x));
  }
}

TEST(GammaQ, AgainstBoost) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ua(0.5, 40.0), ux(0.0, 80.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = std::round(ua(rng) * 2) / 2;
    const double x = ux(rng);
    const double want = boost::math::gamma_q(a, x);
    if (want < 1e-300) continue;
    EXPECT_NEAR(regularized_gamma_q(a, x), want, 1e-10 * want) << a << " " << x;
  }
}

TEST(ChiSquare, Examples) {
  const std::vector<std::uint64_t> eq = {10, 10, 10, 10};
  const auto r0 = chi_square_uniformity(eq);
  EXPECT_EQ(r0.statistic, 0.0);
  EXPECT_EQ(r0.p_value, 1.0);
  EXPECT_EQ(r0.df, 3);

  const std::vector<std::uint64_t> v = {12, 8, 10, 10};
  const auto r1 = chi_square_uniformity(v);
  EXPECT_NEAR(r1.statistic, 0.8, 1e-12);
  EXPECT_EQ(r1.df, 3);
  const double oracle = std::erfc(std::sqrt(0.4)) + 2.0 * std::sqrt(0.4 / M_PI) * std::exp(-0.4);
  EXPECT_NEAR(r1.p_value, oracle, 1e-10);
  EXPECT_NEAR(r1.p_value, 0.8495, 1e-4);

  const std::vector<std::uint64_t> w = {100, 0};
  const auto r2 = chi_square_uniformity(w);
  EXPECT_DOUBLE_EQ(r2.statistic, 100.0);
  EXPECT_EQ(r2.df, 1);
  EXPECT_LT(r2.p_value, 1e-20);
  EXPECT_NEAR(r2.p_value, std::erfc(std::sqrt(50.0)), 1e-10 * std::erfc(std::sqrt(50.0)));
}

TEST(ChiSquare, Degenerate) {
  const std::vector<std::uint64_t> one = {5};
  const std::vector<std::uint64_t> zero = {0, 0, 0};
  EXPECT_THROW(chi_square_uniformity(one), Error);
  EXPECT_THROW(chi_square_uniformity(zero), Error);
}

TEST(ChiSquare, ZeroIffEqualAndMonotone) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::uint64_t> obs(2 + rng() % 8);
    for (auto& o : obs) o = rng() % 6;
    if (std::accumulate(obs.begin(), obs.end(), std::uint64_t{0}) == 0) obs[0] = 1;
    const bool all_equal = std::all_of(obs.begin(), obs.end(), [&](auto o) { return o == obs[0]; });
    const auto r = chi_square_uniformity(obs);
    EXPECT_EQ(r.statistic == 0.0, all_equal);
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
  }
  for (int df = 1; df <= 20; ++df) {
    double prev = 1.0 + 1e-15;
    for (double s = 0.1; s < 100.0; s += 0.37) {
      const double p = regularized_gamma_q(df / 2.0, s / 2.0);
      EXPECT_LT(p, prev) << df << " " << s;
      prev = p;
    }
  }
}

TEST(Usage, CategoriesAndCsv) {
  const IconSet six = GridSpec::default_layout().icons();
  const std::vector<PasswordRecord> recs = {
      {"a", parse_canonical("cup>person:R|board>cup:R", six)},
      {"b", parse_canonical("sun>tree:B|car>sun:L|tree>car:T", six)}};
  const auto icons = icon_usage(recs, six);
  EXPECT_EQ(icons.categories.size(), 6u);
  const auto pairs = pair_usage(recs, six);
  EXPECT_EQ(pairs.categories.size(), 15u);
  std::uint64_t pair_total = 0;
  for (auto c : pairs.observed) pair_total += c;
  EXPECT_EQ(pair_total, 5u);
  const auto sides = side_usage(recs);
  EXPECT_EQ(sides.categories, (std::vector<std::string>{"LEFT", "TOP", "RIGHT", "BOTTOM"}));
  EXPECT_EQ(sides.observed, (std::vector<std::uint64_t>{1, 1, 2, 1}));

  const std::string csv = uniformity_csv(sides);
  EXPECT_EQ(csv.rfind("category,observed,expected\n", 0), 0u);
  EXPECT_NE(csv.find("\n# statistic="), std::string::npos);
  EXPECT_NE(uniformity_json(sides).find("\"p_value\""), std::string::npos);
}
