#include "semlock/icon_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "semlock/error.hpp"

namespace semlock {

CooccurrenceMatrix::CooccurrenceMatrix(std::vector<IconId> icons)
    : icons_(std::move(icons)), counts_(icons_.size() * icons_.size(), 0) {}

CooccurrenceMatrix CooccurrenceMatrix::from_counts(
    std::vector<IconId> icons, const std::vector<std::vector<std::uint64_t>>& counts) {
  CooccurrenceMatrix m(std::move(icons));
  const std::size_t n = m.size();
  if (counts.size() != n) throw Error(ErrorCode::kInvalidArgument, "matrix size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i].size() != n) throw Error(ErrorCode::kInvalidArgument, "matrix is not square");
    if (counts[i][i] != 0) throw Error(ErrorCode::kInvalidArgument, "nonzero diagonal");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (counts[i][j] != counts[j][i]) {
        throw Error(ErrorCode::kInvalidArgument, "matrix is not symmetric");
      }
      if (counts[i][j] != 0) m.add(i, j, counts[i][j]);
    }
  }
  return m;
}

void CooccurrenceMatrix::add(std::size_t i, std::size_t j, std::uint64_t n) {
  if (i == j) throw Error(ErrorCode::kInvalidArgument, "self pairs are not counted");
  counts_[i * size() + j] += n;
  counts_[j * size() + i] += n;
  total_ += n;
}

CooccurrenceMatrix count_pairs(std::span<const PairObservation> observations,
                               const IconSet& icons) {
  CooccurrenceMatrix m(icons.ids());
  for (const PairObservation& obs : observations) {
    const int a = icons.ordinal(obs.first.str());
    const int b = icons.ordinal(obs.second.str());
    if (a == b) throw Error(ErrorCode::kInvalidArgument, "pair repeats an icon");
    m.add(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  }
  return m;
}

std::uint64_t binomial(std::uint64_t m, std::uint64_t k) noexcept {
  if (k > m) return 0;
  k = std::min(k, m - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (m - k + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t subset_objective(const CooccurrenceMatrix& matrix,
                               std::span<const std::size_t> members,
                               SelectionObjective objective) {
  std::uint64_t value = 0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      const std::uint64_t c = matrix.count(members[a], members[b]);
      value = objective == SelectionObjective::kSum ? value + c : std::max(value, c);
    }
  }
  return value;
}

namespace {

std::uint64_t combine(SelectionObjective objective, std::uint64_t acc, std::uint64_t c) {
  return objective == SelectionObjective::kSum ? acc + c : std::max(acc, c);
}

class ExactSearch {
 public:
  ExactSearch(const CooccurrenceMatrix& matrix, std::vector<std::size_t> order,
              std::size_t k, SelectionObjective objective)
      : matrix_(matrix), order_(std::move(order)), k_(k), objective_(objective),
        increments_(k + 1, std::vector<std::uint64_t>(order_.size(), 0)) {}

  Selection run() {
    chosen_.reserve(k_);
    dfs(0, 0);
    Selection out;
    out.objective = best_;
    out.nodes_visited = nodes_;
    for (std::size_t pos : best_set_) out.icons.push_back(matrix_.icons()[order_[pos]]);
    return out;
  }

 private:
  // increments_[depth][t] = objective contribution of adding position t to
  // the current partial set (sum or max of its counts with chosen members).
  void dfs(std::size_t start, std::uint64_t partial) {
    ++nodes_;
    const std::size_t depth = chosen_.size();
    const std::size_t remaining = k_ - depth;
    if (remaining == 0) {
      if (!found_ || partial < best_) {
        found_ = true;
        best_ = partial;
        best_set_ = chosen_;
      }
      return;
    }
    const std::size_t m = order_.size();
    if (m - start < remaining) return;
    if (found_ && lower_bound(start, partial, remaining) >= best_) return;

    const auto& inc = increments_[depth];
    auto& next = increments_[depth + 1];
    for (std::size_t j = start; j + remaining <= m; ++j) {
      const std::uint64_t value = combine(objective_, partial, inc[j]);
      if (found_ && value >= best_) continue;
      for (std::size_t t = 0; t < m; ++t) {
        next[t] = combine(objective_, inc[t], matrix_.count(order_[j], order_[t]));
      }
      chosen_.push_back(j);
      dfs(j + 1, value);
      chosen_.pop_back();
    }
  }

  std::uint64_t lower_bound(std::size_t start, std::uint64_t partial, std::size_t r) {
    const auto& inc = increments_[chosen_.size()];
    scratch_.assign(inc.begin() + static_cast<std::ptrdiff_t>(start), inc.end());
    std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r - 1),
                     scratch_.end());
    if (objective_ == SelectionObjective::kMax) {
      // At least r candidates are added; the largest of their increments is
      // no smaller than the r-th smallest increment.
      return std::max(partial, scratch_[r - 1]);
    }
    std::uint64_t bound = partial;
    for (std::size_t i = 0; i < r; ++i) bound += scratch_[i];
    return bound;
  }

  const CooccurrenceMatrix& matrix_;
  std::vector<std::size_t> order_;
  std::size_t k_;
  SelectionObjective objective_;
  std::vector<std::vector<std::uint64_t>> increments_;
  std::vector<std::uint64_t> scratch_;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> best_set_;
  std::uint64_t best_ = 0;
  bool found_ = false;
  std::uint64_t nodes_ = 0;
};

Selection greedy_select(const CooccurrenceMatrix& matrix, const std::vector<std::size_t>& order,
                        std::size_t k, SelectionObjective objective) {
  const std::size_t m = order.size();
  std::vector<std::size_t> chosen;  // positions in `order`
  std::vector<bool> taken(m, false);
  std::uint64_t value = 0;
  if (k == 1) {
    chosen.push_back(0);
  } else {
    std::size_t bi = 0, bj = 1;
    std::uint64_t best = matrix.count(order[0], order[1]);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const std::uint64_t c = matrix.count(order[i], order[j]);
        if (c < best) {
          best = c;
          bi = i;
          bj = j;
        }
      }
    }
    chosen = {bi, bj};
    value = best;
  }
  for (std::size_t pos : chosen) taken[pos] = true;
  while (chosen.size() < k) {
    std::size_t pick = m;
    std::uint64_t pick_value = 0;
    for (std::size_t t = 0; t < m; ++t) {
      if (taken[t]) continue;
      std::uint64_t v = value;
      for (std::size_t s : chosen) v = combine(objective, v, matrix.count(order[s], order[t]));
      if (pick == m || v < pick_value) {
        pick = t;
        pick_value = v;
      }
    }
    chosen.push_back(pick);
    taken[pick] = true;
    value = pick_value;
  }
  std::sort(chosen.begin(), chosen.end());
  Selection out;
  out.objective = value;
  out.nodes_visited = k;
  for (std::size_t pos : chosen) out.icons.push_back(matrix.icons()[order[pos]]);
  return out;
}

}  // namespace

Selection select_least_related(const CooccurrenceMatrix& matrix, std::size_t k,
                               SelectionMode mode, SelectionObjective objective) {
  const std::size_t m = matrix.size();
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (k > m) {
    throw Error(ErrorCode::kKTooLarge, "k = " + std::to_string(k) + " exceeds " +
                                           std::to_string(m) + " icons");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return matrix.icons()[a] < matrix.icons()[b];
  });
  if (mode == SelectionMode::kGreedy) return greedy_select(matrix, order, k, objective);
  const std::uint64_t subsets = binomial(m, k);
  if (subsets > kExactSubsetCap) {
    throw Error(ErrorCode::kSubsetTooLarge,
                "C(" + std::to_string(m) + "," + std::to_string(k) + ") = " +
                    std::to_string(subsets) + " exceeds the exact-search cap");
  }
  return ExactSearch(matrix, std::move(order), k, objective).run();
}

// ---------------------------------------------------------------------------
// Incomplete gamma

namespace {

constexpr int kMaxGammaIterations = 100000;
constexpr double kGammaEps = 1e-16;

// Lower regularized P(a, x) by its power series.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxGammaIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized Q(a, x) by the modified Lentz continued fraction.
double gamma_q_continued_fraction(double a, double x) {
  constexpr double kTiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxGammaIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a)) {
    throw Error(ErrorCode::kInvalidArgument, "regularized_gamma_q needs a > 0, x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 0.5) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

UniformityReport chi_square_uniformity(std::span<const std::uint64_t> observed,
                                       std::vector<std::string> labels) {
  if (observed.size() < 2) {
    throw Error(ErrorCode::kDegenerateInput, "need at least two categories");
  }
  const std::uint64_t total = std::accumulate(observed.begin(), observed.end(), std::uint64_t{0});
  if (total == 0) throw Error(ErrorCode::kDegenerateInput, "total count is zero");
  if (labels.empty()) {
    for (std::size_t i = 0; i < observed.size(); ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != observed.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one label per category");
  }
  UniformityReport r;
  r.categories = std::move(labels);
  r.observed.assign(observed.begin(), observed.end());
  r.expected = static_cast<double>(total) / static_cast<double>(observed.size());
  bool all_equal = true;
  for (std::uint64_t o : observed) {
    const double diff = static_cast<double>(o) - r.expected;
    r.statistic += diff * diff / r.expected;
    all_equal = all_equal && o == observed.front();
  }
  if (all_equal) r.statistic = 0.0;
  r.df = static_cast<int>(observed.size()) - 1;
  r.p_value = regularized_gamma_q(r.df / 2.0, r.statistic / 2.0);
  return r;
}

std::string uniformity_csv(const UniformityReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "category,observed,expected\n";
  for (std::size_t i = 0; i < report.categories.size(); ++i) {
    os << report.categories[i] << ',' << report.observed[i] << ',' << report.expected << '\n';
  }
  os << "# statistic=" << report.statistic << ",df=" << report.df
     << ",p=" << report.p_value << '\n';
  return os.str();
}

std::string uniformity_json(const UniformityReport& report) {
  nlohmann::json j;
  j["categories"] = report.categories;
  j["observed"] = report.observed;
  j["expected"] = report.expected;
  j["statistic"] = report.statistic;
  j["df"] = report.df;
  j["p_value"] = report.p_value;
  return j.dump(2) + "\n";
}

UniformityReport icon_usage(std::span<const PasswordRecord> records, const IconSet& icons) {
  std::vector<std::uint64_t> counts(icons.size(), 0);
  std::vector<bool> used(icons.size());
  for (const PasswordRecord& r : records) {
    std::fill(used.begin(), used.end(), false);
    for (const Move& m : r.password.moves()) {
      used[icons.ordinal(m.moved.str())] = true;
      used[icons.ordinal(m.anchor.str())] = true;
    }
    for (std::size_t i = 0; i < used.size(); ++i) counts[i] += used[i] ? 1 : 0;
  }
  std::vector<std::string> labels;
  for (const IconId& id : icons.ids()) labels.push_back(id.str());
  return chi_square_uniformity(counts, std::move(labels));
}

UniformityReport pair_usage(std::span<const PasswordRecord> records, const IconSet& icons) {
  const std::size_t n = icons.size();
  std::vector<std::uint64_t> grid(n * n, 0);
  for (const PasswordRecord& r : records) {
    for (const Move& m : r.password.moves()) {
      auto a = static_cast<std::size_t>(icons.ordinal(m.moved.str()));
      auto b = static_cast<std::size_t>(icons.ordinal(m.anchor.str()));
      if (a > b) std::swap(a, b);
      ++grid[a * n + b];
    }
  }
  std::vector<std::uint64_t> counts;
  std::vector<std::string> labels;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      counts.push_back(grid[a * n + b]);
      labels.push_back(icons.at(a).str() + "-" + icons.at(b).str());
    }
  }
  return chi_square_uniformity(counts, std::move(labels));
}

UniformityReport side_usage(std::span<const PasswordRecord> records) {
  std::vector<std::uint64_t> counts(4, 0);
  for (const PasswordRecord& r : records) {
    for (const Move& m : r.password.moves()) ++counts[static_cast<std::size_t>(m.side)];
  }
  std::vector<std::string> labels;
  for (Side s : kAllSides) labels.emplace_back(side_name(s));
  return chi_square_uniformity(counts, std::move(labels));
}

}  // namespace semlock
