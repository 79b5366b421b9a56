#include "semlock/strength.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "semlock/error.hpp"

namespace semlock {

using nlohmann::json;

namespace {

double sum_of(std::span<const double> values) {
  // Neumaier compensated summation.
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    carry += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

void require_normalized(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, std::string(what) + " has a negative or non-finite entry");
    }
  }
  if (std::fabs(sum_of(values) - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " does not sum to 1");
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string padded_index(std::size_t i, std::size_t n) {
  const std::size_t width = std::to_string(n == 0 ? 0 : n - 1).size();
  std::string s = std::to_string(i);
  return std::string(width - s.size(), '0') + s;
}

}  // namespace

// ---------------------------------------------------------------------------
// MarkovModel

MarkovModel::MarkovModel(std::vector<std::string> alphabet, std::vector<double> start,
                         std::vector<double> transition, double delta,
                         std::map<std::size_t, double> length_prior)
    : alphabet_(std::move(alphabet)), start_(std::move(start)),
      transition_(std::move(transition)), delta_(delta),
      length_prior_(std::move(length_prior)) {
  const std::size_t a = alphabet_.size();
  if (a == 0) throw Error(ErrorCode::kInvalidArgument, "empty alphabet");
  for (std::size_t i = 0; i < a; ++i) {
    if (!index_.emplace(alphabet_[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate token '" + alphabet_[i] + "'");
    }
  }
  if (start_.size() != a || transition_.size() != a * a) {
    throw Error(ErrorCode::kInvalidArgument, "model dimensions do not match the alphabet");
  }
  if (!(delta_ >= 0.0) || !std::isfinite(delta_)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be finite and >= 0");
  }
  require_normalized(start_, "start vector");
  for (std::size_t u = 0; u < a; ++u) require_normalized(transition_row(u), "transition row");
  std::vector<double> prior;
  for (const auto& [k, p] : length_prior_) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "length prior needs lengths >= 1");
    prior.push_back(p);
  }
  require_normalized(prior, "length prior");
}

double MarkovModel::length_prior(std::size_t k) const {
  auto it = length_prior_.find(k);
  return it == length_prior_.end() ? 0.0 : it->second;
}

std::size_t MarkovModel::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownToken, "token '" + std::string(token) + "' not in alphabet");
  }
  return it->second;
}

MarkovModel train_markov(std::span<const TokenSequence> corpus,
                         std::vector<std::string> alphabet, double delta) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "training corpus is empty");
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be finite and >= 0");
  }
  const std::size_t a = alphabet.size();
  if (a == 0) throw Error(ErrorCode::kInvalidArgument, "empty alphabet");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < a; ++i) index.emplace(alphabet[i], i);

  std::vector<double> start_counts(a, 0.0);
  std::vector<double> pair_counts(a * a, 0.0);
  std::map<std::size_t, double> length_counts;
  for (const TokenSequence& seq : corpus) {
    if (seq.empty()) throw Error(ErrorCode::kInvalidArgument, "empty sequence in corpus");
    std::size_t prev = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      auto it = index.find(seq[i]);
      if (it == index.end()) {
        throw Error(ErrorCode::kUnknownToken, "token '" + seq[i] + "' not in alphabet");
      }
      if (i == 0) {
        start_counts[it->second] += 1.0;
      } else {
        pair_counts[prev * a + it->second] += 1.0;
      }
      prev = it->second;
    }
    length_counts[seq.size()] += 1.0;
  }

  const double n = static_cast<double>(corpus.size());
  const double ad = static_cast<double>(a);
  std::vector<double> start(a);
  for (std::size_t t = 0; t < a; ++t) start[t] = (start_counts[t] + delta) / (n + delta * ad);

  std::vector<double> transition(a * a);
  for (std::size_t u = 0; u < a; ++u) {
    const double row_total =
        std::accumulate(pair_counts.begin() + static_cast<std::ptrdiff_t>(u * a),
                        pair_counts.begin() + static_cast<std::ptrdiff_t>((u + 1) * a), 0.0);
    const double denom = row_total + delta * ad;
    for (std::size_t v = 0; v < a; ++v) {
      transition[u * a + v] = denom > 0.0 ? (pair_counts[u * a + v] + delta) / denom : 1.0 / ad;
    }
  }

  std::map<std::size_t, double> prior;
  for (const auto& [len, c] : length_counts) prior[len] = c / n;
  return MarkovModel(std::move(alphabet), std::move(start), std::move(transition), delta,
                     std::move(prior));
}

double sequence_probability(const MarkovModel& model, std::span<const std::size_t> tokens) {
  if (tokens.empty()) throw Error(ErrorCode::kInvalidArgument, "sequence must be non-empty");
  double p = model.length_prior(tokens.size()) * model.start(tokens[0]);
  for (std::size_t i = 1; i < tokens.size(); ++i) p *= model.transition(tokens[i - 1], tokens[i]);
  return p;
}

double sequence_probability(const MarkovModel& model, std::span<const std::string> tokens) {
  std::vector<std::size_t> idx;
  idx.reserve(tokens.size());
  for (const std::string& t : tokens) idx.push_back(model.index_of(t));
  return sequence_probability(model, std::span<const std::size_t>(idx));
}

std::vector<std::string> move_tokens(const IconSet& icons) {
  std::vector<std::string> out;
  for (const Move& m : move_alphabet(icons)) out.push_back(canonical_move(m));
  return out;
}

TokenSequence password_tokens(const SemanticPassword& password) {
  TokenSequence out;
  for (const Move& m : password.moves()) out.push_back(canonical_move(m));
  return out;
}

std::vector<std::string> pattern_node_tokens() {
  std::vector<std::string> out;
  for (int n = 1; n <= 9; ++n) out.push_back(std::to_string(n));
  return out;
}

TokenSequence pattern_tokens(const PatternRecord& record) {
  TokenSequence out;
  for (int n : record.nodes) out.push_back(std::to_string(n));
  return out;
}

std::vector<std::vector<int>> enumerate_patterns(std::size_t min_len) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  std::array<bool, 10> used{};
  auto dfs = [&](auto&& self) -> void {
    if (current.size() >= min_len) out.push_back(current);
    if (current.size() == 9) return;
    for (int n = 1; n <= 9; ++n) {
      if (used[n]) continue;
      used[n] = true;
      current.push_back(n);
      self(self);
      current.pop_back();
      used[n] = false;
    }
  };
  dfs(dfs);
  return out;
}

std::string model_to_json(const MarkovModel& model) {
  json j;
  j["alphabet"] = model.alphabet();
  j["delta"] = model.delta();
  j["start"] = model.start();
  json rows = json::array();
  for (std::size_t u = 0; u < model.alphabet_size(); ++u) {
    auto row = model.transition_row(u);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["transition"] = std::move(rows);
  json prior = json::object();
  for (const auto& [k, p] : model.length_prior()) prior[std::to_string(k)] = p;
  j["length_prior"] = std::move(prior);
  return j.dump() + "\n";
}

MarkovModel model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    std::vector<double> transition;
    for (const json& row : j.at("transition")) {
      for (const json& v : row) transition.push_back(v.get<double>());
    }
    std::map<std::size_t, double> prior;
    for (const auto& [k, v] : j.at("length_prior").items()) {
      prior[static_cast<std::size_t>(std::stoul(k))] = v.get<double>();
    }
    return MarkovModel(j.at("alphabet").get<std::vector<std::string>>(),
                       j.at("start").get<std::vector<double>>(), std::move(transition),
                       j.at("delta").get<double>(), std::move(prior));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model JSON: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::kParseError, std::string("model JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// RankedDistribution

RankedDistribution::RankedDistribution(std::vector<std::pair<std::string, double>> entries) {
  for (const auto& [id, p] : entries) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "probability of '" + id + "' is invalid");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  {
    std::vector<std::string_view> ids;
    ids.reserve(entries.size());
    for (const auto& e : entries) ids.push_back(e.first);
    std::sort(ids.begin(), ids.end());
    if (auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end()) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate item '" + std::string(*dup) + "'");
    }
  }
  ids_.reserve(entries.size());
  probs_.reserve(entries.size());
  for (auto& [id, p] : entries) {
    ids_.push_back(std::move(id));
    probs_.push_back(p);
  }
  cumulative_.resize(probs_.size());
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double v = probs_[i];
    const double t = sum + v;
    carry += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
    cumulative_[i] = sum + carry;
  }
  if (total() > 1.0 + 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "total probability exceeds 1");
  }
}

RankedDistribution RankedDistribution::uniform(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "uniform distribution needs n >= 1");
  std::vector<std::pair<std::string, double>> entries;
  entries.reserve(n);
  const double p = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) entries.emplace_back(padded_index(i, n), p);
  return RankedDistribution(std::move(entries));
}

RankedDistribution RankedDistribution::from_probabilities(std::span<const double> probabilities) {
  std::vector<std::pair<std::string, double>> entries;
  entries.reserve(probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    entries.emplace_back(padded_index(i, probabilities.size()), probabilities[i]);
  }
  return RankedDistribution(std::move(entries));
}

double RankedDistribution::cumulative(std::size_t guesses) const {
  if (guesses == 0 || cumulative_.empty()) return 0.0;
  return cumulative_[std::min(guesses, cumulative_.size()) - 1];
}

namespace {

template <typename Item, typename IdFn, typename TokensFn>
RankedDistribution rank_items(const MarkovModel& model, std::span<const Item> space, IdFn id_of,
                              TokensFn tokens_of) {
  if (space.size() > kMaxRankedSpace) {
    throw Error(ErrorCode::kSpaceTooLarge,
                "space of " + std::to_string(space.size()) + " exceeds the ranking cap");
  }
  std::vector<std::pair<std::string, double>> entries;
  entries.reserve(space.size());
  std::vector<std::size_t> idx;
  for (const Item& item : space) {
    idx.clear();
    for (const std::string& t : tokens_of(item)) idx.push_back(model.index_of(t));
    entries.emplace_back(id_of(item), sequence_probability(model, std::span<const std::size_t>(idx)));
  }
  return RankedDistribution(std::move(entries));
}

}  // namespace

RankedDistribution rank_space(const MarkovModel& model, std::span<const SemanticPassword> space) {
  return rank_items(model, space, [](const SemanticPassword& p) { return canonicalize(p); },
                    [](const SemanticPassword& p) { return password_tokens(p); });
}

RankedDistribution rank_patterns(const MarkovModel& model,
                                 std::span<const std::vector<int>> space) {
  return rank_items(
      model, space,
      [](const std::vector<int>& nodes) {
        std::string id;
        for (int n : nodes) id += static_cast<char>('0' + n);
        return id;
      },
      [](const std::vector<int>& nodes) {
        TokenSequence out;
        for (int n : nodes) out.push_back(std::to_string(n));
        return out;
      });
}

// ---------------------------------------------------------------------------
// Guesswork

double lambda_beta(const RankedDistribution& dist, std::size_t beta) {
  if (beta < 1) throw Error(ErrorCode::kInvalidArgument, "beta must be >= 1");
  return dist.cumulative(beta);
}

std::size_t mu_alpha(const RankedDistribution& dist, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1]");
  }
  const double target = alpha - kAlphaSlack;
  if (dist.size() == 0 || dist.total() < target) {
    throw Error(ErrorCode::kAlphaUnreachable,
                "distribution mass " + format_number(dist.total()) + " is below alpha " +
                    format_number(alpha));
  }
  // Cumulative mass is nondecreasing, so the first rank reaching the target
  // can be found by bisection.
  std::size_t lo = 1, hi = dist.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (dist.cumulative(mid) >= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

GuessworkReport guesswork(const RankedDistribution& dist, double alpha) {
  GuessworkReport r;
  r.alpha = alpha;
  r.mu = mu_alpha(dist, alpha);
  r.lambda = dist.cumulative(r.mu);
  std::vector<double> weighted(r.mu);
  for (std::size_t i = 0; i < r.mu; ++i) weighted[i] = dist.probability(i) * static_cast<double>(i + 1);
  r.g = (1.0 - r.lambda) * static_cast<double>(r.mu) + sum_of(weighted);
  r.g_tilde_bits = std::log2(2.0 * r.g / r.lambda - 1.0) - std::log2(2.0 - r.lambda);
  return r;
}

double g_alpha(const RankedDistribution& dist, double alpha) { return guesswork(dist, alpha).g; }

double g_tilde_alpha(const RankedDistribution& dist, double alpha) {
  return guesswork(dist, alpha).g_tilde_bits;
}

std::string guesswork_csv(std::span<const GuessworkReport> rows) {
  std::ostringstream os;
  os << "alpha,mu,lambda,G,G_tilde_bits\n";
  for (const auto& r : rows) {
    os << format_number(r.alpha) << ',' << r.mu << ',' << format_number(r.lambda) << ','
       << format_number(r.g) << ',' << format_number(r.g_tilde_bits) << '\n';
  }
  return os.str();
}

std::string guesswork_json(std::span<const GuessworkReport> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"alpha", r.alpha}, {"mu", r.mu}, {"lambda", r.lambda}, {"G", r.g},
                   {"G_tilde_bits", r.g_tilde_bits}});
  }
  return arr.dump(2) + "\n";
}

std::vector<CurvePoint> guessing_curve(const RankedDistribution& dist, std::size_t max_attempts) {
  if (max_attempts > dist.size()) {
    throw Error(ErrorCode::kInvalidArgument, "max attempts exceeds the distribution support");
  }
  std::vector<CurvePoint> out;
  out.reserve(max_attempts);
  for (std::size_t i = 1; i <= max_attempts; ++i) out.push_back({i, 100.0 * dist.cumulative(i)});
  return out;
}

std::string curve_csv(std::span<const CurvePoint> curve) {
  std::ostringstream os;
  os << "attempts,success_pct\n";
  for (const auto& p : curve) os << p.attempts << ',' << format_number(p.success_pct) << '\n';
  return os.str();
}

std::string curve_json(std::span<const CurvePoint> curve) {
  json arr = json::array();
  for (const auto& p : curve) arr.push_back({{"attempts", p.attempts}, {"success_pct", p.success_pct}});
  return arr.dump() + "\n";
}

// ---------------------------------------------------------------------------
// Heatmaps

Heatmap endpoint_heatmap(std::span<const Cell> cells, int cols, int rows) {
  if (cols < 1 || rows < 1) throw Error(ErrorCode::kInvalidArgument, "heatmap needs a positive size");
  if (cells.empty()) throw Error(ErrorCode::kEmptyInput, "no endpoints to aggregate");
  Heatmap h;
  h.cols = cols;
  h.rows = rows;
  h.counts.assign(static_cast<std::size_t>(cols * rows), 0);
  for (const Cell& c : cells) {
    if (c.col < 0 || c.col >= cols || c.row < 0 || c.row >= rows) {
      throw Error(ErrorCode::kInvalidArgument, "endpoint outside the heatmap grid");
    }
    ++h.counts[static_cast<std::size_t>(c.row * cols + c.col)];
  }
  const double total = static_cast<double>(cells.size());
  h.pct.resize(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    h.pct[i] = 100.0 * static_cast<double>(h.counts[i]) / total;
  }
  return h;
}

Cell pattern_endpoint(const PatternRecord& record, Endpoint which) {
  validate_pattern(record);
  const int node = which == Endpoint::kStart ? record.nodes.front() : record.nodes.back();
  return {(node - 1) % 3, (node - 1) / 3};
}

std::optional<Cell> password_endpoint(const SemanticPassword& password, const GridSpec& grid,
                                      Endpoint which) {
  const auto moves = password.moves();
  if (which == Endpoint::kStart) return grid.cell_of(moves.front().moved.str());
  std::vector<Cell> cells = grid.placement();
  const IconSet& icons = grid.icons();
  for (const Move& m : moves) {
    const Cell target = neighbor(cells[icons.ordinal(m.anchor.str())], m.side);
    if (!grid.in_bounds(target)) return std::nullopt;
    cells[icons.ordinal(m.moved.str())] = target;
  }
  return cells[icons.ordinal(moves.back().moved.str())];
}

std::string heatmap_csv(const Heatmap& heatmap) {
  std::ostringstream os;
  os << "col,row,pct\n";
  for (int r = 0; r < heatmap.rows; ++r) {
    for (int c = 0; c < heatmap.cols; ++c) {
      os << c << ',' << r << ',' << format_number(heatmap.at(c, r)) << '\n';
    }
  }
  return os.str();
}

std::string heatmap_json(const Heatmap& heatmap) {
  json j;
  j["cols"] = heatmap.cols;
  j["rows"] = heatmap.rows;
  json cells = json::array();
  for (int r = 0; r < heatmap.rows; ++r) {
    for (int c = 0; c < heatmap.cols; ++c) {
      cells.push_back({{"col", c}, {"row", r}, {"pct", heatmap.at(c, r)}});
    }
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Usability

std::map<Technique, UsabilityMetrics> usability_metrics(std::span<const AttemptEvent> events) {
  if (events.empty()) throw Error(ErrorCode::kEmptyInput, "no attempt events");
  struct Acc {
    UsabilityMetrics m;
    double delay_sum = 0.0;
    std::size_t delay_n = 0;
    double speed_sum = 0.0;
    std::size_t speed_n = 0;
  };
  std::map<Technique, Acc> acc;
  for (const AttemptEvent& e : events) {
    validate_event(e);
    Acc& a = acc[e.technique];
    ++a.m.attempts;
    if (e.success) ++a.m.successes;
    if (e.ready_ms && e.touch_ms) {
      a.delay_sum += static_cast<double>(*e.touch_ms - *e.ready_ms);
      ++a.delay_n;
    }
    if (e.success && e.touch_ms && e.done_ms) {
      a.speed_sum += static_cast<double>(*e.done_ms - *e.touch_ms);
      ++a.speed_n;
    }
  }
  std::map<Technique, UsabilityMetrics> out;
  for (auto& [tech, a] : acc) {
    if (a.delay_n > 0) a.m.mean_pre_login_delay_ms = a.delay_sum / static_cast<double>(a.delay_n);
    if (a.speed_n > 0) a.m.mean_login_speed_ms = a.speed_sum / static_cast<double>(a.speed_n);
    a.m.error_rate_pct = 100.0 * static_cast<double>(a.m.attempts - a.m.successes) /
                         static_cast<double>(a.m.attempts);
    out.emplace(tech, a.m);
  }
  return out;
}

std::string metrics_csv(const std::map<Technique, UsabilityMetrics>& metrics) {
  std::ostringstream os;
  os << "technique,attempts,successes,pre_login_delay_ms,login_speed_ms,error_rate_pct\n";
  for (const auto& [tech, m] : metrics) {
    os << technique_name(tech) << ',' << m.attempts << ',' << m.successes << ','
       << (m.mean_pre_login_delay_ms ? format_number(*m.mean_pre_login_delay_ms) : "") << ','
       << (m.mean_login_speed_ms ? format_number(*m.mean_login_speed_ms) : "") << ','
       << format_number(m.error_rate_pct) << '\n';
  }
  return os.str();
}

std::string metrics_json(const std::map<Technique, UsabilityMetrics>& metrics) {
  json arr = json::array();
  for (const auto& [tech, m] : metrics) {
    json row;
    row["technique"] = technique_name(tech);
    row["attempts"] = m.attempts;
    row["successes"] = m.successes;
    row["pre_login_delay_ms"] = m.mean_pre_login_delay_ms ? json(*m.mean_pre_login_delay_ms) : json();
    row["login_speed_ms"] = m.mean_login_speed_ms ? json(*m.mean_login_speed_ms) : json();
    row["error_rate_pct"] = m.error_rate_pct;
    arr.push_back(std::move(row));
  }
  return arr.dump(2) + "\n";
}

}  // namespace semlock
