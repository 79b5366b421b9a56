#pragma once

// Password-strength analytics: first-order Markov models of user choice,
// ranked password distributions, alpha-guesswork metrics, guessing curves,
// start/end heatmaps and usability metrics.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semlock/corpus.hpp"
#include "semlock/model.hpp"

namespace semlock {

inline constexpr double kNormalizationTolerance = 1e-12;

/// Bigram model over a token alphabet with a length prior. Construction
/// validates that the start vector, every transition row and the length
/// prior each sum to 1 within 1e-12.
class MarkovModel {
 public:
  MarkovModel(std::vector<std::string> alphabet, std::vector<double> start,
              std::vector<double> transition, double delta,
              std::map<std::size_t, double> length_prior);

  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  std::size_t alphabet_size() const noexcept { return alphabet_.size(); }
  const std::vector<double>& start() const noexcept { return start_; }
  double start(std::size_t token) const { return start_[token]; }
  double transition(std::size_t from, std::size_t to) const {
    return transition_[from * alphabet_.size() + to];
  }
  std::span<const double> transition_row(std::size_t from) const {
    return {transition_.data() + from * alphabet_.size(), alphabet_.size()};
  }
  double delta() const noexcept { return delta_; }
  const std::map<std::size_t, double>& length_prior() const noexcept { return length_prior_; }
  double length_prior(std::size_t k) const;

  /// Throws Error(kUnknownToken).
  std::size_t index_of(std::string_view token) const;

 private:
  std::vector<std::string> alphabet_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> start_;
  std::vector<double> transition_;  // row-major, A x A
  double delta_;
  std::map<std::size_t, double> length_prior_;
};

using TokenSequence = std::vector<std::string>;

/// Additive smoothing: start(t) = (c1(t) + d) / (N + d A) and
/// P(v | u) = (c(u, v) + d) / (c(u, .) + d A). A context never observed with
/// d = 0 gets a uniform row. The length prior is the empirical length
/// frequency. Throws kEmptyCorpus, kUnknownToken, kInvalidArgument.
MarkovModel train_markov(std::span<const TokenSequence> corpus,
                         std::vector<std::string> alphabet, double delta);

/// prior(k) * start(t1) * prod P(ti | ti-1) with k = tokens.size().
double sequence_probability(const MarkovModel& model, std::span<const std::string> tokens);
double sequence_probability(const MarkovModel& model, std::span<const std::size_t> tokens);

/// Canonical move strings, sorted; the token alphabet for semantic passwords.
std::vector<std::string> move_tokens(const IconSet& icons);
TokenSequence password_tokens(const SemanticPassword& password);
/// "1".."9".
std::vector<std::string> pattern_node_tokens();
TokenSequence pattern_tokens(const PatternRecord& record);
/// Every pattern of `min_len`..9 distinct nodes, in lexicographic order.
std::vector<std::vector<int>> enumerate_patterns(std::size_t min_len = kMinPatternNodes);

std::string model_to_json(const MarkovModel& model);
MarkovModel model_from_json(std::string_view text);

// ---------------------------------------------------------------------------
// Ranked distributions and guesswork

inline constexpr std::size_t kMaxRankedSpace = 10'000'000;

/// Probabilities sorted descending with ties broken by ascending item id.
class RankedDistribution {
 public:
  /// Throws kInvalidArgument on negative or non-finite probabilities,
  /// duplicate ids, or a total above 1 + 1e-9.
  explicit RankedDistribution(std::vector<std::pair<std::string, double>> entries);

  /// N equally likely items with zero-padded numeric ids.
  static RankedDistribution uniform(std::size_t n);
  /// Items get zero-padded ids in input order, then are ranked.
  static RankedDistribution from_probabilities(std::span<const double> probabilities);

  std::size_t size() const noexcept { return probs_.size(); }
  /// 0-based rank.
  double probability(std::size_t rank) const { return probs_[rank]; }
  const std::string& id(std::size_t rank) const { return ids_[rank]; }
  /// Success rate after `guesses` guesses (clamped to the support size).
  double cumulative(std::size_t guesses) const;
  double total() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  std::span<const double> probabilities() const noexcept { return probs_; }

 private:
  std::vector<std::string> ids_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;  // cumulative_[i] = sum of probs_[0..i]
};

/// Assigns every password its model probability and ranks them; item ids
/// are canonical strings. Throws kSpaceTooLarge and kInvalidArgument
/// (duplicates).
RankedDistribution rank_space(const MarkovModel& model,
                              std::span<const SemanticPassword> space);
RankedDistribution rank_patterns(const MarkovModel& model,
                                 std::span<const std::vector<int>> space);

/// Comparisons of cumulative mass against alpha allow this much slack for
/// floating-point summation.
inline constexpr double kAlphaSlack = 1e-12;

/// Sum of the beta largest probabilities. Throws kInvalidArgument for beta < 1.
double lambda_beta(const RankedDistribution& dist, std::size_t beta);
/// Smallest j with lambda_j >= alpha. Throws kInvalidArgument for alpha
/// outside (0, 1] and kAlphaUnreachable when the total mass is below alpha.
std::size_t mu_alpha(const RankedDistribution& dist, double alpha);
/// (1 - lambda) mu + sum_{i <= mu} p_i i, with mu = mu_alpha and
/// lambda = lambda_mu.
double g_alpha(const RankedDistribution& dist, double alpha);
/// Effective key length in bits: log2(2 G / lambda - 1) - log2(2 - lambda).
/// A uniform distribution over N items scores log2 N at every alpha.
double g_tilde_alpha(const RankedDistribution& dist, double alpha);

struct GuessworkReport {
  double alpha = 0.0;
  std::size_t mu = 0;
  double lambda = 0.0;
  double g = 0.0;
  double g_tilde_bits = 0.0;
};

GuessworkReport guesswork(const RankedDistribution& dist, double alpha);
std::string guesswork_csv(std::span<const GuessworkReport> rows);
std::string guesswork_json(std::span<const GuessworkReport> rows);

struct CurvePoint {
  std::size_t attempts;
  double success_pct;
};

/// (i, 100 lambda_i) for i = 1..max_attempts. Throws kInvalidArgument when
/// max_attempts exceeds the support.
std::vector<CurvePoint> guessing_curve(const RankedDistribution& dist,
                                       std::size_t max_attempts);
std::string curve_csv(std::span<const CurvePoint> curve);
std::string curve_json(std::span<const CurvePoint> curve);

// ---------------------------------------------------------------------------
// Heatmaps

struct Heatmap {
  int cols = 0;
  int rows = 0;
  std::vector<std::uint64_t> counts;  // row-major
  std::vector<double> pct;            // row-major, sums to 100

  double at(int col, int row) const { return pct[static_cast<std::size_t>(row * cols + col)]; }
};

/// Throws kEmptyInput, or kInvalidArgument for out-of-bounds cells.
Heatmap endpoint_heatmap(std::span<const Cell> cells, int cols, int rows);

enum class Endpoint { kStart, kEnd };

/// Node n of a 3 x 3 pattern sits at ((n-1) % 3, (n-1) / 3).
Cell pattern_endpoint(const PatternRecord& record, Endpoint which);

/// Start: the cell the first moved icon is picked up from. End: the cell
/// the last moved icon rests in after replaying the moves' relative
/// placements on the default layout. Empty when a placement leaves the grid.
std::optional<Cell> password_endpoint(const SemanticPassword& password, const GridSpec& grid,
                                      Endpoint which);

std::string heatmap_csv(const Heatmap& heatmap);
std::string heatmap_json(const Heatmap& heatmap);

// ---------------------------------------------------------------------------
// Usability

struct UsabilityMetrics {
  std::size_t attempts = 0;
  std::size_t successes = 0;
  /// first touch - ready, over every attempt that has both marks.
  std::optional<double> mean_pre_login_delay_ms;
  /// completed - first touch, over successful attempts only.
  std::optional<double> mean_login_speed_ms;
  /// failures / attempts, as a percentage.
  double error_rate_pct = 0.0;
};

/// Throws kEmptyInput, or kInvalidArgument for events failing validation.
std::map<Technique, UsabilityMetrics> usability_metrics(std::span<const AttemptEvent> events);
std::string metrics_csv(const std::map<Technique, UsabilityMetrics>& metrics);
std::string metrics_json(const std::map<Technique, UsabilityMetrics>& metrics);

}  // namespace semlock
