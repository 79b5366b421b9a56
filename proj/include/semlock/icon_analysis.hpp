#pragma once

// Stage-1 icon analytics: pair co-occurrence, least-related subset
// selection and chi-square uniformity tests.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semlock/corpus.hpp"
#include "semlock/model.hpp"

namespace semlock {

/// Symmetric pair-count matrix with a zero diagonal.
class CooccurrenceMatrix {
 public:
  explicit CooccurrenceMatrix(std::vector<IconId> icons);

  /// Throws Error(kInvalidArgument) unless `counts` is square, symmetric,
  /// zero on the diagonal and sized to `icons`.
  static CooccurrenceMatrix from_counts(std::vector<IconId> icons,
                                        const std::vector<std::vector<std::uint64_t>>& counts);

  void add(std::size_t i, std::size_t j, std::uint64_t n = 1);

  std::size_t size() const noexcept { return icons_.size(); }
  const std::vector<IconId>& icons() const noexcept { return icons_; }
  std::uint64_t count(std::size_t i, std::size_t j) const { return counts_[i * size() + j]; }
  /// Sum over unordered pairs, i.e. the number of observations counted.
  std::uint64_t total() const noexcept { return total_; }

 private:
  std::vector<IconId> icons_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Order-insensitive pair counts. Throws Error(kUnknownIcon).
CooccurrenceMatrix count_pairs(std::span<const PairObservation> observations,
                               const IconSet& icons);

enum class SelectionMode { kExact, kGreedy };

enum class SelectionObjective {
  kSum,  // sum of internal pair counts
  kMax,  // largest internal pair count
};

struct Selection {
  std::vector<IconId> icons;  // sorted ascending
  std::uint64_t objective = 0;
  std::uint64_t nodes_visited = 0;
};

inline constexpr std::uint64_t kExactSubsetCap = 10'000'000;

/// Number of k-subsets of m, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t m, std::uint64_t k) noexcept;

/// Size-k subset with the smallest internal co-occurrence. Ties go to the
/// lexicographically smallest sorted id list in both modes.
///
/// Exact mode is a depth-first branch and bound over ids in ascending
/// order. A branch is cut once its partial objective plus the cheapest
/// possible completion (the r smallest per-candidate increments) cannot
/// beat the incumbent, so the first optimum found is also the
/// lexicographically smallest one.
///
/// Greedy mode seeds with the least co-occurring pair and then repeatedly
/// adds the icon with the smallest objective increment.
///
/// Throws kKTooLarge (k > m), kInvalidArgument (k == 0) and
/// kSubsetTooLarge (exact mode with C(m, k) > 10,000,000).
Selection select_least_related(const CooccurrenceMatrix& matrix, std::size_t k,
                               SelectionMode mode,
                               SelectionObjective objective = SelectionObjective::kSum);

/// Objective of an arbitrary subset given by matrix indices.
std::uint64_t subset_objective(const CooccurrenceMatrix& matrix,
                               std::span<const std::size_t> members,
                               SelectionObjective objective);

// ---------------------------------------------------------------------------
// Chi-square uniformity

/// Regularized upper incomplete gamma Q(a, x) for a > 0, x >= 0. Uses the
/// power series for P when x < a + 1/2 and a Lentz continued fraction
/// otherwise; relative error is below 1e-10 across the chi-square range.
double regularized_gamma_q(double a, double x);

struct UniformityReport {
  std::vector<std::string> categories;
  std::vector<std::uint64_t> observed;
  double expected = 0.0;
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Pearson statistic against the uniform expectation. Throws
/// Error(kDegenerateInput) for fewer than two categories or a zero total.
UniformityReport chi_square_uniformity(std::span<const std::uint64_t> observed,
                                       std::vector<std::string> labels = {});

std::string uniformity_csv(const UniformityReport& report);
std::string uniformity_json(const UniformityReport& report);

/// Number of passwords that use each icon at least once.
UniformityReport icon_usage(std::span<const PasswordRecord> records, const IconSet& icons);
/// Each move is decomposed into its unordered (moved, anchor) pair;
/// categories are all C(n, 2) pairs.
UniformityReport pair_usage(std::span<const PasswordRecord> records, const IconSet& icons);
/// Resting-position counts over every move.
UniformityReport side_usage(std::span<const PasswordRecord> records);

}  // namespace semlock
