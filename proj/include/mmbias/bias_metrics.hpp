#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmbias/embedding.hpp"
#include "mmbias/manifest.hpp"
#include "mmbias/parallel.hpp"

namespace mmbias {

enum class Scorer { cosine, itm };
enum class StdDevConvention { population, sample };

std::string to_string(Scorer scorer);
std::string to_string(StdDevConvention convention);
Scorer parse_scorer(const std::string& text);
StdDevConvention parse_std_dev(const std::string& text);

// Standard deviations below this are treated as "all phi values identical".
inline constexpr double kDegenerateStdDev = 1e-12;

// One association test: targets X/Y against attributes A/B.
struct BiasTest {
  std::string name;
  StimulusSet x;
  StimulusSet y;
  StimulusSet a;
  StimulusSet b;
  Scorer scorer = Scorer::cosine;
  // Per-target-item top-k filter for the ITM scorer.
  std::size_t top_k = 15;
};

// Throws ConfigError unless |x| == |y|, |a| == |b| and all dims agree.
void validate_test(const BiasTest& test);

struct ItemPhi {
  std::string set;
  std::size_t index = 0;
  std::string item;
  double phi = 0.0;
};

struct EffectSizeResult {
  double d = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double stddev = 0.0;
  std::vector<ItemPhi> phi_per_item;  // X items then Y items
  std::vector<std::string> warnings;
};

// Mean/std/d over per-item scores. Throws DegenerateError when the pooled
// standard deviation is below kDegenerateStdDev.
struct Standardized {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double stddev = 0.0;
  double d = 0.0;
};
Standardized standardized_difference(std::span<const double> phi_x, std::span<const double> phi_y,
                                     StdDevConvention convention);
// Same statistics without the degeneracy check (d is 0 when stddev is 0).
Standardized standardized_difference_unchecked(std::span<const double> phi_x,
                                               std::span<const double> phi_y,
                                               StdDevConvention convention);

// mean cos(w, a) - mean cos(w, b). Throws DegenerateError naming the
// zero-norm item, if any.
double phi_cosine(std::span<const float> w, const StimulusSet& a_set, const StimulusSet& b_set);

// phi from already computed cosines (ascending-index summation).
double phi_from_scores(std::span<const double> scores_a, std::span<const double> scores_b);

// Keeps the `top_k` highest probabilities over A then B (ties keep the
// earlier item, A before B) and returns mean(kept A) - mean(kept B); a side
// with nothing kept contributes 0. top_k is clamped to |A| + |B|.
double phi_itm(std::span<const double> sigma_a, std::span<const double> sigma_b, std::size_t top_k);

// Item-level variant reading sigma(target item, .) from the manifest blocks.
double phi_itm(const Manifest& manifest, const StimulusSet& target, std::size_t item,
               const StimulusSet& a_set, const StimulusSet& b_set, std::size_t top_k);

EffectSizeResult effect_size(const BiasTest& test,
                             StdDevConvention convention = StdDevConvention::population);

struct ItmGapResult {
  double delta = 0.0;  // mean_x - mean_y of the ITM phi
  std::optional<double> d;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double stddev = 0.0;
  std::size_t effective_top_k = 0;
  std::vector<ItemPhi> phi_per_item;
  std::vector<std::string> warnings;
};

// d with the ITM scorer. A degenerate std-dev leaves d empty and records a
// warning instead of throwing; delta is always reported.
ItmGapResult itm_fairness_gap(const BiasTest& test, const Manifest& manifest,
                              StdDevConvention convention = StdDevConvention::population);

struct AssociationEntry {
  std::string set;
  std::size_t index = 0;  // position within the concatenated vocabulary
  std::string attribute;
  double score = 0.0;
  std::string sentiment;
};

struct AssociationTable {
  std::string group;
  std::vector<AssociationEntry> ranked;
  std::vector<std::string> warnings;
};

// Scores each vocabulary item by mean cosine to the group's items and
// returns the k best (ties: lower vocabulary index first). `vocab` sets are
// concatenated in order. k larger than the vocabulary is clamped.
AssociationTable associate(const StimulusSet& group, std::span<const StimulusSet> vocab,
                           std::size_t k, const ExecOptions& exec = {});

}  // namespace mmbias
