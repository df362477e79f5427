#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmbias/bias_metrics.hpp"
#include "mmbias/embedding.hpp"
#include "mmbias/parallel.hpp"

namespace mmbias {

struct BatteryBias {
  double aggregate = 0.0;                 // mean |d| over usable tests
  std::vector<std::optional<double>> d;   // per test; empty when skipped
  std::vector<std::string> warnings;
};

// Caches every target/attribute dot product and squared norm of a cosine
// battery so that the battery can be re-scored with any set of dimensions
// deleted from both modalities without touching the embeddings. Removed
// coordinates are subtracted in ascending order; with nothing removed the
// arithmetic is identical to effect_size.
class BatteryEvaluator {
 public:
  BatteryEvaluator(std::vector<BiasTest> battery, StdDevConvention convention);

  std::size_t dims() const noexcept { return dims_; }
  const std::vector<BiasTest>& battery() const noexcept { return battery_; }
  StdDevConvention convention() const noexcept { return convention_; }

  // Degenerate tests are skipped with a warning; throws DegenerateError when
  // no test is usable.
  BatteryBias evaluate(std::span<const std::size_t> removed) const;

 private:
  struct TestCache {
    std::vector<std::span<const float>> targets;  // X then Y
    std::vector<std::span<const float>> attributes;  // A then B
    std::size_t nx = 0;
    std::size_t na = 0;
    std::vector<double> dots;  // targets x attributes
    std::vector<double> sq_targets;
    std::vector<double> sq_attributes;
  };

  std::optional<double> evaluate_test(std::size_t t, std::span<const std::size_t> removed,
                                      std::string& why) const;

  std::vector<BiasTest> battery_;
  StdDevConvention convention_;
  std::size_t dims_ = 0;
  std::vector<TestCache> caches_;
};

// Aggregate bias (mean |d|) of a cosine battery with `removed` dims deleted.
BatteryBias compute_bias(const std::vector<BiasTest>& battery,
                         StdDevConvention convention = StdDevConvention::population,
                         std::span<const std::size_t> removed = {});

// ceil(0.10 * dims).
std::size_t default_n_remove(std::size_t dims);

struct PruneConfig {
  std::optional<std::size_t> n_remove;  // default_n_remove(dims) when empty
  std::optional<double> theta;          // MI threshold in bits; empty = median MI
  std::size_t bins = 10;
  std::vector<BiasTest> battery;
  StdDevConvention std_dev = StdDevConvention::population;
};

// Everything about the candidate dimensions that does not depend on N.
struct PruneAnalysis {
  std::size_t dims = 0;
  double theta = 0.0;
  bool theta_auto = true;
  std::vector<double> mi_per_dim;
  std::map<std::size_t, double> psi_per_dim;  // dims that passed the MI gate
  std::vector<std::size_t> candidates;        // MI < theta and psi < baseline; ascending psi, then dim
  BatteryBias baseline;
  std::vector<std::string> warnings;
};

struct PruneResult {
  std::size_t n_remove = 0;
  std::vector<std::size_t> removed_dims;  // candidate order (ascending psi)
  double baseline_bias = 0.0;
  double final_bias = 0.0;
  std::vector<std::optional<double>> baseline_d;
  std::vector<std::optional<double>> final_d;
  double theta = 0.0;
  bool theta_auto = true;
  std::vector<double> mi_per_dim;
  std::map<std::size_t, double> psi_per_dim;
  std::vector<std::size_t> candidates;
  std::vector<std::string> warnings;
};

// MI of every image column against `images` labels, theta resolution, and
// the leave-one-out bias psi_d for every dim under the MI gate.
PruneAnalysis analyze_dimensions(const BatteryEvaluator& evaluator, const LabeledPoints& images,
                                 const PruneConfig& cfg, const ExecOptions& exec = {});

// Takes the first n candidates and re-scores the battery with all of them
// removed jointly.
PruneResult select_dimensions(const BatteryEvaluator& evaluator, const PruneAnalysis& analysis,
                              std::size_t n_remove);

PruneResult prune(const PruneConfig& cfg, const LabeledPoints& images, const ExecOptions& exec = {});

struct SweepMetrics {
  double accuracy = 0.0;
  std::optional<double> silhouette;
};

struct SweepRow {
  std::size_t n = 0;
  std::vector<std::size_t> removed_dims;
  std::optional<double> aggregate_bias;
  std::optional<double> accuracy;
  std::optional<double> silhouette;
  std::string error;
};

struct SweepResult {
  double theta = 0.0;
  bool theta_auto = true;
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

using SweepEvaluator = std::function<SweepMetrics(std::span<const std::size_t> removed)>;

// Rows for n = 0..n_max; the analysis is computed once and shared. A row
// that fails records its error and the sweep continues.
SweepResult sweep(const PruneConfig& cfg, const LabeledPoints& images, std::size_t n_max,
                   const SweepEvaluator& evaluate, const ExecOptions& exec = {});

}  // namespace mmbias
