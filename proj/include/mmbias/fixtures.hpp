#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mmbias/bias_metrics.hpp"
#include "mmbias/eval.hpp"
#include "mmbias/manifest.hpp"

namespace mmbias {

// Reproducible random source for fixtures: std::mt19937_64 (fully specified
// by the standard) with uniforms taken from the top 53 bits and Gaussians
// from the Box-Muller transform, so the stream is identical on every
// conforming platform.
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double normal(double stddev);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// Synthetic embeddings whose bias lives only on `bias_dims`.
//
// Images: X item i carries +bias_strength * level on every bias dim and Y
// item i is its mirror with those coordinates negated. Levels are drawn
// uniformly from [0.5, 1.5) per bias dim and per block of |class_dims|
// consecutive items, so each block covers every class exactly once. Item i
// belongs to class i % |class_dims| and carries class_strength on that class
// dim. Attributes: A is +1 and B is -1 on the bias dims. Prompts for class k
// carry class_strength on class_dims[k]. Every remaining coordinate of every
// vector is Gaussian noise of scale noise_scale.
struct PlantedBiasSpec {
  std::size_t dims = 16;
  std::vector<std::size_t> bias_dims{2, 5};
  std::vector<std::size_t> class_dims{8, 9, 10, 11};
  std::size_t items_per_set = 100;
  double bias_strength = 3.0;
  double noise_scale = 0.1;
  double class_strength = 30.0;
  std::size_t prompts_per_class = 3;
  std::uint64_t seed = 1;
  // When bias_strength > 0 the generated test must reach |d| >= min_effect;
  // otherwise the seed is advanced (at most max_reseeds times) and the
  // number of re-samples is recorded. 0 disables the gate.
  double min_effect = 1.5;
  std::size_t max_reseeds = 32;
};

// Throws ConfigError for overlapping or out-of-range dims, fewer than two
// classes, items_per_set < 2, or negative scales.
void validate(const PlantedBiasSpec& spec);

struct PlantedFixture {
  PlantedBiasSpec spec;
  std::uint64_t effective_seed = 0;
  std::size_t reseeds = 0;
  std::optional<double> effect_size;  // d of the cosine test, if defined
  Manifest manifest;
  std::vector<std::string> classes;

  BiasTest test() const;
  BiasTest itm_test() const;
  LabeledPoints images() const;
  std::vector<ClassPrototypes> prototypes() const;
};

inline constexpr const char* kFixtureX = "x_images";
inline constexpr const char* kFixtureY = "y_images";
inline constexpr const char* kFixtureA = "a_attributes";
inline constexpr const char* kFixtureB = "b_attributes";

PlantedFixture generate_planted(const PlantedBiasSpec& spec);

// Writes manifest.json, one .mmbe per set / ITM block, and a ready-to-run
// config.json into `dir` (created if needed).
void write_fixture(const PlantedFixture& fixture, const std::filesystem::path& dir);

}  // namespace mmbias
