#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mmbias/embedding.hpp"
#include "mmbias/parallel.hpp"

namespace mmbias {

// Text embeddings ("This is X.") for one class.
struct ClassPrototypes {
  std::string label;
  std::vector<std::span<const float>> embeddings;
};

struct AccuracyReport {
  double accuracy = 0.0;
  std::vector<std::string> classes;  // prototype order
  std::map<std::string, double> per_class_accuracy;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t dims_used = 0;
  std::size_t images = 0;
  std::vector<std::string> warnings;
};

// Zero-shot prototype classification on the dimensions that survive
// `removed_dims`. Each class prototype is the mean of its unit-normalized
// text embeddings; images go to the argmax-cosine prototype (ties: lower
// class index). Throws ConfigError when an image label has no prototype.
AccuracyReport zero_shot_accuracy(const LabeledPoints& images,
                                  std::span<const ClassPrototypes> prototypes,
                                  std::span<const std::size_t> removed_dims = {},
                                  const ExecOptions& exec = {});

struct SeparabilityReport {
  double silhouette = 0.0;
  std::size_t points_used = 0;
  std::vector<std::string> warnings;
};

// Mean silhouette coefficient under cosine distance on the surviving
// dimensions. Classes with a single point are dropped with a warning; at
// least two classes must remain.
SeparabilityReport separability(const LabeledPoints& points,
                                std::span<const std::size_t> removed_dims = {},
                                const ExecOptions& exec = {});

}  // namespace mmbias
