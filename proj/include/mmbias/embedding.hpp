#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mmbias {

// Dense row-major matrix of embedding vectors, one item per row. Values are
// stored exactly as produced by the encoder (no normalization).
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  // Throws DataFormatError if the shape is empty, values.size() != rows*dims,
  // or any value is non-finite (the message names the offending row/column).
  EmbeddingMatrix(std::size_t rows, std::size_t dims, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dims() const noexcept { return dims_; }

  std::span<const float> row(std::size_t r) const {
    return {values_.data() + r * dims_, dims_};
  }
  float at(std::size_t r, std::size_t c) const { return values_[r * dims_ + c]; }
  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dims_ = 0;
  std::vector<float> values_;
};

enum class SetKind { target, attribute };
enum class Modality { image, text };

std::string to_string(SetKind kind);
std::string to_string(Modality modality);
SetKind parse_set_kind(const std::string& text);
Modality parse_modality(const std::string& text);

// A named group of stimuli (X, Y, A or B) referencing rows of one matrix.
struct StimulusSet {
  std::string name;
  SetKind kind = SetKind::target;
  Modality modality = Modality::image;
  std::vector<std::size_t> item_ids;
  std::string source_matrix;
  std::shared_ptr<const EmbeddingMatrix> matrix;
  // Optional per-item display names and sentiment tags; empty when absent.
  std::vector<std::string> item_names;
  std::vector<std::string> sentiments;

  std::size_t size() const noexcept { return item_ids.size(); }
  std::size_t dims() const noexcept { return matrix ? matrix->dims() : 0; }
  std::span<const float> vector(std::size_t i) const { return matrix->row(item_ids[i]); }
  std::string item_name(std::size_t i) const;
  std::string sentiment(std::size_t i) const;
};

// Builds a set over `ids` (all rows when empty) and checks the set invariants:
// non-empty, in range, no duplicates. Throws DataFormatError.
StimulusSet make_stimulus_set(std::string name, SetKind kind, Modality modality,
                              std::shared_ptr<const EmbeddingMatrix> matrix,
                              std::vector<std::size_t> ids = {},
                              std::string source_matrix = {});

// Image-by-text match probabilities for one (image set, text set) block.
class ItmMatrix {
 public:
  ItmMatrix() = default;
  // Throws DataFormatError if any probability lies outside [0, 1].
  ItmMatrix(std::string image_set, std::string text_set, EmbeddingMatrix probs);

  const std::string& image_set() const noexcept { return image_set_; }
  const std::string& text_set() const noexcept { return text_set_; }
  std::size_t image_rows() const noexcept { return probs_.rows(); }
  std::size_t text_cols() const noexcept { return probs_.dims(); }
  double at(std::size_t image, std::size_t text) const { return probs_.at(image, text); }
  const EmbeddingMatrix& probabilities() const noexcept { return probs_; }

 private:
  std::string image_set_;
  std::string text_set_;
  EmbeddingMatrix probs_;
};

// Vectors with integer class labels; labels index into `classes`.
struct LabeledPoints {
  std::vector<std::span<const float>> points;
  std::vector<std::size_t> labels;
  std::vector<std::string> classes;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t dims() const noexcept { return points.empty() ? 0 : points.front().size(); }
  // Appends every item of `set` with the matching entry of `item_labels`.
  void append(const StimulusSet& set, const std::vector<std::string>& item_labels);
};

}  // namespace mmbias
