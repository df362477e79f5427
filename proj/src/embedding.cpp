#include "mmbias/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "mmbias/errors.hpp"

namespace mmbias {

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dims, std::vector<float> values)
    : rows_(rows), dims_(dims), values_(std::move(values)) {
  if (rows_ == 0 || dims_ == 0) {
    std::ostringstream msg;
    msg << "embedding matrix must have at least one row and one column (got " << rows_ << "x"
        << dims_ << ")";
    throw DataFormatError(msg.str());
  }
  if (values_.size() != rows_ * dims_) {
    std::ostringstream msg;
    msg << "embedding matrix " << rows_ << "x" << dims_ << " expects " << rows_ * dims_
        << " values, got " << values_.size();
    throw DataFormatError(msg.str());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream msg;
      msg << "non-finite value at row " << i / dims_ << ", column " << i % dims_;
      throw DataFormatError(msg.str());
    }
  }
}

std::string to_string(SetKind kind) { return kind == SetKind::target ? "target" : "attribute"; }

std::string to_string(Modality modality) {
  return modality == Modality::image ? "image" : "text";
}

SetKind parse_set_kind(const std::string& text) {
  if (text == "target") return SetKind::target;
  if (text == "attribute") return SetKind::attribute;
  throw DataFormatError("unknown set kind '" + text + "' (expected target|attribute)");
}

Modality parse_modality(const std::string& text) {
  if (text == "image") return Modality::image;
  if (text == "text") return Modality::text;
  throw DataFormatError("unknown modality '" + text + "' (expected image|text)");
}

std::string StimulusSet::item_name(std::size_t i) const {
  if (i < item_names.size()) return item_names[i];
  return name + "#" + std::to_string(i);
}

std::string StimulusSet::sentiment(std::size_t i) const {
  return i < sentiments.size() ? sentiments[i] : std::string{};
}

StimulusSet make_stimulus_set(std::string name, SetKind kind, Modality modality,
                              std::shared_ptr<const EmbeddingMatrix> matrix,
                              std::vector<std::size_t> ids, std::string source_matrix) {
  if (!matrix) throw DataFormatError("set '" + name + "' has no matrix");
  if (ids.empty()) {
    ids.resize(matrix->rows());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  }
  std::unordered_set<std::size_t> seen;
  for (std::size_t id : ids) {
    if (id >= matrix->rows()) {
      throw DataFormatError("set '" + name + "': row " + std::to_string(id) +
                            " out of range (matrix has " + std::to_string(matrix->rows()) +
                            " rows)");
    }
    if (!seen.insert(id).second) {
      throw DataFormatError("set '" + name + "': duplicate row " + std::to_string(id));
    }
  }
  StimulusSet set;
  set.name = std::move(name);
  set.kind = kind;
  set.modality = modality;
  set.item_ids = std::move(ids);
  set.source_matrix = source_matrix.empty() ? set.name : std::move(source_matrix);
  set.matrix = std::move(matrix);
  return set;
}

ItmMatrix::ItmMatrix(std::string image_set, std::string text_set, EmbeddingMatrix probs)
    : image_set_(std::move(image_set)), text_set_(std::move(text_set)), probs_(std::move(probs)) {
  for (std::size_t r = 0; r < probs_.rows(); ++r) {
    for (std::size_t c = 0; c < probs_.dims(); ++c) {
      const float p = probs_.at(r, c);
      if (p < 0.0f || p > 1.0f) {
        std::ostringstream msg;
        msg << "ITM block (" << image_set_ << ", " << text_set_ << "): probability " << p
            << " at row " << r << ", column " << c << " outside [0, 1]";
        throw DataFormatError(msg.str());
      }
    }
  }
}

void LabeledPoints::append(const StimulusSet& set, const std::vector<std::string>& item_labels) {
  if (!set.matrix) throw ConfigError("set '" + set.name + "' has no embeddings");
  if (item_labels.size() != set.size()) {
    throw ConfigError("set '" + set.name + "': " + std::to_string(item_labels.size()) +
                      " labels for " + std::to_string(set.size()) + " items");
  }
  if (!points.empty() && set.dims() != dims()) {
    throw ConfigError("set '" + set.name + "' differs in dims from earlier labeled sets");
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto it = std::find(classes.begin(), classes.end(), item_labels[i]);
    const auto label = static_cast<std::size_t>(it - classes.begin());
    if (it == classes.end()) classes.push_back(item_labels[i]);
    points.push_back(set.vector(i));
    labels.push_back(label);
  }
}

}  // namespace mmbias
