#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mmbias {

// All kernels accumulate in double in ascending index order so results are
// reproducible bit-for-bit on one platform.
double dot(std::span<const float> a, std::span<const float> b);
double squared_norm(std::span<const float> a);

// cos = dot / (sqrt(|a|^2) * sqrt(|b|^2)). Shared by every cosine path so
// that the full-space and leave-one-out evaluations agree exactly when no
// dimension is removed.
double cosine_from_parts(double dot_ab, double sq_a, double sq_b);

// Throws DegenerateError when either vector has zero norm.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Throws DegenerateError naming `what` when the vector has zero norm.
void require_nonzero(std::span<const float> v, const std::string& what);

// Keeps the dimensions not listed in `removed`; projects float vectors onto
// the surviving coordinates as compact double vectors.
class DimensionFilter {
 public:
  DimensionFilter(std::size_t dims, std::span<const std::size_t> removed);

  std::size_t dims() const noexcept { return keep_.size(); }
  std::size_t kept() const noexcept { return kept_; }
  bool keeps(std::size_t d) const { return keep_[d] != 0; }
  std::vector<double> project(std::span<const float> v) const;

 private:
  std::vector<unsigned char> keep_;
  std::size_t kept_ = 0;
};

// Cosine on projected vectors; returns false when either norm is zero.
bool cosine_projected(std::span<const double> a, std::span<const double> b, double& out);

}  // namespace mmbias
