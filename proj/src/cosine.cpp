#include "mmbias/cosine.hpp"

#include <cmath>

#include "mmbias/errors.hpp"

namespace mmbias {

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double squared_norm(std::span<const float> a) { return dot(a, a); }

double cosine_from_parts(double dot_ab, double sq_a, double sq_b) {
  return dot_ab / (std::sqrt(sq_a) * std::sqrt(sq_b));
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  const double sa = squared_norm(a);
  const double sb = squared_norm(b);
  if (sa == 0.0 || sb == 0.0) throw DegenerateError("cosine of a zero-norm vector");
  return cosine_from_parts(dot(a, b), sa, sb);
}

void require_nonzero(std::span<const float> v, const std::string& what) {
  if (squared_norm(v) == 0.0) throw DegenerateError("zero-norm vector: " + what);
}

DimensionFilter::DimensionFilter(std::size_t dims, std::span<const std::size_t> removed)
    : keep_(dims, 1) {
  for (std::size_t d : removed) {
    if (d >= dims) {
      throw ConfigError("removed dimension " + std::to_string(d) + " out of range (dims = " +
                        std::to_string(dims) + ")");
    }
    keep_[d] = 0;
  }
  for (auto k : keep_) kept_ += k;
  if (kept_ == 0) throw ConfigError("all dimensions removed");
}

std::vector<double> DimensionFilter::project(std::span<const float> v) const {
  std::vector<double> out;
  out.reserve(kept_);
  for (std::size_t d = 0; d < keep_.size(); ++d) {
    if (keep_[d]) out.push_back(static_cast<double>(v[d]));
  }
  return out;
}

bool cosine_projected(std::span<const double> a, std::span<const double> b, double& out) {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return false;
  out = cosine_from_parts(ab, aa, bb);
  return true;
}

}  // namespace mmbias
