#include "mmbias/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmbias/cosine.hpp"
#include "mmbias/errors.hpp"

namespace mmbias {

AccuracyReport zero_shot_accuracy(const LabeledPoints& images,
                                  std::span<const ClassPrototypes> prototypes,
                                  std::span<const std::size_t> removed_dims,
                                  const ExecOptions& exec) {
  if (images.size() == 0) throw ConfigError("zero-shot accuracy needs at least one image");
  if (prototypes.empty()) throw ConfigError("zero-shot accuracy needs class prototypes");
  const std::size_t dims = images.dims();
  const DimensionFilter filter(dims, removed_dims);

  AccuracyReport report;
  report.dims_used = filter.kept();
  report.images = images.size();
  const std::size_t k = prototypes.size();

  std::vector<std::vector<double>> protos(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& cls = prototypes[c];
    report.classes.push_back(cls.label);
    if (cls.embeddings.empty()) throw ConfigError("class '" + cls.label + "' has no prototypes");
    std::vector<double> mean(filter.kept(), 0.0);
    for (auto e : cls.embeddings) {
      if (e.size() != dims) throw ConfigError("prototype dims differ from image dims");
      const auto v = filter.project(e);
      double sq = 0.0;
      for (double x : v) sq += x * x;
      if (sq == 0.0) throw DegenerateError("zero-norm prototype for class '" + cls.label + "'");
      const double inv = 1.0 / std::sqrt(sq);
      for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i] * inv;
    }
    for (double& x : mean) x /= static_cast<double>(cls.embeddings.size());
    protos[c] = std::move(mean);
  }

  // Image label -> prototype index.
  std::vector<std::size_t> truth_of(images.classes.size(), k);
  for (std::size_t l = 0; l < images.classes.size(); ++l) {
    const auto it = std::find(report.classes.begin(), report.classes.end(), images.classes[l]);
    if (it == report.classes.end()) {
      throw ConfigError("image class '" + images.classes[l] + "' has no prototype");
    }
    truth_of[l] = static_cast<std::size_t>(it - report.classes.begin());
  }

  std::vector<std::size_t> predicted(images.size());
  parallel_for(images.size(), exec, [&](std::size_t i) {
    const auto v = filter.project(images.points[i]);
    std::size_t best = k;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      if (!cosine_projected(v, protos[c], s)) {
        throw DegenerateError("zero-norm vector for image " + std::to_string(i) +
                              " or prototype '" + report.classes[c] + "'");
      }
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    predicted[i] = best;
  });

  report.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::size_t t = truth_of[images.labels[i]];
    ++report.confusion[t][predicted[i]];
    if (t == predicted[i]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(images.size());
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t total = 0;
    for (auto n : report.confusion[c]) total += n;
    if (total == 0) {
      report.warnings.push_back("class '" + report.classes[c] + "' has no images; excluded");
      continue;
    }
    report.per_class_accuracy[report.classes[c]] =
        static_cast<double>(report.confusion[c][c]) / static_cast<double>(total);
  }
  return report;
}

SeparabilityReport separability(const LabeledPoints& points,
                                std::span<const std::size_t> removed_dims,
                                const ExecOptions& exec) {
  SeparabilityReport report;
  std::vector<std::size_t> class_size(points.classes.size(), 0);
  for (auto l : points.labels) ++class_size[l];
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (class_size[points.labels[i]] >= 2) keep.push_back(i);
  }
  std::size_t classes_used = 0;
  for (std::size_t c = 0; c < class_size.size(); ++c) {
    if (class_size[c] == 1) {
      report.warnings.push_back("class '" + points.classes[c] + "' has a single point; excluded");
    } else if (class_size[c] >= 2) {
      ++classes_used;
    }
  }
  if (classes_used < 2) throw DegenerateError("separability needs two classes with >= 2 points");

  const DimensionFilter filter(points.dims(), removed_dims);
  std::vector<std::vector<double>> unit(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    auto v = filter.project(points.points[keep[i]]);
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq == 0.0) throw DegenerateError("zero-norm point " + std::to_string(keep[i]));
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
    unit[i] = std::move(v);
  }

  const std::size_t n = keep.size();
  const std::size_t nclass = points.classes.size();
  std::vector<double> score(n);
  parallel_for(n, exec, [&](std::size_t i) {
    std::vector<double> sum(nclass, 0.0);
    std::vector<std::size_t> count(nclass, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double c = 0.0;
      for (std::size_t d = 0; d < unit[i].size(); ++d) c += unit[i][d] * unit[j][d];
      const std::size_t l = points.labels[keep[j]];
      sum[l] += 1.0 - c;
      ++count[l];
    }
    const std::size_t own = points.labels[keep[i]];
    const double a = sum[own] / static_cast<double>(count[own]);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < nclass; ++l) {
      if (l == own || count[l] == 0) continue;
      b = std::min(b, sum[l] / static_cast<double>(count[l]));
    }
    const double denom = std::max(a, b);
    score[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  });
  double total = 0.0;
  for (double s : score) total += s;
  report.silhouette = total / static_cast<double>(n);
  report.points_used = n;
  return report;
}

}  // namespace mmbias
