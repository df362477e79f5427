#include "mmbias/mutual_information.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mmbias/errors.hpp"

namespace mmbias {

std::vector<std::size_t> quantile_bins(std::span<const double> values, std::size_t bins) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  std::vector<std::size_t> bin(n);
  for (std::size_t rank = 0; rank < n; ++rank) bin[order[rank]] = rank * bins / n;
  return bin;
}

double mutual_information(std::span<const double> values, std::span<const std::size_t> labels,
                          std::size_t bins) {
  if (values.size() != labels.size()) throw ConfigError("values and labels differ in length");
  if (values.size() < 2) throw DegenerateError("mutual information needs at least two items");
  if (bins < 2) throw ConfigError("mutual information needs at least two bins");

  std::map<std::size_t, std::size_t> label_index;
  for (std::size_t l : labels) label_index.emplace(l, label_index.size());
  if (label_index.size() < 2) throw DegenerateError("mutual information needs two distinct labels");

  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return 0.0;

  const std::size_t n = values.size();
  const std::size_t classes = label_index.size();
  const auto bin = quantile_bins(values, bins);
  std::vector<double> joint(bins * classes, 0.0);
  std::vector<double> bin_count(bins, 0.0);
  std::vector<double> class_count(classes, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = label_index.at(labels[i]);
    joint[bin[i] * classes + c] += 1.0;
    bin_count[bin[i]] += 1.0;
    class_count[c] += 1.0;
  }
  const double total = static_cast<double>(n);
  double mi = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    for (std::size_t c = 0; c < classes; ++c) {
      const double nbc = joint[b * classes + c];
      if (nbc == 0.0) continue;
      // p(b,c) log2(p(b,c) / (p(b) p(c))) written on counts.
      mi += nbc / total * std::log2(total * nbc / (bin_count[b] * class_count[c]));
    }
  }
  return std::max(0.0, mi);
}

}  // namespace mmbias
