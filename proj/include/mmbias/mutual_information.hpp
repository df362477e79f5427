#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mmbias {

// Equal-frequency binning by rank: items are ordered by value (ties keep
// their input order) and rank r lands in bin floor(r * bins / n). Depends only
// on the ordering, so any strictly monotone map of the values leaves the bins
// unchanged.
std::vector<std::size_t> quantile_bins(std::span<const double> values, std::size_t bins);

// Discrete mutual information, in bits, between the quantile bin of each
// value and its class label. A zero-variance column returns exactly 0.
// Throws DegenerateError for fewer than two items or fewer than two distinct
// labels, ConfigError for bins < 2.
double mutual_information(std::span<const double> values, std::span<const std::size_t> labels,
                          std::size_t bins = 10);

}  // namespace mmbias
