#include "mmbias/bias_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmbias/cosine.hpp"
#include "mmbias/errors.hpp"

namespace mmbias {

std::string to_string(Scorer scorer) { return scorer == Scorer::cosine ? "cosine" : "itm"; }

std::string to_string(StdDevConvention convention) {
  return convention == StdDevConvention::population ? "population" : "sample";
}

Scorer parse_scorer(const std::string& text) {
  if (text == "cosine") return Scorer::cosine;
  if (text == "itm") return Scorer::itm;
  throw ConfigError("unknown scorer '" + text + "' (expected cosine|itm)");
}

StdDevConvention parse_std_dev(const std::string& text) {
  if (text == "population") return StdDevConvention::population;
  if (text == "sample") return StdDevConvention::sample;
  throw ConfigError("unknown std-dev convention '" + text + "' (expected population|sample)");
}

void validate_test(const BiasTest& test) {
  const std::string where = "test '" + test.name + "'";
  for (const StimulusSet* s : {&test.x, &test.y, &test.a, &test.b}) {
    if (s->size() == 0) throw ConfigError(where + ": set '" + s->name + "' is empty");
    if (test.scorer == Scorer::cosine && !s->matrix) {
      throw ConfigError(where + ": set '" + s->name + "' has no embeddings (ITM-only set)");
    }
  }
  if (test.x.size() != test.y.size()) {
    throw ConfigError(where + ": target sets '" + test.x.name + "' (" +
                      std::to_string(test.x.size()) + ") and '" + test.y.name + "' (" +
                      std::to_string(test.y.size()) + ") differ in size");
  }
  if (test.a.size() != test.b.size()) {
    throw ConfigError(where + ": attribute sets '" + test.a.name + "' (" +
                      std::to_string(test.a.size()) + ") and '" + test.b.name + "' (" +
                      std::to_string(test.b.size()) + ") differ in size");
  }
  if (test.scorer == Scorer::cosine) {
    const std::size_t dims = test.x.dims();
    for (const StimulusSet* s : {&test.y, &test.a, &test.b}) {
      if (s->dims() != dims) throw ConfigError(where + ": sets have different dims");
    }
  }
  if (test.top_k == 0) throw ConfigError(where + ": top_k must be >= 1");
}

Standardized standardized_difference_unchecked(std::span<const double> phi_x,
                                               std::span<const double> phi_y,
                                               StdDevConvention convention) {
  Standardized out;
  double sum_x = 0.0;
  for (double v : phi_x) sum_x += v;
  double sum_y = 0.0;
  for (double v : phi_y) sum_y += v;
  out.mean_x = sum_x / static_cast<double>(phi_x.size());
  out.mean_y = sum_y / static_cast<double>(phi_y.size());
  const double n = static_cast<double>(phi_x.size() + phi_y.size());
  const double pooled = (sum_x + sum_y) / n;
  double ss_x = 0.0;
  for (double v : phi_x) ss_x += (v - pooled) * (v - pooled);
  double ss_y = 0.0;
  for (double v : phi_y) ss_y += (v - pooled) * (v - pooled);
  const double ss = ss_x + ss_y;
  const double denom = convention == StdDevConvention::population ? n : n - 1.0;
  out.stddev = denom > 0.0 ? std::sqrt(ss / denom) : 0.0;
  out.d = out.stddev > 0.0 ? (out.mean_x - out.mean_y) / out.stddev : 0.0;
  return out;
}

Standardized standardized_difference(std::span<const double> phi_x, std::span<const double> phi_y,
                                     StdDevConvention convention) {
  auto out = standardized_difference_unchecked(phi_x, phi_y, convention);
  if (!(out.stddev >= kDegenerateStdDev)) {
    throw DegenerateError("all phi values identical (std-dev below 1e-12)");
  }
  return out;
}

double phi_from_scores(std::span<const double> scores_a, std::span<const double> scores_b) {
  double sa = 0.0;
  for (double v : scores_a) sa += v;
  double sb = 0.0;
  for (double v : scores_b) sb += v;
  return sa / static_cast<double>(scores_a.size()) - sb / static_cast<double>(scores_b.size());
}

namespace {

std::vector<double> squared_norms(const StimulusSet& s) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = squared_norm(s.vector(i));
    if (out[i] == 0.0) throw DegenerateError("zero-norm vector: " + s.item_name(i));
  }
  return out;
}

std::vector<double> cosines_to(std::span<const float> w, double sq_w, const StimulusSet& set,
                               std::span<const double> sq_set) {
  std::vector<double> out(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    out[i] = cosine_from_parts(dot(w, set.vector(i)), sq_w, sq_set[i]);
  }
  return out;
}

std::vector<double> itm_row(const ItmMatrix& block, std::size_t image) {
  std::vector<double> out(block.text_cols());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = block.at(image, j);
  return out;
}

}  // namespace

double phi_cosine(std::span<const float> w, const StimulusSet& a_set, const StimulusSet& b_set) {
  if (a_set.size() == 0 || b_set.size() == 0) throw ConfigError("attribute sets must be non-empty");
  const double sq_w = squared_norm(w);
  if (sq_w == 0.0) throw DegenerateError("zero-norm vector: target item");
  const auto sq_a = squared_norms(a_set);
  const auto sq_b = squared_norms(b_set);
  return phi_from_scores(cosines_to(w, sq_w, a_set, sq_a), cosines_to(w, sq_w, b_set, sq_b));
}

double phi_itm(std::span<const double> sigma_a, std::span<const double> sigma_b, std::size_t top_k) {
  struct Entry {
    double p;
    bool is_a;
  };
  std::vector<Entry> all;
  all.reserve(sigma_a.size() + sigma_b.size());
  for (double p : sigma_a) all.push_back({p, true});
  for (double p : sigma_b) all.push_back({p, false});
  const std::size_t keep = std::min(top_k, all.size());
  std::stable_sort(all.begin(), all.end(), [](const Entry& l, const Entry& r) { return l.p > r.p; });
  double ma = 0.0;
  double mb = 0.0;
  std::size_t na = 0;
  std::size_t nb = 0;
  for (std::size_t i = 0; i < keep; ++i) {
    if (all[i].is_a) {
      ++na;
      ma += (all[i].p - ma) / static_cast<double>(na);
    } else {
      ++nb;
      mb += (all[i].p - mb) / static_cast<double>(nb);
    }
  }
  return ma - mb;
}

double phi_itm(const Manifest& manifest, const StimulusSet& target, std::size_t item,
               const StimulusSet& a_set, const StimulusSet& b_set, std::size_t top_k) {
  const auto& block_a = manifest.itm_block(target.name, a_set.name);
  const auto& block_b = manifest.itm_block(target.name, b_set.name);
  return phi_itm(itm_row(block_a, item), itm_row(block_b, item), top_k);
}

EffectSizeResult effect_size(const BiasTest& test, StdDevConvention convention) {
  validate_test(test);
  if (test.scorer != Scorer::cosine) {
    throw ConfigError("test '" + test.name + "': effect_size needs the cosine scorer");
  }
  const auto sq_a = squared_norms(test.a);
  const auto sq_b = squared_norms(test.b);
  auto phis = [&](const StimulusSet& targets) {
    const auto sq_t = squared_norms(targets);
    std::vector<double> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto w = targets.vector(i);
      out[i] = phi_from_scores(cosines_to(w, sq_t[i], test.a, sq_a),
                               cosines_to(w, sq_t[i], test.b, sq_b));
    }
    return out;
  };
  const auto phi_x = phis(test.x);
  const auto phi_y = phis(test.y);
  Standardized st;
  try {
    st = standardized_difference(phi_x, phi_y, convention);
  } catch (const DegenerateError& e) {
    throw DegenerateError("test '" + test.name + "': " + e.what());
  }
  EffectSizeResult result{st.d, st.mean_x, st.mean_y, st.stddev, {}, {}};
  for (std::size_t i = 0; i < phi_x.size(); ++i) {
    result.phi_per_item.push_back({test.x.name, i, test.x.item_name(i), phi_x[i]});
  }
  for (std::size_t i = 0; i < phi_y.size(); ++i) {
    result.phi_per_item.push_back({test.y.name, i, test.y.item_name(i), phi_y[i]});
  }
  return result;
}

ItmGapResult itm_fairness_gap(const BiasTest& test, const Manifest& manifest,
                              StdDevConvention convention) {
  validate_test(test);
  if (test.scorer != Scorer::itm) {
    throw ConfigError("test '" + test.name + "': itm_fairness_gap needs the itm scorer");
  }
  ItmGapResult result;
  const std::size_t pool = test.a.size() + test.b.size();
  result.effective_top_k = std::min(test.top_k, pool);
  if (test.top_k > pool) {
    result.warnings.push_back("test '" + test.name + "': top_k " + std::to_string(test.top_k) +
                              " exceeds |A|+|B| = " + std::to_string(pool) + "; clamped");
  }
  auto phis = [&](const StimulusSet& targets) {
    std::vector<double> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
      out[i] = phi_itm(manifest, targets, i, test.a, test.b, test.top_k);
    }
    return out;
  };
  const auto phi_x = phis(test.x);
  const auto phi_y = phis(test.y);
  const auto st = standardized_difference_unchecked(phi_x, phi_y, convention);
  result.delta = st.mean_x - st.mean_y;
  result.mean_x = st.mean_x;
  result.mean_y = st.mean_y;
  result.stddev = st.stddev;
  if (st.stddev >= kDegenerateStdDev) {
    result.d = st.d;
  } else {
    result.warnings.push_back("test '" + test.name +
                              "': all phi values identical; reporting delta only");
  }
  for (std::size_t i = 0; i < phi_x.size(); ++i) {
    result.phi_per_item.push_back({test.x.name, i, test.x.item_name(i), phi_x[i]});
  }
  for (std::size_t i = 0; i < phi_y.size(); ++i) {
    result.phi_per_item.push_back({test.y.name, i, test.y.item_name(i), phi_y[i]});
  }
  return result;
}

AssociationTable associate(const StimulusSet& group, std::span<const StimulusSet> vocab,
                           std::size_t k, const ExecOptions& exec) {
  if (k == 0) throw ConfigError("association k must be >= 1");
  if (group.size() == 0) throw ConfigError("association group '" + group.name + "' is empty");
  struct VocabItem {
    const StimulusSet* set;
    std::size_t local;
  };
  std::vector<VocabItem> items;
  for (const auto& s : vocab) {
    if (s.dims() != group.dims()) {
      throw ConfigError("vocabulary set '" + s.name + "' and group '" + group.name +
                        "' differ in dims");
    }
    for (std::size_t i = 0; i < s.size(); ++i) items.push_back({&s, i});
  }
  if (items.empty()) throw ConfigError("association vocabulary is empty");

  AssociationTable table;
  table.group = group.name;
  if (k > items.size()) {
    table.warnings.push_back("k " + std::to_string(k) + " exceeds vocabulary size " +
                             std::to_string(items.size()) + "; clamped");
    k = items.size();
  }
  const auto sq_group = squared_norms(group);
  std::vector<double> scores(items.size());
  parallel_for(items.size(), exec, [&](std::size_t v) {
    const auto vec = items[v].set->vector(items[v].local);
    const double sq_v = squared_norm(vec);
    if (sq_v == 0.0) {
      throw DegenerateError("zero-norm vector: " + items[v].set->item_name(items[v].local));
    }
    double sum = 0.0;
    for (std::size_t g = 0; g < group.size(); ++g) {
      sum += cosine_from_parts(dot(group.vector(g), vec), sq_group[g], sq_v);
    }
    scores[v] = sum / static_cast<double>(group.size());
  });
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (scores[l] != scores[r]) return scores[l] > scores[r];
    return l < r;
  });
  for (std::size_t r = 0; r < k; ++r) {
    const auto& it = items[order[r]];
    table.ranked.push_back({it.set->name, order[r], it.set->item_name(it.local), scores[order[r]],
                            it.set->sentiment(it.local)});
  }
  return table;
}

}  // namespace mmbias
