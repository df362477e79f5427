#include "mmbias/debias.hpp"

#include <algorithm>
#include <cmath>

#include "mmbias/cosine.hpp"
#include "mmbias/errors.hpp"
#include "mmbias/mutual_information.hpp"

namespace mmbias {
namespace {

// A coordinate-deleted squared norm this small relative to the full norm is
// treated as an exact zero (cancellation residue).
constexpr double kResidualNorm = 1e-14;

std::vector<std::size_t> sorted_unique(std::span<const std::size_t> dims) {
  std::vector<std::size_t> out(dims.begin(), dims.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double reduced(double full, std::span<const float> v, std::span<const float> w,
               std::span<const std::size_t> removed) {
  for (std::size_t r : removed) full -= static_cast<double>(v[r]) * static_cast<double>(w[r]);
  return full;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace

BatteryEvaluator::BatteryEvaluator(std::vector<BiasTest> battery, StdDevConvention convention)
    : battery_(std::move(battery)), convention_(convention) {
  if (battery_.empty()) throw ConfigError("bias battery is empty");
  dims_ = battery_.front().x.dims();
  caches_.reserve(battery_.size());
  for (const auto& test : battery_) {
    validate_test(test);
    if (test.scorer != Scorer::cosine) {
      throw ConfigError("test '" + test.name + "': pruning needs cosine-scored tests");
    }
    if (test.x.dims() != dims_) throw ConfigError("battery tests differ in dims");
    TestCache c;
    for (const StimulusSet* s : {&test.x, &test.y}) {
      for (std::size_t i = 0; i < s->size(); ++i) c.targets.push_back(s->vector(i));
    }
    for (const StimulusSet* s : {&test.a, &test.b}) {
      for (std::size_t i = 0; i < s->size(); ++i) c.attributes.push_back(s->vector(i));
    }
    c.nx = test.x.size();
    c.na = test.a.size();
    for (auto t : c.targets) c.sq_targets.push_back(squared_norm(t));
    for (auto a : c.attributes) c.sq_attributes.push_back(squared_norm(a));
    c.dots.reserve(c.targets.size() * c.attributes.size());
    for (auto t : c.targets) {
      for (auto a : c.attributes) c.dots.push_back(dot(t, a));
    }
    caches_.push_back(std::move(c));
  }
}

std::optional<double> BatteryEvaluator::evaluate_test(std::size_t t,
                                                      std::span<const std::size_t> removed,
                                                      std::string& why) const {
  const TestCache& c = caches_[t];
  const std::size_t nt = c.targets.size();
  const std::size_t nattr = c.attributes.size();
  auto norms = [&](const std::vector<std::span<const float>>& vecs, const std::vector<double>& full,
                   std::vector<double>& out) {
    out.resize(vecs.size());
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      out[i] = reduced(full[i], vecs[i], vecs[i], removed);
      if (!(out[i] > full[i] * kResidualNorm) || full[i] == 0.0) return false;
    }
    return true;
  };
  std::vector<double> sq_t;
  std::vector<double> sq_a;
  if (!norms(c.targets, c.sq_targets, sq_t) || !norms(c.attributes, c.sq_attributes, sq_a)) {
    why = "zero-norm vector";
    return std::nullopt;
  }
  std::vector<double> phi(nt);
  std::vector<double> cos_a(c.na);
  std::vector<double> cos_b(nattr - c.na);
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nattr; ++j) {
      const double d = reduced(c.dots[i * nattr + j], c.targets[i], c.attributes[j], removed);
      const double cs = cosine_from_parts(d, sq_t[i], sq_a[j]);
      if (j < c.na) {
        cos_a[j] = cs;
      } else {
        cos_b[j - c.na] = cs;
      }
    }
    phi[i] = phi_from_scores(cos_a, cos_b);
  }
  const std::span<const double> all(phi);
  try {
    return standardized_difference(all.first(c.nx), all.subspan(c.nx), convention_).d;
  } catch (const DegenerateError& e) {
    why = e.what();
    return std::nullopt;
  }
}

BatteryBias BatteryEvaluator::evaluate(std::span<const std::size_t> removed) const {
  const auto dims = sorted_unique(removed);
  for (std::size_t d : dims) {
    if (d >= dims_) throw ConfigError("dimension " + std::to_string(d) + " out of range");
  }
  if (dims.size() >= dims_) throw ConfigError("cannot remove every dimension");
  BatteryBias out;
  out.d.resize(battery_.size());
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; t < battery_.size(); ++t) {
    std::string why;
    out.d[t] = evaluate_test(t, dims, why);
    if (out.d[t]) {
      sum += std::abs(*out.d[t]);
      ++used;
    } else {
      out.warnings.push_back("test '" + battery_[t].name + "' skipped: " + why);
    }
  }
  if (used == 0) throw DegenerateError("every test in the battery is degenerate");
  out.aggregate = sum / static_cast<double>(used);
  return out;
}

BatteryBias compute_bias(const std::vector<BiasTest>& battery, StdDevConvention convention,
                         std::span<const std::size_t> removed) {
  return BatteryEvaluator(battery, convention).evaluate(removed);
}

std::size_t default_n_remove(std::size_t dims) {
  return (dims + 9) / 10;
}

PruneAnalysis analyze_dimensions(const BatteryEvaluator& evaluator, const LabeledPoints& images,
                                 const PruneConfig& cfg, const ExecOptions& exec) {
  const std::size_t dims = evaluator.dims();
  if (images.size() == 0) throw ConfigError("no labeled image items for the MI gate");
  if (images.dims() != dims) {
    throw ConfigError("labeled images have " + std::to_string(images.dims()) +
                      " dims but the battery has " + std::to_string(dims));
  }
  if (cfg.theta && !(*cfg.theta >= 0.0)) throw ConfigError("theta must be >= 0");

  PruneAnalysis a;
  a.dims = dims;
  a.mi_per_dim.resize(dims);
  parallel_for(dims, exec, [&](std::size_t d) {
    std::vector<double> column(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) column[i] = images.points[i][d];
    a.mi_per_dim[d] = mutual_information(column, images.labels, cfg.bins);
  });
  a.theta_auto = !cfg.theta.has_value();
  a.theta = cfg.theta ? *cfg.theta : median(a.mi_per_dim);

  a.baseline = evaluator.evaluate({});
  a.warnings = a.baseline.warnings;

  std::vector<std::size_t> gated;
  for (std::size_t d = 0; d < dims; ++d) {
    if (a.mi_per_dim[d] < a.theta) gated.push_back(d);
  }
  std::vector<std::optional<double>> psi(gated.size());
  std::vector<std::string> failures(gated.size());
  parallel_for(gated.size(), exec, [&](std::size_t i) {
    const std::size_t d = gated[i];
    try {
      psi[i] = evaluator.evaluate(std::span<const std::size_t>(&d, 1)).aggregate;
    } catch (const DegenerateError& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < gated.size(); ++i) {
    if (psi[i]) {
      a.psi_per_dim[gated[i]] = *psi[i];
      if (*psi[i] < a.baseline.aggregate) a.candidates.push_back(gated[i]);
    } else {
      a.warnings.push_back("dimension " + std::to_string(gated[i]) + " skipped: " + failures[i]);
    }
  }
  std::sort(a.candidates.begin(), a.candidates.end(), [&](std::size_t l, std::size_t r) {
    const double pl = a.psi_per_dim.at(l);
    const double pr = a.psi_per_dim.at(r);
    if (pl != pr) return pl < pr;
    return l < r;
  });
  if (a.candidates.empty()) {
    a.warnings.push_back("no candidate dimensions: none passes both the MI and bias gates");
  }
  return a;
}

PruneResult select_dimensions(const BatteryEvaluator& evaluator, const PruneAnalysis& analysis,
                              std::size_t n_remove) {
  if (n_remove >= analysis.dims) {
    throw ConfigError("n_remove " + std::to_string(n_remove) + " must be below dims " +
                      std::to_string(analysis.dims));
  }
  PruneResult r;
  r.n_remove = n_remove;
  r.theta = analysis.theta;
  r.theta_auto = analysis.theta_auto;
  r.mi_per_dim = analysis.mi_per_dim;
  r.psi_per_dim = analysis.psi_per_dim;
  r.candidates = analysis.candidates;
  r.warnings = analysis.warnings;
  r.baseline_bias = analysis.baseline.aggregate;
  r.baseline_d = analysis.baseline.d;
  const std::size_t take = std::min(n_remove, analysis.candidates.size());
  if (take < n_remove && !analysis.candidates.empty()) {
    r.warnings.push_back("only " + std::to_string(analysis.candidates.size()) +
                         " candidate dimensions for n_remove " + std::to_string(n_remove));
  }
  r.removed_dims.assign(analysis.candidates.begin(),
                        analysis.candidates.begin() + static_cast<std::ptrdiff_t>(take));
  if (r.removed_dims.empty()) {
    r.final_bias = r.baseline_bias;
    r.final_d = r.baseline_d;
  } else {
    auto after = evaluator.evaluate(r.removed_dims);
    r.final_bias = after.aggregate;
    r.final_d = std::move(after.d);
    for (auto& w : after.warnings) r.warnings.push_back("after removal: " + w);
  }
  return r;
}

PruneResult prune(const PruneConfig& cfg, const LabeledPoints& images, const ExecOptions& exec) {
  BatteryEvaluator evaluator(cfg.battery, cfg.std_dev);
  const std::size_t n = cfg.n_remove.value_or(default_n_remove(evaluator.dims()));
  if (n >= evaluator.dims()) {
    throw ConfigError("n_remove " + std::to_string(n) + " must be below dims " +
                      std::to_string(evaluator.dims()));
  }
  const auto analysis = analyze_dimensions(evaluator, images, cfg, exec);
  return select_dimensions(evaluator, analysis, n);
}

SweepResult sweep(const PruneConfig& cfg, const LabeledPoints& images, std::size_t n_max,
                  const SweepEvaluator& evaluate, const ExecOptions& exec) {
  BatteryEvaluator evaluator(cfg.battery, cfg.std_dev);
  if (n_max >= evaluator.dims()) {
    throw ConfigError("n_max " + std::to_string(n_max) + " must be below dims " +
                      std::to_string(evaluator.dims()));
  }
  const auto analysis = analyze_dimensions(evaluator, images, cfg, exec);
  SweepResult out;
  out.theta = analysis.theta;
  out.theta_auto = analysis.theta_auto;
  out.warnings = analysis.warnings;
  out.rows.resize(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    SweepRow& row = out.rows[n];
    row.n = n;
    try {
      const auto result = select_dimensions(evaluator, analysis, n);
      row.removed_dims = result.removed_dims;
      row.aggregate_bias = result.final_bias;
      if (evaluate) {
        const auto metrics = evaluate(row.removed_dims);
        row.accuracy = metrics.accuracy;
        row.silhouette = metrics.silhouette;
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
  }
  return out;
}

}  // namespace mmbias
