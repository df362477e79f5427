#include "mmbias/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <numbers>
#include <set>

#include "mmbias/cosine.hpp"
#include "mmbias/errors.hpp"
#include "mmbias/matrix_io.hpp"

namespace mmbias {

double FixtureRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double FixtureRng::normal(double stddev) {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z * stddev;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta) * stddev;
}

void validate(const PlantedBiasSpec& spec) {
  if (spec.dims == 0) throw ConfigError("fixture dims must be >= 1");
  if (spec.items_per_set < 2) throw ConfigError("fixture items_per_set must be >= 2");
  if (spec.class_dims.size() < 2) throw ConfigError("fixture needs at least two class dims");
  if (spec.bias_dims.empty()) throw ConfigError("fixture needs at least one bias dim");
  if (spec.prompts_per_class == 0) throw ConfigError("fixture prompts_per_class must be >= 1");
  if (!(spec.bias_strength >= 0.0) || !(spec.noise_scale >= 0.0) || !(spec.class_strength > 0.0)) {
    throw ConfigError("fixture strengths must be >= 0 (class_strength > 0)");
  }
  std::set<std::size_t> seen;
  for (const auto* dims : {&spec.bias_dims, &spec.class_dims}) {
    for (std::size_t d : *dims) {
      if (d >= spec.dims) {
        throw ConfigError("fixture dim " + std::to_string(d) + " out of range (dims = " +
                          std::to_string(spec.dims) + ")");
      }
      if (!seen.insert(d).second) {
        throw ConfigError("fixture dim " + std::to_string(d) + " listed twice or in both sets");
      }
    }
  }
}

namespace {

std::string set_file(const std::string& name) { return name + ".mmbe"; }

std::string itm_file(const std::string& image, const std::string& text) {
  return "itm_" + image + "__" + text + ".mmbe";
}

struct Layout {
  std::vector<unsigned char> is_bias;
  std::vector<unsigned char> is_class;

  explicit Layout(const PlantedBiasSpec& spec) : is_bias(spec.dims, 0), is_class(spec.dims, 0) {
    for (auto d : spec.bias_dims) is_bias[d] = 1;
    for (auto d : spec.class_dims) is_class[d] = 1;
  }
  bool is_free(std::size_t d) const { return !is_bias[d] && !is_class[d]; }
};

void fill_noise(FixtureRng& rng, const Layout& layout, double scale, float* row, std::size_t dims) {
  for (std::size_t d = 0; d < dims; ++d) {
    if (layout.is_free(d)) row[d] = static_cast<float>(rng.normal(scale));
  }
}

std::shared_ptr<const EmbeddingMatrix> share(std::size_t rows, std::size_t dims,
                                             std::vector<float> values) {
  return std::make_shared<const EmbeddingMatrix>(rows, dims, std::move(values));
}

PlantedFixture generate_once(const PlantedBiasSpec& spec, std::uint64_t seed) {
  FixtureRng rng(seed);
  const Layout layout(spec);
  const std::size_t dims = spec.dims;
  const std::size_t n = spec.items_per_set;
  const std::size_t nc = spec.class_dims.size();
  const std::size_t blocks = (n + nc - 1) / nc;

  std::vector<std::vector<double>> levels(spec.bias_dims.size(), std::vector<double>(blocks));
  for (auto& per_dim : levels) {
    for (double& l : per_dim) l = 0.5 + rng.uniform();
  }

  std::vector<float> x(n * dims, 0.0f);
  for (std::size_t i = 0; i < n; ++i) {
    float* row = x.data() + i * dims;
    for (std::size_t b = 0; b < spec.bias_dims.size(); ++b) {
      row[spec.bias_dims[b]] = static_cast<float>(spec.bias_strength * levels[b][i / nc]);
    }
    row[spec.class_dims[i % nc]] = static_cast<float>(spec.class_strength);
    fill_noise(rng, layout, spec.noise_scale, row, dims);
  }
  std::vector<float> y = x;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto d : spec.bias_dims) y[i * dims + d] = -y[i * dims + d];
  }
  auto attributes = [&](float sign) {
    std::vector<float> m(n * dims, 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
      float* row = m.data() + i * dims;
      for (auto d : spec.bias_dims) row[d] = sign;
      fill_noise(rng, layout, spec.noise_scale, row, dims);
    }
    return m;
  };
  auto a = attributes(1.0f);
  auto b = attributes(-1.0f);

  PlantedFixture fx;
  fx.spec = spec;
  fx.effective_seed = seed;
  Manifest& m = fx.manifest;
  m.version = 1;
  m.dims = dims;

  auto add = [&](const std::string& name, SetKind kind, Modality modality,
                 std::shared_ptr<const EmbeddingMatrix> matrix, const std::string& prefix,
                 const std::string& sentiment) {
    auto s = make_stimulus_set(name, kind, modality, std::move(matrix), {}, set_file(name));
    for (std::size_t i = 0; i < s.size(); ++i) s.item_names.push_back(prefix + std::to_string(i));
    if (!sentiment.empty()) s.sentiments.assign(s.size(), sentiment);
    m.sets.push_back(std::move(s));
  };
  add(kFixtureX, SetKind::target, Modality::image, share(n, dims, std::move(x)), "x_", "");
  add(kFixtureY, SetKind::target, Modality::image, share(n, dims, std::move(y)), "y_", "");
  add(kFixtureA, SetKind::attribute, Modality::text, share(n, dims, std::move(a)), "a_", "positive");
  add(kFixtureB, SetKind::attribute, Modality::text, share(n, dims, std::move(b)), "b_", "negative");

  for (std::size_t k = 0; k < nc; ++k) fx.classes.push_back("c" + std::to_string(k));
  for (std::size_t k = 0; k < nc; ++k) {
    std::vector<float> p(spec.prompts_per_class * dims, 0.0f);
    for (std::size_t i = 0; i < spec.prompts_per_class; ++i) {
      float* row = p.data() + i * dims;
      row[spec.class_dims[k]] = static_cast<float>(spec.class_strength);
      fill_noise(rng, layout, spec.noise_scale, row, dims);
    }
    add(fx.classes[k] + "_prompts", SetKind::target, Modality::text,
        share(spec.prompts_per_class, dims, std::move(p)), "this is " + fx.classes[k] + " #", "");
  }

  std::vector<std::string> image_labels(n);
  for (std::size_t i = 0; i < n; ++i) image_labels[i] = fx.classes[i % nc];
  m.labels[kFixtureX] = image_labels;
  m.labels[kFixtureY] = image_labels;

  // ITM stand-in: sigma = (1 + cos) / 2.
  for (const char* image : {kFixtureX, kFixtureY}) {
    for (const char* text : {kFixtureA, kFixtureB}) {
      const auto& is = m.set(image);
      const auto& ts = m.set(text);
      std::vector<float> probs(is.size() * ts.size());
      for (std::size_t i = 0; i < is.size(); ++i) {
        const double sq_i = squared_norm(is.vector(i));
        for (std::size_t j = 0; j < ts.size(); ++j) {
          const double sq_j = squared_norm(ts.vector(j));
          double p = 0.5;
          if (sq_i > 0.0 && sq_j > 0.0) {
            p = 0.5 * (1.0 + cosine_from_parts(dot(is.vector(i), ts.vector(j)), sq_i, sq_j));
          }
          probs[i * ts.size() + j] = std::clamp(static_cast<float>(p), 0.0f, 1.0f);
        }
      }
      m.itm_blocks.emplace_back(image, text, EmbeddingMatrix(is.size(), ts.size(), std::move(probs)));
    }
  }

  try {
    fx.effect_size = effect_size(fx.test()).d;
  } catch (const DegenerateError&) {
    fx.effect_size.reset();
  }
  return fx;
}

}  // namespace

BiasTest PlantedFixture::test() const {
  return {"x_vs_y", manifest.set(kFixtureX), manifest.set(kFixtureY), manifest.set(kFixtureA),
          manifest.set(kFixtureB), Scorer::cosine, 15};
}

BiasTest PlantedFixture::itm_test() const {
  auto t = test();
  t.name = "x_vs_y_itm";
  t.scorer = Scorer::itm;
  return t;
}

LabeledPoints PlantedFixture::images() const {
  LabeledPoints points;
  for (const char* name : {kFixtureX, kFixtureY}) {
    const auto& s = manifest.set(name);
    points.append(s, manifest.labels_for(s));
  }
  return points;
}

std::vector<ClassPrototypes> PlantedFixture::prototypes() const {
  std::vector<ClassPrototypes> out;
  for (const auto& c : classes) {
    const auto& s = manifest.set(c + "_prompts");
    ClassPrototypes p{c, {}};
    for (std::size_t i = 0; i < s.size(); ++i) p.embeddings.push_back(s.vector(i));
    out.push_back(std::move(p));
  }
  return out;
}

PlantedFixture generate_planted(const PlantedBiasSpec& spec) {
  validate(spec);
  const bool gated = spec.bias_strength > 0.0 && spec.min_effect > 0.0;
  for (std::size_t attempt = 0; attempt <= spec.max_reseeds; ++attempt) {
    auto fx = generate_once(spec, spec.seed + attempt);
    fx.reseeds = attempt;
    if (!gated || (fx.effect_size && std::abs(*fx.effect_size) >= spec.min_effect)) return fx;
  }
  throw ConfigError("planted fixture never reached |d| >= " + std::to_string(spec.min_effect) +
                    " after " + std::to_string(spec.max_reseeds) + " re-samples");
}

void write_fixture(const PlantedFixture& fixture, const std::filesystem::path& dir) {
  using nlohmann::ordered_json;
  std::filesystem::create_directories(dir);
  const Manifest& m = fixture.manifest;
  const auto& spec = fixture.spec;

  ordered_json doc;
  doc["version"] = m.version;
  doc["dims"] = m.dims;
  ordered_json sets = ordered_json::array();
  for (const auto& s : m.sets) {
    write_matrix(dir / s.source_matrix, *s.matrix);
    ordered_json js;
    js["name"] = s.name;
    js["kind"] = to_string(s.kind);
    js["modality"] = to_string(s.modality);
    js["path"] = s.source_matrix;
    js["count"] = s.matrix->rows();
    js["items"] = s.item_names;
    if (!s.sentiments.empty()) js["sentiment"] = s.sentiments.front();
    sets.push_back(std::move(js));
  }
  doc["sets"] = std::move(sets);
  ordered_json labels = ordered_json::object();
  for (const auto& [name, values] : m.labels) labels[name] = values;
  doc["labels"] = std::move(labels);
  ordered_json blocks = ordered_json::array();
  for (const auto& b : m.itm_blocks) {
    const auto file = itm_file(b.image_set(), b.text_set());
    write_matrix(dir / file, b.probabilities());
    blocks.push_back({{"image_set", b.image_set()}, {"text_set", b.text_set()}, {"path", file}});
  }
  doc["itm_blocks"] = std::move(blocks);
  doc["provenance"] = {
      {"generator", "planted-bias"},
      {"seed", spec.seed},
      {"effective_seed", fixture.effective_seed},
      {"reseeds", fixture.reseeds},
      {"dims", spec.dims},
      {"bias_dims", spec.bias_dims},
      {"class_dims", spec.class_dims},
      {"items_per_set", spec.items_per_set},
      {"bias_strength", spec.bias_strength},
      {"noise_scale", spec.noise_scale},
      {"class_strength", spec.class_strength},
      {"prompts_per_class", spec.prompts_per_class},
      {"rng", "mt19937_64 + Box-Muller"},
  };
  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    out << doc.dump(2) << "\n";
  }

  ordered_json cfg;
  cfg["manifest"] = "manifest.json";
  cfg["std_dev"] = "population";
  cfg["tests"] = ordered_json::array(
      {{{"name", "x_vs_y"}, {"x", kFixtureX}, {"y", kFixtureY}, {"a", kFixtureA}, {"b", kFixtureB},
        {"scorer", "cosine"}},
       {{"name", "x_vs_y_itm"}, {"x", kFixtureX}, {"y", kFixtureY}, {"a", kFixtureA},
        {"b", kFixtureB}, {"scorer", "itm"}, {"top_k", 15}}});
  cfg["association"] = {{"groups", {kFixtureX, kFixtureY}},
                        {"vocab", {kFixtureA, kFixtureB}},
                        {"k", 15}};
  cfg["prune"] = {{"n_remove", spec.bias_dims.size()}, {"theta", "auto"}, {"bins", 10}};
  ordered_json protos = ordered_json::object();
  for (const auto& c : fixture.classes) protos[c] = c + "_prompts";
  cfg["eval"] = {{"images", {kFixtureX, kFixtureY}}, {"prototypes", protos}};
  cfg["sweep"] = {{"n_max", std::min<std::size_t>(spec.dims - 1, 2 * spec.bias_dims.size())}};
  std::ofstream out(dir / "config.json", std::ios::trunc);
  out << cfg.dump(2) << "\n";
}

}  // namespace mmbias
