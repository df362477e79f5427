#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/report.hpp"
#include "mmbias/cli.hpp"
#include "mmbias/debias.hpp"
#include "mmbias/errors.hpp"
#include "mmbias/fixtures.hpp"

namespace mmbias::cli {
namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string config;
  std::string out = ".";
  std::size_t workers = 0;
  bool full = false;
};

struct Context {
  AuditConfig cfg;
  Manifest manifest;
  std::string manifest_sha;
  ExecOptions exec;
  bool full = false;
  fs::path out;
};

Context open_context(const CommonFlags& flags) {
  if (flags.config.empty()) throw ConfigError("--config is required");
  Context ctx;
  ctx.cfg = load_config(flags.config);
  ctx.manifest = load_manifest(ctx.cfg.manifest_path);
  ctx.manifest_sha = manifest_sha256(ctx.manifest);
  ctx.exec.workers = flags.workers;
  ctx.full = flags.full;
  ctx.out = flags.out;
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw ConfigError("cannot create output directory '" + ctx.out.string() + "'");
  return ctx;
}

Json header(const Context& ctx, const char* command) {
  Json h;
  h["tool"] = kToolName;
  h["version"] = kToolVersion;
  h["command"] = command;
  h["config_sha256"] = ctx.cfg.config_sha256;
  h["manifest_sha256"] = ctx.manifest_sha;
  h["std_dev"] = to_string(ctx.cfg.std_dev);
  return h;
}

Json dims_json(const std::vector<std::size_t>& dims) {
  Json a = Json::array();
  for (auto d : dims) a.push_back(d);
  return a;
}

Json phi_json(const std::vector<ItemPhi>& items) {
  Json a = Json::array();
  for (const auto& p : items) {
    a.push_back({{"set", p.set}, {"index", p.index}, {"item", p.item}, {"phi", number(p.phi)}});
  }
  return a;
}

Json theta_json(double theta, bool automatic) {
  return {{"mode", automatic ? "auto" : "explicit"}, {"value", number(theta)}};
}

void append_warnings(Json& list, const std::vector<std::string>& warnings,
                     const std::string& prefix = {}) {
  for (const auto& w : warnings) list.push_back(prefix + w);
}

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::string dims_text(const std::vector<std::size_t>& dims) {
  std::string out;
  for (auto d : sorted(dims)) out += std::to_string(d) + "\n";
  return out;
}

std::optional<double> reduction_percent(const std::optional<double>& before,
                                        const std::optional<double>& after) {
  if (!before || !after || *before == 0.0) return std::nullopt;
  return 100.0 * (std::fabs(*before) - std::fabs(*after)) / std::fabs(*before);
}

std::string percent_label(const std::optional<double>& pct) {
  if (!pct) return "n/a";
  std::ostringstream s;
  s << static_cast<long long>(std::llround(*pct)) << "%";
  return s.str();
}

// ---------------------------------------------------------------- audit

int cmd_audit(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  auto ctx = open_context(flags);
  if (ctx.cfg.tests.empty()) throw ConfigError("config declares no tests");
  std::vector<BiasTest> tests;
  for (const auto& decl : ctx.cfg.tests) tests.push_back(resolve_test(decl, ctx.manifest));

  std::vector<Json> entries(tests.size());
  std::vector<char> usable(tests.size(), 0);
  parallel_for(tests.size(), ctx.exec, [&](std::size_t i) {
    const auto& t = tests[i];
    Json e;
    e["name"] = t.name;
    e["scorer"] = to_string(t.scorer);
    e["x"] = t.x.name;
    e["y"] = t.y.name;
    e["a"] = t.a.name;
    e["b"] = t.b.name;
    e["n_targets"] = t.x.size();
    e["n_attributes"] = t.a.size();
    try {
      if (t.scorer == Scorer::cosine) {
        const auto r = effect_size(t, ctx.cfg.std_dev);
        e["d"] = number(r.d);
        e["mean_x"] = number(r.mean_x);
        e["mean_y"] = number(r.mean_y);
        e["stddev"] = number(r.stddev);
        e["warnings"] = r.warnings;
        if (ctx.full) e["phi"] = phi_json(r.phi_per_item);
        usable[i] = 1;
      } else {
        const auto r = itm_fairness_gap(t, ctx.manifest, ctx.cfg.std_dev);
        e["d"] = number(r.d);
        e["delta"] = number(r.delta);
        e["mean_x"] = number(r.mean_x);
        e["mean_y"] = number(r.mean_y);
        e["stddev"] = number(r.stddev);
        e["top_k"] = t.top_k;
        e["effective_top_k"] = r.effective_top_k;
        e["warnings"] = r.warnings;
        if (ctx.full) e["phi"] = phi_json(r.phi_per_item);
        usable[i] = r.d.has_value() ? 1 : 0;
      }
    } catch (const DegenerateError& ex) {
      e["d"] = nullptr;
      e["error"] = ex.what();
    }
    entries[i] = std::move(e);
  });

  Json report = header(ctx, "audit");
  report["tests"] = Json::array();
  Json warnings = Json::array();
  for (std::size_t i = 0; i < tests.size(); ++i) {
    if (auto it = entries[i].find("warnings"); it != entries[i].end()) {
      for (const auto& w : *it) warnings.push_back("test '" + tests[i].name + "': " + w.get<std::string>());
    }
    if (auto it = entries[i].find("error"); it != entries[i].end()) {
      warnings.push_back("test '" + tests[i].name + "' degenerate: " + it->get<std::string>());
    }
    report["tests"].push_back(entries[i]);
  }
  report["warnings"] = warnings;
  write_json(ctx.out / "audit.json", report);

  const auto ok = static_cast<std::size_t>(std::count(usable.begin(), usable.end(), 1));
  out << "audit: " << ok << "/" << tests.size() << " tests with a defined effect size; wrote "
      << (ctx.out / "audit.json").string() << "\n";
  if (ok == 0) {
    err << "error: every test is degenerate\n";
    return kExitDegenerate;
  }
  return kExitOk;
}

// ------------------------------------------------------------ associate

int cmd_associate(const CommonFlags& flags, std::ostream& out, std::ostream&) {
  auto ctx = open_context(flags);
  if (!ctx.cfg.association) throw ConfigError("config has no association section");
  const auto& decl = *ctx.cfg.association;
  std::vector<StimulusSet> vocab;
  for (const auto& name : decl.vocab) {
    vocab.push_back(ctx.manifest.set(name));
    if (!vocab.back().matrix) throw ConfigError("set '" + name + "' has no embeddings");
  }
  std::vector<const StimulusSet*> groups;
  for (const auto& name : decl.groups) {
    groups.push_back(&ctx.manifest.set(name));
    if (!groups.back()->matrix) throw ConfigError("set '" + name + "' has no embeddings");
  }

  std::string csv = "group,rank,attribute,score,sentiment\n";
  Json report = header(ctx, "associate");
  report["k"] = decl.k;
  report["vocab"] = decl.vocab;
  report["groups"] = Json::array();
  Json warnings = Json::array();
  for (const auto* group : groups) {
    const auto table = associate(*group, vocab, decl.k, ctx.exec);
    Json g;
    g["group"] = table.group;
    g["entries"] = Json::array();
    for (std::size_t r = 0; r < table.ranked.size(); ++r) {
      const auto& e = table.ranked[r];
      csv += csv_field(table.group) + "," + std::to_string(r + 1) + "," + csv_field(e.attribute) +
             "," + format_double(e.score) + "," + csv_field(e.sentiment) + "\n";
      g["entries"].push_back({{"rank", r + 1},
                              {"attribute", e.attribute},
                              {"set", e.set},
                              {"index", e.index},
                              {"score", number(e.score)},
                              {"sentiment", e.sentiment}});
    }
    g["warnings"] = table.warnings;
    append_warnings(warnings, table.warnings, "group '" + table.group + "': ");
    report["groups"].push_back(std::move(g));
  }
  report["warnings"] = warnings;
  write_text(ctx.out / "associate.csv", csv);
  write_json(ctx.out / "associate.json", report);
  out << "associate: " << groups.size() << " groups; wrote "
      << (ctx.out / "associate.csv").string() << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- debias

struct EvalData {
  LabeledPoints images;
  std::vector<ClassPrototypes> prototypes;
};

std::optional<EvalData> eval_data(const Context& ctx, const std::vector<BiasTest>& battery) {
  if (!ctx.cfg.eval) return std::nullopt;
  EvalData d;
  d.images = resolve_images(ctx.cfg, ctx.manifest, battery);
  d.prototypes = resolve_prototypes(ctx.cfg, ctx.manifest);
  return d;
}

std::optional<double> try_silhouette(const LabeledPoints& images,
                                     const std::vector<std::size_t>& removed,
                                     const ExecOptions& exec, std::vector<std::string>& warnings) {
  try {
    const auto s = separability(images, removed, exec);
    for (const auto& w : s.warnings) warnings.push_back("separability: " + w);
    return s.silhouette;
  } catch (const DegenerateError& e) {
    warnings.push_back(std::string("separability undefined: ") + e.what());
    return std::nullopt;
  }
}

Json evaluation_json(const EvalData& data, const std::vector<std::size_t>& removed,
                     const ExecOptions& exec, std::vector<std::string>& warnings) {
  const auto before = zero_shot_accuracy(data.images, data.prototypes, {}, exec);
  const auto after = zero_shot_accuracy(data.images, data.prototypes, removed, exec);
  for (const auto& w : before.warnings) warnings.push_back("accuracy: " + w);
  const auto sil_before = try_silhouette(data.images, {}, exec, warnings);
  const auto sil_after = try_silhouette(data.images, removed, exec, warnings);
  Json e;
  e["accuracy_before"] = number(before.accuracy);
  e["accuracy_after"] = number(after.accuracy);
  e["accuracy_drop"] = number(before.accuracy - after.accuracy);
  e["silhouette_before"] = number(sil_before);
  e["silhouette_after"] = number(sil_after);
  e["silhouette_change"] =
      sil_before && sil_after ? number(*sil_after - *sil_before) : Json(nullptr);
  return e;
}

Json prune_json(const PruneResult& r, const std::vector<BiasTest>& battery, std::size_t bins) {
  Json j;
  j["theta"] = theta_json(r.theta, r.theta_auto);
  j["bins"] = bins;
  j["n_remove"] = r.n_remove;
  j["removed_dims"] = dims_json(sorted(r.removed_dims));
  j["removal_order"] = dims_json(r.removed_dims);
  j["baseline_bias"] = number(r.baseline_bias);
  j["final_bias"] = number(r.final_bias);
  j["bias_reduction_percent"] = number(reduction_percent(r.baseline_bias, r.final_bias));
  j["tests"] = Json::array();
  for (std::size_t t = 0; t < battery.size(); ++t) {
    const auto pct = reduction_percent(r.baseline_d[t], r.final_d[t]);
    j["tests"].push_back({{"name", battery[t].name},
                          {"d_before", number(r.baseline_d[t])},
                          {"d_after", number(r.final_d[t])},
                          {"reduction_percent", number(pct)},
                          {"reduction", percent_label(pct)}});
  }
  j["candidates"] = dims_json(r.candidates);
  j["dimensions"] = Json::array();
  for (std::size_t d = 0; d < r.mi_per_dim.size(); ++d) {
    const auto psi = r.psi_per_dim.find(d);
    j["dimensions"].push_back(
        {{"dim", d},
         {"mi", number(r.mi_per_dim[d])},
         {"psi", psi == r.psi_per_dim.end() ? Json(nullptr) : number(psi->second)},
         {"candidate",
          std::find(r.candidates.begin(), r.candidates.end(), d) != r.candidates.end()},
         {"removed",
          std::find(r.removed_dims.begin(), r.removed_dims.end(), d) != r.removed_dims.end()}});
  }
  return j;
}

std::string file_safe(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

PruneConfig prune_config(const Context& ctx, std::vector<BiasTest> battery) {
  PruneConfig pc;
  pc.n_remove = ctx.cfg.prune.n_remove;
  pc.theta = ctx.cfg.prune.theta;
  pc.bins = ctx.cfg.prune.bins;
  pc.battery = std::move(battery);
  pc.std_dev = ctx.cfg.std_dev;
  return pc;
}

int cmd_debias(const CommonFlags& flags, std::ostream& out, std::ostream&) {
  auto ctx = open_context(flags);
  const auto battery = resolve_battery(ctx.cfg, ctx.manifest);
  const auto images = resolve_images(ctx.cfg, ctx.manifest, battery);
  const auto eval = eval_data(ctx, battery);

  Json report = header(ctx, "debias");
  std::vector<std::string> warnings;
  if (ctx.cfg.prune.mode == PruneMode::battery) {
    const auto r = prune(prune_config(ctx, battery), images, ctx.exec);
    report["mode"] = "battery";
    report.update(prune_json(r, battery, ctx.cfg.prune.bins));
    warnings = r.warnings;
    report["evaluation"] = eval ? evaluation_json(*eval, r.removed_dims, ctx.exec, warnings)
                                : Json(nullptr);
    write_text(ctx.out / "removed_dims.txt", dims_text(r.removed_dims));
    out << "debias: removed " << r.removed_dims.size() << " dims, aggregate bias "
        << format_double(r.baseline_bias) << " -> " << format_double(r.final_bias) << "\n";
  } else {
    report["mode"] = "per_test";
    report["results"] = Json::array();
    for (const auto& test : battery) {
      const auto r = prune(prune_config(ctx, {test}), images, ctx.exec);
      std::vector<std::string> local = r.warnings;
      Json j;
      j["test"] = test.name;
      j.update(prune_json(r, {test}, ctx.cfg.prune.bins));
      j["evaluation"] =
          eval ? evaluation_json(*eval, r.removed_dims, ctx.exec, local) : Json(nullptr);
      for (const auto& w : local) warnings.push_back("test '" + test.name + "': " + w);
      report["results"].push_back(std::move(j));
      write_text(ctx.out / ("removed_dims." + file_safe(test.name) + ".txt"),
                 dims_text(r.removed_dims));
    }
    out << "debias: pruned " << battery.size() << " tests independently\n";
  }
  report["warnings"] = warnings;
  write_json(ctx.out / "debias.json", report);
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const CommonFlags& flags, std::optional<std::size_t> n_max_flag, std::ostream& out,
              std::ostream&) {
  auto ctx = open_context(flags);
  const auto battery = resolve_battery(ctx.cfg, ctx.manifest);
  const auto images = resolve_images(ctx.cfg, ctx.manifest, battery);
  const auto eval = eval_data(ctx, battery);
  const std::size_t dims = battery.front().x.dims();
  const std::size_t n_max = n_max_flag.value_or(
      ctx.cfg.sweep_n_max.value_or(ctx.cfg.prune.n_remove.value_or(default_n_remove(dims))));

  SweepEvaluator evaluator;
  if (eval) {
    evaluator = [&](std::span<const std::size_t> removed) {
      SweepMetrics m;
      m.accuracy = zero_shot_accuracy(eval->images, eval->prototypes, removed, ctx.exec).accuracy;
      try {
        m.silhouette = separability(eval->images, removed, ctx.exec).silhouette;
      } catch (const DegenerateError&) {
      }
      return m;
    };
  }
  const auto result = sweep(prune_config(ctx, battery), images, n_max, evaluator, ctx.exec);

  std::string csv = "n,aggregate_bias,accuracy,silhouette\n";
  Json report = header(ctx, "sweep");
  report["theta"] = theta_json(result.theta, result.theta_auto);
  report["bins"] = ctx.cfg.prune.bins;
  report["n_max"] = n_max;
  report["rows"] = Json::array();
  Json warnings = Json::array();
  append_warnings(warnings, result.warnings);
  for (const auto& row : result.rows) {
    csv += std::to_string(row.n) + "," + format_optional(row.aggregate_bias) + "," +
           format_optional(row.accuracy) + "," + format_optional(row.silhouette) + "\n";
    Json r;
    r["n"] = row.n;
    r["removed_dims"] = dims_json(row.removed_dims);
    r["aggregate_bias"] = number(row.aggregate_bias);
    r["accuracy"] = number(row.accuracy);
    r["silhouette"] = number(row.silhouette);
    if (!row.error.empty()) {
      r["error"] = row.error;
      warnings.push_back("n=" + std::to_string(row.n) + ": " + row.error);
    }
    report["rows"].push_back(std::move(r));
  }
  report["warnings"] = warnings;
  write_text(ctx.out / "sweep.csv", csv);
  write_json(ctx.out / "sweep.json", report);
  out << "sweep: " << result.rows.size() << " rows; wrote " << (ctx.out / "sweep.csv").string()
      << "\n";
  return kExitOk;
}

// ------------------------------------------------------------- evaluate

std::vector<std::size_t> read_dims_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dims file '" + path.string() + "'");
  std::vector<std::size_t> dims;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    const auto b = line.find_last_not_of(" \t\r") + 1;
    std::size_t v = 0;
    const auto res = std::from_chars(line.data() + a, line.data() + b, v);
    if (res.ec != std::errc{} || res.ptr != line.data() + b) {
      throw DataFormatError(path.string() + ":" + std::to_string(line_no) +
                            ": expected a dimension index, got '" + line.substr(a, b - a) + "'");
    }
    dims.push_back(v);
  }
  return dims;
}

Json accuracy_json(const AccuracyReport& r) {
  Json j;
  j["accuracy"] = number(r.accuracy);
  j["images"] = r.images;
  j["dims_used"] = r.dims_used;
  j["classes"] = r.classes;
  Json per = Json::object();
  for (const auto& c : r.classes) {
    if (auto it = r.per_class_accuracy.find(c); it != r.per_class_accuracy.end()) {
      per[c] = number(it->second);
    }
  }
  j["per_class_accuracy"] = per;
  j["confusion"] = r.confusion;
  return j;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& dims_file, std::ostream& out,
                 std::ostream&) {
  auto ctx = open_context(flags);
  if (!ctx.cfg.eval) throw ConfigError("config has no eval section");
  const auto images = resolve_images(ctx.cfg, ctx.manifest, {});
  const auto prototypes = resolve_prototypes(ctx.cfg, ctx.manifest);
  std::vector<std::size_t> removed;
  if (!dims_file.empty()) removed = read_dims_file(dims_file);

  std::vector<std::string> warnings;
  auto section = [&](const std::vector<std::size_t>& dims, const std::string& tag) {
    const auto acc = zero_shot_accuracy(images, prototypes, dims, ctx.exec);
    for (const auto& w : acc.warnings) warnings.push_back(tag + " accuracy: " + w);
    std::vector<std::string> local;
    const auto sil = try_silhouette(images, dims, ctx.exec, local);
    for (const auto& w : local) warnings.push_back(tag + " " + w);
    Json j = accuracy_json(acc);
    j["silhouette"] = number(sil);
    return std::make_pair(j, std::make_pair(acc.accuracy, sil));
  };

  Json report = header(ctx, "evaluate");
  report["removed_dims"] = dims_json(sorted(removed));
  const auto [base, base_vals] = section({}, "baseline");
  report["baseline"] = base;
  if (!dims_file.empty()) {
    const auto [pruned, pruned_vals] = section(removed, "pruned");
    report["pruned"] = pruned;
    report["accuracy_drop"] = number(base_vals.first - pruned_vals.first);
    report["silhouette_change"] = base_vals.second && pruned_vals.second
                                      ? number(*pruned_vals.second - *base_vals.second)
                                      : Json(nullptr);
  }
  report["warnings"] = warnings;
  write_json(ctx.out / "evaluate.json", report);
  out << "evaluate: accuracy " << format_double(base_vals.first);
  if (!dims_file.empty()) out << " (" << removed.size() << " dims removed)";
  out << "; wrote " << (ctx.out / "evaluate.json").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------- gen-fixture

int cmd_gen_fixture(const CommonFlags& flags, const PlantedBiasSpec& spec, std::ostream& out) {
  const auto fx = generate_planted(spec);
  write_fixture(fx, flags.out);
  out << "gen-fixture: wrote " << flags.out << " (seed " << fx.effective_seed << ", reseeds "
      << fx.reseeds << ", d " << format_optional(fx.effect_size) << ")\n";
  return kExitOk;
}

void add_common(CLI::App* sub, CommonFlags& flags, bool needs_config) {
  auto* cfg = sub->add_option("--config", flags.config, "Path to the JSON config");
  if (needs_config) cfg->required();
  sub->add_option("--out", flags.out, "Output directory")->capture_default_str();
  sub->add_option("--workers", flags.workers, "Worker threads (0 = available parallelism)")
      ->capture_default_str();
  sub->add_flag("--full", flags.full, "Include per-item diagnostics");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bias auditing and dimension-pruning debiasing for multimodal embeddings",
               kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  std::optional<std::size_t> n_max;
  std::string dims_file;
  PlantedBiasSpec spec;
  std::function<int()> action;

  auto* audit = app.add_subcommand("audit", "Effect size for every configured test");
  add_common(audit, flags, true);
  audit->callback([&] { action = [&] { return cmd_audit(flags, out, err); }; });

  auto* assoc = app.add_subcommand("associate", "Top-k attributes closest to each group");
  add_common(assoc, flags, true);
  assoc->callback([&] { action = [&] { return cmd_associate(flags, out, err); }; });

  auto* debias = app.add_subcommand("debias", "Select dimensions to prune");
  add_common(debias, flags, true);
  debias->callback([&] { action = [&] { return cmd_debias(flags, out, err); }; });

  auto* sw = app.add_subcommand("sweep", "Bias and accuracy as a function of N");
  add_common(sw, flags, true);
  sw->add_option("--n-max", n_max, "Largest number of dims to remove");
  sw->callback([&] { action = [&] { return cmd_sweep(flags, n_max, out, err); }; });

  auto* ev = app.add_subcommand("evaluate", "Zero-shot accuracy and silhouette");
  add_common(ev, flags, true);
  ev->add_option("--dims-file", dims_file, "Dims to remove, one index per line");
  ev->callback([&] { action = [&] { return cmd_evaluate(flags, dims_file, out, err); }; });

  auto* gen = app.add_subcommand("gen-fixture", "Write a planted-bias fixture directory");
  add_common(gen, flags, false);
  gen->add_option("--seed", spec.seed)->capture_default_str();
  gen->add_option("--dims", spec.dims)->capture_default_str();
  gen->add_option("--bias-dims", spec.bias_dims)->delimiter(',');
  gen->add_option("--class-dims", spec.class_dims)->delimiter(',');
  gen->add_option("--items-per-set", spec.items_per_set)->capture_default_str();
  gen->add_option("--strength", spec.bias_strength)->capture_default_str();
  gen->add_option("--noise", spec.noise_scale)->capture_default_str();
  gen->add_option("--class-strength", spec.class_strength)->capture_default_str();
  gen->add_option("--prompts-per-class", spec.prompts_per_class)->capture_default_str();
  gen->add_option("--min-effect", spec.min_effect)->capture_default_str();
  gen->callback([&] { action = [&] { return cmd_gen_fixture(flags, spec, out); }; });

  std::vector<std::string> argv_store = args.empty() ? std::vector<std::string>{kToolName} : args;
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    return action ? action() : kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataFormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataFormat;
  } catch (const DegenerateError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace mmbias::cli
