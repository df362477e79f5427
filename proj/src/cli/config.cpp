#include "cli/config.hpp"

#include <algorithm>
#include <set>

#include "cli/report.hpp"
#include "mmbias/errors.hpp"
#include "mmbias/matrix_io.hpp"

namespace mmbias::cli {
namespace {

const Json* find(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

template <typename T>
T get_as(const Json& value, const std::string& where) {
  try {
    return value.get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError("config " + where + ": " + e.what());
  }
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  const Json* v = find(obj, key);
  if (!v) throw ConfigError("config " + where + ": missing field '" + key + "'");
  return *v;
}

std::size_t get_count(const Json& value, const std::string& where) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ConfigError("config " + where + ": expected a non-negative integer");
  }
  return value.get<std::size_t>();
}

std::vector<std::string> get_names(const Json& value, const std::string& where) {
  if (value.is_string()) return {value.get<std::string>()};
  return get_as<std::vector<std::string>>(value, where);
}

template <typename Fn>
auto with_config_errors(const std::string& where, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("config " + where + ": " + e.what());
  }
}

}  // namespace

AuditConfig load_config(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error&) {
    throw ConfigError("cannot read config '" + path.string() + "'");
  }
  Json doc;
  try {
    doc = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  AuditConfig cfg;
  cfg.path = path;
  cfg.config_sha256 = sha256_hex(bytes);
  const auto manifest = get_as<std::string>(require(doc, "manifest", "root"), "manifest");
  cfg.manifest_path = (path.parent_path() / manifest).lexically_normal();

  if (const Json* v = find(doc, "std_dev")) {
    const auto text = get_as<std::string>(*v, "std_dev");
    cfg.std_dev = with_config_errors("std_dev", [&] { return parse_std_dev(text); });
  }

  if (const Json* tests = find(doc, "tests")) {
    if (!tests->is_array()) throw ConfigError("config tests: expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < tests->size(); ++i) {
      const Json& t = (*tests)[i];
      const std::string where = "tests[" + std::to_string(i) + "]";
      if (!t.is_object()) throw ConfigError("config " + where + ": expected an object");
      TestDecl decl;
      decl.name = get_as<std::string>(require(t, "name", where), where + ".name");
      decl.x = get_as<std::string>(require(t, "x", where), where + ".x");
      decl.y = get_as<std::string>(require(t, "y", where), where + ".y");
      decl.a = get_as<std::string>(require(t, "a", where), where + ".a");
      decl.b = get_as<std::string>(require(t, "b", where), where + ".b");
      if (const Json* s = find(t, "scorer")) {
        const auto text = get_as<std::string>(*s, where + ".scorer");
        decl.scorer = with_config_errors(where, [&] { return parse_scorer(text); });
      }
      if (const Json* k = find(t, "top_k")) decl.top_k = get_count(*k, where + ".top_k");
      if (decl.top_k == 0) throw ConfigError("config " + where + ": top_k must be >= 1");
      if (!names.insert(decl.name).second) {
        throw ConfigError("config: duplicate test name '" + decl.name + "'");
      }
      cfg.tests.push_back(std::move(decl));
    }
  }

  if (const Json* a = find(doc, "association")) {
    AssociationDecl decl;
    decl.groups = get_names(require(*a, "groups", "association"), "association.groups");
    decl.vocab = get_names(require(*a, "vocab", "association"), "association.vocab");
    if (const Json* k = find(*a, "k")) decl.k = get_count(*k, "association.k");
    if (decl.k == 0) throw ConfigError("config association: k must be >= 1");
    if (decl.groups.empty() || decl.vocab.empty()) {
      throw ConfigError("config association: groups and vocab must be non-empty");
    }
    cfg.association = std::move(decl);
  }

  if (const Json* p = find(doc, "prune")) {
    if (const Json* n = find(*p, "n_remove")) cfg.prune.n_remove = get_count(*n, "prune.n_remove");
    if (const Json* th = find(*p, "theta")) {
      if (th->is_string()) {
        if (th->get<std::string>() != "auto") {
          throw ConfigError("config prune.theta: expected \"auto\" or a number");
        }
      } else if (th->is_number()) {
        cfg.prune.theta = th->get<double>();
      } else {
        throw ConfigError("config prune.theta: expected \"auto\" or a number");
      }
    }
    if (const Json* b = find(*p, "bins")) cfg.prune.bins = get_count(*b, "prune.bins");
    if (cfg.prune.bins < 2) throw ConfigError("config prune.bins: must be >= 2");
    if (const Json* t = find(*p, "tests")) cfg.prune.tests = get_names(*t, "prune.tests");
    if (const Json* m = find(*p, "mode")) {
      const auto mode = get_as<std::string>(*m, "prune.mode");
      if (mode == "battery") {
        cfg.prune.mode = PruneMode::battery;
      } else if (mode == "per_test") {
        cfg.prune.mode = PruneMode::per_test;
      } else {
        throw ConfigError("config prune.mode: expected \"battery\" or \"per_test\"");
      }
    }
  }

  if (const Json* e = find(doc, "eval")) {
    EvalDecl decl;
    decl.images = get_names(require(*e, "images", "eval"), "eval.images");
    const Json& protos = require(*e, "prototypes", "eval");
    if (!protos.is_object() || protos.empty()) {
      throw ConfigError("config eval.prototypes: expected a non-empty object of label -> set");
    }
    for (const auto& [label, set] : protos.items()) {
      decl.prototypes.emplace_back(label, get_as<std::string>(set, "eval.prototypes." + label));
    }
    cfg.eval = std::move(decl);
  }

  if (const Json* s = find(doc, "sweep")) {
    if (const Json* n = find(*s, "n_max")) cfg.sweep_n_max = get_count(*n, "sweep.n_max");
  }
  return cfg;
}

BiasTest resolve_test(const TestDecl& decl, const Manifest& manifest) {
  BiasTest test;
  test.name = decl.name;
  test.x = manifest.set(decl.x);
  test.y = manifest.set(decl.y);
  test.a = manifest.set(decl.a);
  test.b = manifest.set(decl.b);
  test.scorer = decl.scorer;
  test.top_k = decl.top_k;
  if (test.scorer == Scorer::itm) {
    for (const auto* target : {&decl.x, &decl.y}) {
      for (const auto* attr : {&decl.a, &decl.b}) manifest.itm_block(*target, *attr);
    }
  }
  validate_test(test);
  return test;
}

std::vector<BiasTest> resolve_battery(const AuditConfig& cfg, const Manifest& manifest) {
  std::vector<BiasTest> battery;
  if (cfg.prune.tests.empty()) {
    for (const auto& decl : cfg.tests) {
      if (decl.scorer == Scorer::cosine) battery.push_back(resolve_test(decl, manifest));
    }
    if (battery.empty()) throw ConfigError("config declares no cosine tests to prune against");
    return battery;
  }
  for (const auto& name : cfg.prune.tests) {
    const auto it = std::find_if(cfg.tests.begin(), cfg.tests.end(),
                                 [&](const TestDecl& d) { return d.name == name; });
    if (it == cfg.tests.end()) throw ConfigError("prune.tests names unknown test '" + name + "'");
    if (it->scorer != Scorer::cosine) {
      throw ConfigError("prune.tests: test '" + name + "' does not use the cosine scorer");
    }
    battery.push_back(resolve_test(*it, manifest));
  }
  return battery;
}

LabeledPoints resolve_images(const AuditConfig& cfg, const Manifest& manifest,
                             const std::vector<BiasTest>& battery) {
  std::vector<std::string> names;
  if (cfg.eval) {
    names = cfg.eval->images;
  } else {
    for (const auto& t : battery) {
      for (const auto* s : {&t.x, &t.y}) {
        if (std::find(names.begin(), names.end(), s->name) == names.end()) names.push_back(s->name);
      }
    }
  }
  LabeledPoints points;
  for (const auto& name : names) {
    const auto& set = manifest.set(name);
    if (!set.matrix) throw ConfigError("set '" + name + "' has no embeddings");
    points.append(set, manifest.labels_for(set));
  }
  return points;
}

std::vector<ClassPrototypes> resolve_prototypes(const AuditConfig& cfg, const Manifest& manifest) {
  if (!cfg.eval) throw ConfigError("config has no eval section");
  std::vector<ClassPrototypes> out;
  for (const auto& [label, set_name] : cfg.eval->prototypes) {
    const auto& set = manifest.set(set_name);
    if (!set.matrix) throw ConfigError("set '" + set_name + "' has no embeddings");
    ClassPrototypes cls;
    cls.label = label;
    for (std::size_t i = 0; i < set.size(); ++i) cls.embeddings.push_back(set.vector(i));
    out.push_back(std::move(cls));
  }
  return out;
}

}  // namespace mmbias::cli
