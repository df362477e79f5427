#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmbias/bias_metrics.hpp"
#include "mmbias/eval.hpp"
#include "mmbias/manifest.hpp"

namespace mmbias::cli {

struct TestDecl {
  std::string name;
  std::string x, y, a, b;
  Scorer scorer = Scorer::cosine;
  std::size_t top_k = 15;
};

struct AssociationDecl {
  std::vector<std::string> groups;
  std::vector<std::string> vocab;
  std::size_t k = 15;
};

enum class PruneMode { battery, per_test };

struct PruneDecl {
  std::optional<std::size_t> n_remove;
  std::optional<double> theta;  // empty = auto
  std::size_t bins = 10;
  std::vector<std::string> tests;  // empty = every cosine test
  PruneMode mode = PruneMode::battery;
};

struct EvalDecl {
  std::vector<std::string> images;
  std::vector<std::pair<std::string, std::string>> prototypes;  // label -> text set
};

// The single JSON document driving every subcommand:
//   {"manifest": "manifest.json", "std_dev": "population",
//    "tests": [{"name", "x", "y", "a", "b", "scorer", "top_k"}],
//    "association": {"groups": [...], "vocab": [...], "k": 15},
//    "prune": {"n_remove": 54, "theta": "auto" | 0.1, "bins": 10,
//              "tests": [...], "mode": "battery" | "per_test"},
//    "eval": {"images": [...], "prototypes": {"label": "text set"}},
//    "sweep": {"n_max": 10}}
struct AuditConfig {
  std::filesystem::path path;
  std::filesystem::path manifest_path;
  std::string config_sha256;
  StdDevConvention std_dev = StdDevConvention::population;
  std::vector<TestDecl> tests;
  std::optional<AssociationDecl> association;
  PruneDecl prune;
  std::optional<EvalDecl> eval;
  std::optional<std::size_t> sweep_n_max;
};

// Throws ConfigError for a missing/invalid config document.
AuditConfig load_config(const std::filesystem::path& path);

BiasTest resolve_test(const TestDecl& decl, const Manifest& manifest);

// Cosine tests named by the prune section (all cosine tests by default).
std::vector<BiasTest> resolve_battery(const AuditConfig& cfg, const Manifest& manifest);

// Labeled images for the MI gate and evaluation: the eval images when
// configured, otherwise the image target sets of the battery.
LabeledPoints resolve_images(const AuditConfig& cfg, const Manifest& manifest,
                             const std::vector<BiasTest>& battery);

std::vector<ClassPrototypes> resolve_prototypes(const AuditConfig& cfg, const Manifest& manifest);

}  // namespace mmbias::cli
