#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "helpers.hpp"
#include "mmbias/cli.hpp"
#include "mmbias/eval.hpp"
#include "mmbias/fixtures.hpp"
#include "mmbias/manifest.hpp"

using namespace mmbias;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run mmbias_run(std::vector<std::string> args) {
  args.insert(args.begin(), "mmbias");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(testing::slurp_text(p)); }

void edit_config(const fs::path& dir, const std::function<void(json&)>& fn) {
  auto cfg = read_json(dir / "config.json");
  fn(cfg);
  testing::spit(dir / "config.json", cfg.dump(2));
}

// Fixture written through the CLI itself.
struct Fixture {
  testing::TempDir dir;
  fs::path config() const { return dir / "config.json"; }
  Fixture(std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"gen-fixture", "--out", dir.path().string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = mmbias_run(args);
    REQUIRE_MESSAGE(r.code == 0, r.err);
  }
  Run run(const std::string& cmd, const fs::path& out, std::vector<std::string> extra = {}) const {
    std::vector<std::string> args = {cmd, "--config", config().string(), "--out", out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return mmbias_run(args);
  }
};

}  // namespace

TEST_CASE("audit reports the library effect size exactly") {
  Fixture fx;
  testing::TempDir out;
  const auto r = fx.run("audit", out.path());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto report = read_json(out / "audit.json");
  CHECK(report["tool"] == "mmbias");
  CHECK(report["command"] == "audit");
  CHECK(report["std_dev"] == "population");
  CHECK(report["config_sha256"].get<std::string>().size() == 64);
  CHECK(report["manifest_sha256"].get<std::string>().size() == 64);

  const auto m = load_manifest(fx.dir / "manifest.json");
  const BiasTest t{"t", m.set(kFixtureX), m.set(kFixtureY), m.set(kFixtureA), m.set(kFixtureB)};
  const auto expected = effect_size(t);
  const auto& cosine = report["tests"][0];
  CHECK(cosine["name"] == "x_vs_y");
  CHECK(cosine["d"].get<double>() == expected.d);
  CHECK(cosine["stddev"].get<double>() == expected.stddev);
  CHECK(std::fabs(cosine["d"].get<double>()) >= 1.5);
  CHECK(cosine.find("phi") == cosine.end());

  const auto& itm = report["tests"][1];
  CHECK(itm["scorer"] == "itm");
  CHECK(itm["top_k"] == 15);
  CHECK(itm["delta"].is_number());

  const auto full = fx.run("audit", out.path(), {"--full"});
  REQUIRE(full.code == 0);
  const auto phi = read_json(out / "audit.json")["tests"][0]["phi"];
  REQUIRE(phi.size() == 200);
  CHECK(phi[0]["phi"].get<double>() == expected.phi_per_item[0].phi);
}

TEST_CASE("unknown set in the config is a config error naming it") {
  Fixture fx;
  edit_config(fx.dir.path(), [](json& c) { c["tests"][0]["x"] = "no_such_set"; });
  testing::TempDir out;
  const auto r = fx.run("audit", out.path());
  CHECK(r.code == 1);
  CHECK(r.err.find("no_such_set") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
  Fixture fx;
  testing::TempDir a, b, c;
  const std::vector<std::string> commands = {"audit", "associate", "debias", "sweep", "evaluate"};
  for (const auto& cmd : commands) {
    REQUIRE(fx.run(cmd, a.path(), {"--workers", "1"}).code == 0);
    REQUIRE(fx.run(cmd, b.path(), {"--workers", "1"}).code == 0);
    REQUIRE(fx.run(cmd, c.path(), {"--workers", "8"}).code == 0);
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a.path())) {
    const auto name = entry.path().filename().string();
    CHECK_MESSAGE(testing::slurp(entry.path()) == testing::slurp(b / name), name);
    CHECK_MESSAGE(testing::slurp(entry.path()) == testing::slurp(c / name), name);
    ++files;
  }
  CHECK(files == 8);
}

TEST_CASE("associate") {
  Fixture fx;
  testing::TempDir out;
  REQUIRE(fx.run("associate", out.path()).code == 0);
  const auto csv = testing::slurp_text(out / "associate.csv");
  CHECK(csv.rfind("group,rank,attribute,score,sentiment\n", 0) == 0);
  const auto rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(rows == 1 + 2 * 15);
  const auto report = read_json(out / "associate.json");
  CHECK(report["groups"].size() == 2);
  CHECK(report["groups"][0]["entries"].size() == 15);
  CHECK(report["groups"][0]["entries"][0]["rank"] == 1);
  // X carries the positive direction, so its nearest attributes come from A.
  CHECK(report["groups"][0]["entries"][0]["set"] == kFixtureA);
  CHECK(report["groups"][1]["entries"][0]["set"] == kFixtureB);

  edit_config(fx.dir.path(), [](json& c) { c["association"]["k"] = 500; });
  REQUIRE(fx.run("associate", out.path()).code == 0);
  const auto clamped = read_json(out / "associate.json");
  CHECK(clamped["groups"][0]["entries"].size() == 200);
  CHECK_FALSE(clamped["warnings"].empty());
}

TEST_CASE("debias removes the planted dims") {
  Fixture fx;
  testing::TempDir out;
  const auto r = fx.run("debias", out.path());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(testing::slurp_text(out / "removed_dims.txt") == "2\n5\n");
  const auto report = read_json(out / "debias.json");
  CHECK(report["theta"]["mode"] == "auto");
  CHECK(report["theta"]["value"].is_number());
  CHECK(report["bins"] == 10);
  CHECK(report["n_remove"] == 2);
  CHECK(report["bias_reduction_percent"].get<double>() >= 80.0);
  CHECK(report["dimensions"].size() == 16);
  CHECK(report["evaluation"]["accuracy_drop"].get<double>() <= 0.02);
  CHECK(std::fabs(report["evaluation"]["silhouette_change"].get<double>()) <= 0.05);
  CHECK(report["tests"][0]["reduction"].get<std::string>().back() == '%');

  edit_config(fx.dir.path(), [](json& c) {
    c["prune"]["n_remove"] = 0;
    c["prune"]["theta"] = 0.5;
  });
  REQUIRE(fx.run("debias", out.path()).code == 0);
  CHECK(testing::slurp_text(out / "removed_dims.txt").empty());
  const auto none = read_json(out / "debias.json");
  CHECK(none["theta"]["mode"] == "explicit");
  CHECK(none["theta"]["value"] == 0.5);
  CHECK(none["final_bias"] == none["baseline_bias"]);
  CHECK(none["evaluation"]["accuracy_drop"] == 0.0);
}

TEST_CASE("sweep starts from the unpruned baseline") {
  Fixture fx;
  testing::TempDir out;
  REQUIRE(fx.run("debias", out.path()).code == 0);
  const auto r = fx.run("sweep", out.path(), {"--n-max", "3"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto report = read_json(out / "sweep.json");
  const auto debias = read_json(out / "debias.json");
  REQUIRE(report["rows"].size() == 4);
  CHECK(report["rows"][0]["n"] == 0);
  CHECK(report["rows"][0]["removed_dims"].empty());
  CHECK(report["rows"][0]["aggregate_bias"] == debias["baseline_bias"]);
  CHECK(report["rows"][2]["aggregate_bias"] == debias["final_bias"]);
  CHECK(report["theta"] == debias["theta"]);
  const auto csv = testing::slurp_text(out / "sweep.csv");
  CHECK(csv.rfind("n,aggregate_bias,accuracy,silhouette\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("evaluate with a dims file") {
  Fixture fx;
  testing::TempDir out;
  testing::spit(out / "dims.txt", "5\n2\n");
  const auto r = fx.run("evaluate", out.path(), {"--dims-file", (out / "dims.txt").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto report = read_json(out / "evaluate.json");
  CHECK(report["removed_dims"] == json::array({2, 5}));

  const auto m = load_manifest(fx.dir / "manifest.json");
  LabeledPoints images;
  for (const char* s : {kFixtureX, kFixtureY}) images.append(m.set(s), m.labels_for(m.set(s)));
  std::vector<ClassPrototypes> protos;
  for (const char* c : {"c0", "c1", "c2", "c3"}) {
    const auto& s = m.set(std::string(c) + "_prompts");
    ClassPrototypes p{c, {}};
    for (std::size_t i = 0; i < s.size(); ++i) p.embeddings.push_back(s.vector(i));
    protos.push_back(p);
  }
  const std::vector<std::size_t> removed = {2, 5};
  CHECK(report["pruned"]["accuracy"].get<double>() ==
        zero_shot_accuracy(images, protos, removed).accuracy);
  CHECK(report["pruned"]["silhouette"].get<double>() == separability(images, removed).silhouette);
  CHECK(report["baseline"]["dims_used"] == 16);
  CHECK(report["pruned"]["dims_used"] == 14);

  testing::spit(out / "bad.txt", "2\nfive\n");
  CHECK(fx.run("evaluate", out.path(), {"--dims-file", (out / "bad.txt").string()}).code == 2);
}

TEST_CASE("exit codes") {
  testing::TempDir out;
  SUBCASE("corrupt embedding file") {
    Fixture fx;
    auto bytes = testing::slurp(fx.dir / "x_images.mmbe");
    bytes.resize(bytes.size() - 3);
    testing::spit(fx.dir / "x_images.mmbe", std::string(bytes.begin(), bytes.end()));
    const auto r = fx.run("audit", out.path());
    CHECK(r.code == 2);
    CHECK(r.err.find("x_images.mmbe") != std::string::npos);
  }
  SUBCASE("degenerate fixture") {
    Fixture fx({"--strength", "0", "--noise", "0", "--min-effect", "0"});
    const auto r = fx.run("audit", out.path());
    CHECK(r.code == 3);
    const auto report = read_json(out / "audit.json");
    CHECK(report["tests"][0]["d"].is_null());
    CHECK(report["tests"][0]["error"].get<std::string>().find("identical") != std::string::npos);
  }
  SUBCASE("parse and config errors") {
    CHECK(mmbias_run({}).code == 1);
    CHECK(mmbias_run({"frobnicate"}).code == 1);
    CHECK(mmbias_run({"audit"}).code == 1);
    CHECK(mmbias_run({"audit", "--config", "x.json", "--workers", "many"}).code == 1);
    CHECK(mmbias_run({"audit", "--config", (out / "missing.json").string()}).code == 1);
    testing::spit(out / "broken.json", "{");
    CHECK(mmbias_run({"audit", "--config", (out / "broken.json").string()}).code == 1);
    CHECK(mmbias_run({"gen-fixture", "--out", out.path().string(), "--bias-dims", "2,99"}).code == 1);
  }
  SUBCASE("help and version") {
    const auto v = mmbias_run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find("0.1.0") != std::string::npos);
    CHECK(mmbias_run({"--help"}).code == 0);
  }
}

TEST_CASE("per-test pruning writes one dims file per test") {
  Fixture fx;
  edit_config(fx.dir.path(), [](json& c) {
    c["tests"].push_back({{"name", "y_vs_x"}, {"x", kFixtureY}, {"y", kFixtureX},
                          {"a", kFixtureA}, {"b", kFixtureB}});
    c["prune"]["mode"] = "per_test";
  });
  testing::TempDir out;
  const auto r = fx.run("debias", out.path());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(testing::slurp_text(out / "removed_dims.x_vs_y.txt") == "2\n5\n");
  CHECK(testing::slurp_text(out / "removed_dims.y_vs_x.txt") == "2\n5\n");
  const auto report = read_json(out / "debias.json");
  CHECK(report["mode"] == "per_test");
  CHECK(report["results"].size() == 2);

  edit_config(fx.dir.path(), [](json& c) { c["prune"]["mode"] = "sometimes"; });
  CHECK(fx.run("debias", out.path()).code == 1);
}
