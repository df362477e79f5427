#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "mmbias/bias_metrics.hpp"
#include "mmbias/errors.hpp"

using namespace mmbias;
using testing::make_set;

namespace {

std::vector<float> f(std::initializer_list<float> v) { return v; }

// ITM-only set with `n` items.
StimulusSet itm_set(const std::string& name, std::size_t n, SetKind kind, Modality modality) {
  StimulusSet s;
  s.name = name;
  s.kind = kind;
  s.modality = modality;
  for (std::size_t i = 0; i < n; ++i) s.item_ids.push_back(i);
  return s;
}

ItmMatrix block(const std::string& img, const std::string& txt, std::size_t rows,
                std::size_t cols, float value) {
  return ItmMatrix(img, txt, EmbeddingMatrix(rows, cols, std::vector<float>(rows * cols, value)));
}

struct ItmCase {
  Manifest manifest;
  BiasTest test;
};

// Two images per target group, two phrases per attribute set; X matches A
// at pxa, B at pxb, and Y the other way round.
ItmCase itm_case(float pxa, float pxb, float pya, float pyb, std::size_t top_k) {
  ItmCase c;
  c.manifest.sets = {itm_set("x", 2, SetKind::target, Modality::image),
                     itm_set("y", 2, SetKind::target, Modality::image),
                     itm_set("a", 2, SetKind::attribute, Modality::text),
                     itm_set("b", 2, SetKind::attribute, Modality::text)};
  c.manifest.itm_blocks = {block("x", "a", 2, 2, pxa), block("x", "b", 2, 2, pxb),
                           block("y", "a", 2, 2, pya), block("y", "b", 2, 2, pyb)};
  c.test = {"itm", c.manifest.set("x"), c.manifest.set("y"), c.manifest.set("a"),
            c.manifest.set("b"), Scorer::itm, top_k};
  return c;
}

}  // namespace

TEST_CASE("phi_cosine examples") {
  const auto a = make_set("a", {{1, 0}});
  const auto b = make_set("b", {{0, 1}});
  CHECK(phi_cosine(f({1, 0}), a, b) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi_cosine(f({1, 1}), a, b) == doctest::Approx(0.0).epsilon(1e-15));
  const auto same = make_set("same", {{0.3, -2}, {5, 1}});
  for (auto w : {f({1, 2}), f({-3, 0.5}), f({0.1, 0.1})}) {
    CHECK(phi_cosine(w, same, same) == 0.0);
  }
}

TEST_CASE("phi_cosine rejects zero-norm vectors naming the item") {
  const auto a = make_set("a", {{1, 0}, {0, 0}});
  const auto b = make_set("b", {{0, 1}, {1, 1}});
  CHECK_THROWS_WITH_AS(phi_cosine(f({1, 0}), a, b), doctest::Contains("a#1"), DegenerateError);
  CHECK_THROWS_AS(phi_cosine(f({0, 0}), b, b), DegenerateError);
}

TEST_CASE("phi_itm examples") {
  const std::vector<double> a = {0.9}, b = {0.1};
  CHECK(phi_itm(a, b, 2) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(phi_itm(a, b, 1) == doctest::Approx(0.9).epsilon(1e-15));
  const std::vector<double> eq = {0.4, 0.4, 0.4};
  CHECK(phi_itm(eq, eq, 4) == 0.0);
}

TEST_CASE("phi_itm matches the selection oracle, and top_k = |A|+|B| is unfiltered") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t na = 1 + rng() % 6;
    std::vector<double> sa(na), sb(na);
    for (auto& v : sa) v = std::round(u(rng) * 8) / 8;  // coarse grid forces ties
    for (auto& v : sb) v = std::round(u(rng) * 8) / 8;
    const std::size_t k = 1 + rng() % (2 * na + 2);
    CHECK(phi_itm(sa, sb, k) == doctest::Approx(oracle::phi_itm(sa, sb, k)).epsilon(1e-12));
    double ma = 0, mb = 0;
    for (double v : sa) ma += v;
    for (double v : sb) mb += v;
    CHECK(phi_itm(sa, sb, 2 * na) ==
          doctest::Approx(ma / na - mb / na).epsilon(1e-12));
  }
}

TEST_CASE("effect size of the hand-computed instance") {
  const oracle::Instance inst{{{1, 0}}, {{0, 1}}, {{1, 0}}, {{0, 1}}};
  const auto r = effect_size(testing::make_test(inst));
  CHECK(r.d == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r.mean_x == doctest::Approx(1.0));
  CHECK(r.mean_y == doctest::Approx(-1.0));
  CHECK(r.stddev == doctest::Approx(1.0));
  REQUIRE(r.phi_per_item.size() == 2);
  CHECK(r.phi_per_item[0].set == "x");
  CHECK(r.phi_per_item[1].phi == doctest::Approx(-1.0));
  CHECK(oracle::effect_size(inst) == doctest::Approx(2.0).epsilon(1e-15));

  // Sample convention: var = (1 + 1) / 1, d = 2 / sqrt(2).
  const auto s = effect_size(testing::make_test(inst), StdDevConvention::sample);
  CHECK(s.d == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("identical targets give d = 0") {
  const oracle::Set same = {{1, 0.2}, {0.1, 1}, {0.5, 0.5}};
  const oracle::Instance inst{same, same, {{1, 0}, {0.3, 0.2}}, {{0, 1}, {-1, 0.4}}};
  CHECK(effect_size(testing::make_test(inst)).d == 0.0);
}

TEST_CASE("all phi identical is degenerate") {
  const oracle::Instance inst{{{1, 1}, {2, 2}}, {{3, 3}, {1, 1}}, {{1, 0}}, {{0, 1}}};
  CHECK_THROWS_WITH_AS(effect_size(testing::make_test(inst)), doctest::Contains("identical"),
                       DegenerateError);
}

TEST_CASE("swapping targets or attributes negates d exactly") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = testing::random_small_instance(rng);
    const double d = effect_size(testing::make_test(inst)).d;
    CHECK(effect_size(testing::make_test({inst.y, inst.x, inst.a, inst.b})).d == -d);
    CHECK(effect_size(testing::make_test({inst.x, inst.y, inst.b, inst.a})).d == -d);
  }
}

TEST_CASE("validate_test") {
  const oracle::Set two = {{1, 0}, {0, 1}};
  const oracle::Set one = {{1, 1}};
  CHECK_THROWS_WITH_AS(effect_size(testing::make_test({two, one, two, two})),
                       doctest::Contains("differ in size"), ConfigError);
  CHECK_THROWS_WITH_AS(effect_size(testing::make_test({two, two, two, one})),
                       doctest::Contains("differ in size"), ConfigError);
  CHECK_THROWS_WITH_AS(effect_size(testing::make_test({two, two, two, {{1, 0, 0}, {0, 0, 1}}})),
                       doctest::Contains("different dims"), ConfigError);
  auto t = testing::make_test({two, two, two, two});
  t.scorer = Scorer::itm;
  CHECK_THROWS_AS(effect_size(t), ConfigError);
}

TEST_CASE("itm fairness gap") {
  SUBCASE("X matches A, Y matches B") {
    auto c = itm_case(0.9f, 0.1f, 0.1f, 0.9f, 15);
    const auto r = itm_fairness_gap(c.test, c.manifest);
    // Values pass through float: 0.9f - 0.1f on each side.
    const double gap = 2.0 * (static_cast<double>(0.9f) - static_cast<double>(0.1f));
    CHECK(r.delta == doctest::Approx(1.6).epsilon(1e-7));
    CHECK(r.delta == doctest::Approx(gap).epsilon(1e-15));
    REQUIRE(r.d.has_value());
    CHECK(*r.d == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.effective_top_k == 4);
    CHECK(std::any_of(r.warnings.begin(), r.warnings.end(),
                      [](const std::string& w) { return w.find("clamped") != std::string::npos; }));
  }
  SUBCASE("uniform probabilities give a delta-only result") {
    auto c = itm_case(0.5f, 0.5f, 0.5f, 0.5f, 2);
    const auto r = itm_fairness_gap(c.test, c.manifest);
    CHECK(r.delta == 0.0);
    CHECK_FALSE(r.d.has_value());
    CHECK(r.warnings.size() == 1);
  }
  SUBCASE("permuting items leaves delta and d unchanged") {
    Manifest m;
    m.sets = {itm_set("x", 3, SetKind::target, Modality::image),
              itm_set("y", 3, SetKind::target, Modality::image),
              itm_set("a", 2, SetKind::attribute, Modality::text),
              itm_set("b", 2, SetKind::attribute, Modality::text)};
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<float> u(0, 1);
    auto random_block = [&](const std::string& i, const std::string& t) {
      std::vector<float> v(6);
      for (auto& x : v) x = u(rng);
      return ItmMatrix(i, t, EmbeddingMatrix(3, 2, v));
    };
    m.itm_blocks = {random_block("x", "a"), random_block("x", "b"), random_block("y", "a"),
                    random_block("y", "b")};
    BiasTest t{"p", m.set("x"), m.set("y"), m.set("a"), m.set("b"), Scorer::itm, 3};
    const auto base = itm_fairness_gap(t, m);
    BiasTest p = t;
    p.x.item_ids = {2, 0, 1};
    p.y.item_ids = {1, 2, 0};
    const auto perm = itm_fairness_gap(p, m);
    CHECK(perm.delta == doctest::Approx(base.delta).epsilon(1e-12));
    REQUIRE(base.d.has_value());
    CHECK(*perm.d == doctest::Approx(*base.d).epsilon(1e-12));
  }
  SUBCASE("missing block is a config error") {
    auto c = itm_case(0.9f, 0.1f, 0.1f, 0.9f, 2);
    c.manifest.itm_blocks.pop_back();
    CHECK_THROWS_AS(itm_fairness_gap(c.test, c.manifest), ConfigError);
  }
}

TEST_CASE("associate examples") {
  SUBCASE("self-similarity") {
    const auto vocab = make_set("v", {{0.2, 1, 0.3}, {1, -1, 0}, {0, 0, 1}}, SetKind::attribute,
                                Modality::text);
    const auto group = make_set("g", {{0.2, 1, 0.3}, {0.2, 1, 0.3}, {0.2, 1, 0.3}});
    const std::vector<StimulusSet> v = {vocab};
    const auto t = associate(group, v, 2);
    REQUIRE(t.ranked.size() == 2);
    CHECK(t.ranked[0].index == 0);
    CHECK(t.ranked[0].score == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("two orthogonal words") {
    auto vocab = make_set("v", {{1, 0}, {0, 1}}, SetKind::attribute, Modality::text);
    vocab.item_names = {"w1", "w2"};
    vocab.sentiments = {"positive", "negative"};
    const auto group = make_set("g", {{2, 0}, {5, 0}});
    const std::vector<StimulusSet> v = {vocab};
    const auto t = associate(group, v, 2);
    REQUIRE(t.ranked.size() == 2);
    CHECK(t.ranked[0].attribute == "w1");
    CHECK(t.ranked[0].score == 1.0);
    CHECK(t.ranked[0].sentiment == "positive");
    CHECK(t.ranked[1].attribute == "w2");
    CHECK(t.ranked[1].score == 0.0);
    CHECK(t.warnings.empty());
  }
  SUBCASE("ties go to the lower index, across concatenated sets") {
    const auto v1 = make_set("v1", {{0, 1}, {1, 0}}, SetKind::attribute, Modality::text);
    const auto v2 = make_set("v2", {{1, 0}, {3, 0}}, SetKind::attribute, Modality::text);
    const auto group = make_set("g", {{1, 0}});
    const std::vector<StimulusSet> v = {v1, v2};
    const auto t = associate(group, v, 4);
    REQUIRE(t.ranked.size() == 4);
    CHECK(t.ranked[0].index == 1);
    CHECK(t.ranked[1].index == 2);
    CHECK(t.ranked[1].set == "v2");
    CHECK(t.ranked[2].index == 3);
    CHECK(t.ranked[3].index == 0);
  }
  SUBCASE("k beyond the vocabulary is clamped with a warning") {
    const auto vocab = make_set("v", {{1, 0}, {0, 1}}, SetKind::attribute, Modality::text);
    const auto group = make_set("g", {{1, 1}});
    const std::vector<StimulusSet> v = {vocab};
    const auto t = associate(group, v, 15);
    CHECK(t.ranked.size() == 2);
    REQUIRE(t.warnings.size() == 1);
    CHECK(t.warnings[0].find("clamped") != std::string::npos);
    CHECK_THROWS_AS(associate(group, v, 0), ConfigError);
  }
  SUBCASE("120-word vocabulary gives 15 rows and scores are non-increasing") {
    std::mt19937_64 rng(9);
    const auto pos = make_set("pos", testing::random_set(rng, 60, 8), SetKind::attribute,
                              Modality::text);
    const auto neg = make_set("neg", testing::random_set(rng, 60, 8), SetKind::attribute,
                              Modality::text);
    const auto rows = testing::random_set(rng, 10, 8);
    const auto group = make_set("g", rows);
    const std::vector<StimulusSet> v = {pos, neg};
    const auto t = associate(group, v, 15);
    REQUIRE(t.ranked.size() == 15);
    for (std::size_t r = 1; r < t.ranked.size(); ++r) {
      CHECK(t.ranked[r - 1].score >= t.ranked[r].score);
    }
    // Brute force over all 120 items.
    std::vector<std::pair<double, std::size_t>> expected;
    for (std::size_t i = 0; i < 120; ++i) {
      const auto& src = i < 60 ? pos : neg;
      const auto vec = src.vector(i % 60);
      oracle::Vec w(vec.begin(), vec.end());
      double s = 0;
      for (const auto& g : rows) s += oracle::cosine(g, w);
      expected.push_back({s / rows.size(), i});
    }
    std::stable_sort(expected.begin(), expected.end(),
                     [](const auto& l, const auto& r) { return l.first > r.first; });
    for (std::size_t r = 0; r < 15; ++r) {
      CHECK(t.ranked[r].index == expected[r].second);
      CHECK(t.ranked[r].score == doctest::Approx(expected[r].first).epsilon(1e-12));
    }
    // Reordering the group keeps the ranking.
    auto reversed = rows;
    std::reverse(reversed.begin(), reversed.end());
    const auto t2 = associate(make_set("g", reversed), v, 15);
    for (std::size_t r = 0; r < 15; ++r) {
      CHECK(t2.ranked[r].index == t.ranked[r].index);
      CHECK(t2.ranked[r].score == doctest::Approx(t.ranked[r].score).epsilon(1e-12));
    }
    // Worker count does not matter.
    const auto t3 = associate(group, v, 15, ExecOptions{7});
    for (std::size_t r = 0; r < 15; ++r) CHECK(t3.ranked[r].score == t.ranked[r].score);
  }
}
