#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mmbias/bias_metrics.hpp"
#include "mmbias/embedding.hpp"
#include "oracle.hpp"

namespace testing {

// One matrix per set, values rounded through float so the library and the
// oracle read identical numbers.
inline mmbias::StimulusSet make_set(const std::string& name, const oracle::Set& rows,
                                    mmbias::SetKind kind = mmbias::SetKind::target,
                                    mmbias::Modality modality = mmbias::Modality::image) {
  std::vector<float> values;
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  auto m = std::make_shared<const mmbias::EmbeddingMatrix>(rows.size(), rows.front().size(),
                                                           std::move(values));
  return mmbias::make_stimulus_set(name, kind, modality, std::move(m));
}

inline mmbias::BiasTest make_test(const oracle::Instance& t, const std::string& name = "t") {
  mmbias::BiasTest test;
  test.name = name;
  test.x = make_set("x", t.x);
  test.y = make_set("y", t.y);
  test.a = make_set("a", t.a, mmbias::SetKind::attribute, mmbias::Modality::text);
  test.b = make_set("b", t.b, mmbias::SetKind::attribute, mmbias::Modality::text);
  return test;
}

inline oracle::Set random_set(std::mt19937_64& rng, std::size_t n, std::size_t dims) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  oracle::Set s(n, oracle::Vec(dims));
  for (auto& v : s) {
    for (auto& x : v) x = static_cast<double>(normal(rng));
  }
  return s;
}

inline oracle::Instance random_instance(std::mt19937_64& rng, std::size_t n_targets,
                                        std::size_t n_attributes, std::size_t dims) {
  return {random_set(rng, n_targets, dims), random_set(rng, n_targets, dims),
          random_set(rng, n_attributes, dims), random_set(rng, n_attributes, dims)};
}

// Random sizes within the oracle-equivalence bounds: |X|=|Y| in [2,10],
// |A|=|B| in [1,10], dims in [2,8].
inline oracle::Instance random_small_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> targets(2, 10), attrs(1, 10), dims(2, 8);
  const auto nt = targets(rng);
  const auto na = attrs(rng);
  const auto d = dims(rng);
  return random_instance(rng, nt, na, d);
}

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string slurp_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("mmbias_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing

namespace testing {

inline oracle::Set to_oracle(const mmbias::StimulusSet& s) {
  oracle::Set out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto v = s.vector(i);
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

inline oracle::Instance to_oracle(const mmbias::BiasTest& t) {
  return {to_oracle(t.x), to_oracle(t.y), to_oracle(t.a), to_oracle(t.b)};
}

}  // namespace testing
