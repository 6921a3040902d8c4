#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chatcheck/corpus.hpp"
#include "chatcheck/rng.hpp"

namespace testutil {

using chatcheck::SplitMix64;
using chatcheck::corpus::Dataset;
using chatcheck::corpus::LabeledExample;

inline Dataset make_dataset(std::vector<LabeledExample> rows) {
  return Dataset::from_examples(std::move(rows));
}

struct ClusterSpec {
  std::string intent;
  std::vector<double> center;
  double sigma = 1.0;
  int count = 0;
};

// Gaussian blobs in embedding space; ids are "<intent>-<i>".
inline Dataset make_clustered_dataset(const std::vector<ClusterSpec>& clusters, std::size_t dim,
                                      std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<LabeledExample> rows;
  for (const auto& spec : clusters) {
    for (int i = 0; i < spec.count; ++i) {
      LabeledExample ex;
      ex.id = spec.intent + "-" + std::to_string(i);
      ex.text = spec.intent + " utterance " + std::to_string(i);
      ex.intent = spec.intent;
      std::vector<double> v(dim, 0.0);
      for (std::size_t d = 0; d < dim; ++d)
        v[d] = (d < spec.center.size() ? spec.center[d] : 0.0) + spec.sigma * rng.gaussian();
      ex.embedding = std::move(v);
      rows.push_back(std::move(ex));
    }
  }
  return Dataset::from_examples(std::move(rows));
}

// Two heavily overlapping intents plus three well-separated ones.
inline Dataset overlapping_intents_fixture(std::uint64_t seed, int per_intent = 150,
                                           std::size_t dim = 16) {
  std::vector<ClusterSpec> clusters = {
      {"alpha", {0.0, 0.0}, 1.0, per_intent},
      {"beta", {0.7, 0.0}, 1.0, per_intent},
      {"gamma", {40.0, 0.0}, 1.0, per_intent},
      {"delta", {0.0, 40.0}, 1.0, per_intent},
      {"epsilon", {40.0, 40.0}, 1.0, per_intent},
  };
  return make_clustered_dataset(clusters, dim, seed);
}

// Unique scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("chatcheck-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testutil
