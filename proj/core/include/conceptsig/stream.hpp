#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "conceptsig/signature.hpp"

namespace conceptsig {

// One attention head: fan-in K and granularity eps. Only buffer items with
// attention >= 1 - eps are eligible, so eps = 2 admits everything.
struct HeadConfig {
  int k = 8;
  double granularity = 2.0;
};

struct StreamConfig {
  int layers = 2;
  int buffer_size = 64;
  std::vector<HeadConfig> heads{HeadConfig{}};
  double match_threshold = 0.9;
  double admit_threshold = 0.8;
  // Items above layer 1 are flats; longer flats are projected to this size.
  int projection_dim = 40;
  std::uint64_t seed = 0;
  RankPolicy rank;

  void validate() const;
};

struct BufferItem {
  std::int64_t step = 0;
  Eigen::VectorXd value;
};

struct DictionaryEntry {
  int id = 0;
  Eigen::VectorXd flat;
  Signature signature;
  int hits = 1;
  std::int64_t created_step = 0;
};

struct LayerState {
  int index = 0;
  std::deque<BufferItem> buffer;  // oldest first
  std::vector<DictionaryEntry> dictionary;
};

struct HeadReport {
  std::vector<int> positions;  // 0 = most recent buffer item
  std::vector<std::int64_t> steps;
  std::vector<double> scores;  // descending
};

struct LayerReport {
  int layer = 0;
  std::int64_t step = 0;
  bool grouped = false;
  std::vector<HeadReport> heads;
  int group_rank = 0;
  std::optional<int> match_id;
  double match_score = 0.0;
  std::optional<int> admitted_id;
  std::string error;
};

struct LookupResult {
  std::optional<int> id;  // set when the best match reaches the threshold
  std::optional<int> best_id;
  double score = 0.0;
};

// Cosine similarity; throws InputError for a zero vector or length mismatch.
double attention_score(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b);

LookupResult dictionary_lookup(const LayerState& state, const Eigen::Ref<const Eigen::VectorXd>& flat,
                               double match_threshold);

// Top-K buffer items by attention to `query`, restricted to scores >= 1 - eps.
// Equal scores go to the more recent item.
HeadReport attend(const LayerState& state, const Eigen::Ref<const Eigen::VectorXd>& query,
                  const HeadConfig& head);

class StreamArchitecture {
 public:
  explicit StreamArchitecture(StreamConfig config);

  // Feeds one input through every layer and returns one report per layer that
  // received an item.
  std::vector<LayerReport> step(const Eigen::Ref<const Eigen::VectorXd>& x);

  const StreamConfig& config() const { return config_; }
  const std::vector<LayerState>& layers() const { return layers_; }
  std::int64_t steps() const { return step_; }

  // Signature of a group of row vectors as used inside the stack
  // (homogeneous degree 1).
  Signature fit_group(const Eigen::Ref<const Eigen::MatrixXd>& rows) const;

  // Flat used for dictionary entries and the next layer: F of the group fit.
  static Eigen::VectorXd group_flat(const Signature& sig);

 private:
  Eigen::VectorXd layer_input(int layer, const Eigen::VectorXd& flat) const;

  StreamConfig config_;
  std::vector<LayerState> layers_;
  std::int64_t step_ = 0;
};

}  // namespace conceptsig
