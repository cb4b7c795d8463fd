#include "conceptsig/stream.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "conceptsig/algebra.hpp"
#include "conceptsig/error.hpp"
#include "conceptsig/hierarchy.hpp"
#include "conceptsig/projection.hpp"
#include "conceptsig/rng.hpp"

namespace conceptsig {

void StreamConfig::validate() const {
  if (layers < 1) throw InputError("stream config: layers must be >= 1");
  if (buffer_size < 1) throw InputError("stream config: buffer_size must be >= 1");
  if (heads.empty()) throw InputError("stream config: at least one head is required");
  for (const auto& h : heads) {
    if (h.k < 1) throw InputError("stream config: head k must be >= 1");
    if (h.k > buffer_size) throw InputError("stream config: head k exceeds buffer_size");
    if (!(h.granularity > 0.0)) throw InputError("stream config: head granularity must be > 0");
  }
  if (!(admit_threshold <= match_threshold))
    throw InputError("stream config: admit_threshold must not exceed match_threshold");
  if (projection_dim < 1) throw InputError("stream config: projection_dim must be >= 1");
}

double attention_score(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw InputError("attention: length mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw InputError("attention: zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

LookupResult dictionary_lookup(const LayerState& state, const Eigen::Ref<const Eigen::VectorXd>& flat,
                               double match_threshold) {
  LookupResult out;
  double best = -2.0;
  for (const auto& e : state.dictionary) {
    if (e.flat.size() != flat.size()) continue;
    const double s = attention_score(e.flat, flat);
    if (s > best) {
      best = s;
      out.best_id = e.id;
    }
  }
  if (out.best_id) {
    out.score = best;
    if (best >= match_threshold) out.id = out.best_id;
  }
  return out;
}

HeadReport attend(const LayerState& state, const Eigen::Ref<const Eigen::VectorXd>& query,
                  const HeadConfig& head) {
  const int n = static_cast<int>(state.buffer.size());
  std::vector<std::pair<double, int>> scored;  // (score, position)
  scored.reserve(n);
  for (int pos = 0; pos < n; ++pos) {
    const BufferItem& item = state.buffer[static_cast<std::size_t>(n - 1 - pos)];
    const double s = attention_score(query, item.value);
    if (s >= 1.0 - head.granularity) scored.emplace_back(s, pos);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  HeadReport r;
  const int take = std::min<int>(head.k, static_cast<int>(scored.size()));
  for (int i = 0; i < take; ++i) {
    const int pos = scored[i].second;
    r.positions.push_back(pos);
    r.steps.push_back(state.buffer[static_cast<std::size_t>(n - 1 - pos)].step);
    r.scores.push_back(scored[i].first);
  }
  return r;
}

StreamArchitecture::StreamArchitecture(StreamConfig config) : config_(std::move(config)) {
  config_.validate();
  layers_.resize(static_cast<std::size_t>(config_.layers));
  for (int i = 0; i < config_.layers; ++i) layers_[i].index = i;
}

Signature StreamArchitecture::fit_group(const Eigen::Ref<const Eigen::MatrixXd>& rows) const {
  FitConfig cfg;
  cfg.degree = 1;
  cfg.include_constant = false;
  cfg.rank = config_.rank;
  return fit(PointCloud(rows), cfg);
}

Eigen::VectorXd StreamArchitecture::group_flat(const Signature& sig) {
  return flatten(sig, FlatSource::kComplement);
}

Eigen::VectorXd StreamArchitecture::layer_input(int layer, const Eigen::VectorXd& flat) const {
  if (flat.size() <= config_.projection_dim) return flat;
  const RandomProjection proj(static_cast<int>(flat.size()), config_.projection_dim,
                              derive_seed(config_.seed, static_cast<std::uint64_t>(layer)));
  return proj.apply(flat);
}

std::vector<LayerReport> StreamArchitecture::step(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const std::int64_t t = step_++;
  std::vector<LayerReport> reports;
  Eigen::VectorXd current = x;

  for (int l = 0; l < config_.layers; ++l) {
    LayerState& state = layers_[static_cast<std::size_t>(l)];
    if (!state.buffer.empty() && state.buffer.back().value.size() != current.size()) {
      std::ostringstream msg;
      msg << "stream: layer " << l + 1 << " item has length " << current.size() << ", expected "
          << state.buffer.back().value.size();
      throw InputError(msg.str());
    }
    LayerReport report;
    report.layer = l + 1;
    report.step = t;

    std::optional<Eigen::VectorXd> emitted;
    const bool warm = static_cast<int>(state.buffer.size()) >=
                      std::max_element(config_.heads.begin(), config_.heads.end(),
                                       [](const auto& a, const auto& b) { return a.k < b.k; })
                          ->k;
    const bool zero = current.norm() == 0.0;
    if (warm && !zero) {
      try {
        std::vector<Eigen::VectorXd> head_flats;
        std::optional<Signature> first_sig;
        for (const auto& head : config_.heads) {
          HeadReport hr = attend(state, current, head);
          const Eigen::Index g = static_cast<Eigen::Index>(hr.positions.size()) + 1;
          Eigen::MatrixXd rows(g, current.size());
          const int n = static_cast<int>(state.buffer.size());
          for (Eigen::Index i = 0; i + 1 < g; ++i)
            rows.row(i) = state.buffer[static_cast<std::size_t>(n - 1 - hr.positions[i])]
                              .value.transpose();
          rows.row(g - 1) = current.transpose();
          Signature sig = fit_group(rows);
          head_flats.push_back(group_flat(sig));
          if (!first_sig) {
            first_sig = std::move(sig);
            report.group_rank = static_cast<int>(first_sig->feature_dim()) - first_sig->null_rank;
          }
          report.heads.push_back(std::move(hr));
        }
        Eigen::Index total = 0;
        for (const auto& f : head_flats) total += f.size();
        Eigen::VectorXd flat(total);
        Eigen::Index off = 0;
        for (const auto& f : head_flats) {
          flat.segment(off, f.size()) = f;
          off += f.size();
        }
        report.grouped = true;

        const LookupResult hit = dictionary_lookup(state, flat, config_.match_threshold);
        report.match_score = hit.score;
        if (hit.id) {
          report.match_id = hit.id;
          for (auto& e : state.dictionary)
            if (e.id == *hit.id) ++e.hits;
        } else {
          const bool full = static_cast<int>(state.buffer.size()) >= config_.buffer_size;
          const int group_size = static_cast<int>(report.heads.front().positions.size()) + 1;
          const bool coherent = report.group_rank < group_size;
          const bool novel = !hit.best_id || hit.score < config_.admit_threshold;
          if (full && coherent && novel) {
            const int id = static_cast<int>(state.dictionary.size());
            state.dictionary.push_back(DictionaryEntry{id, flat, std::move(*first_sig), 1, t});
            report.admitted_id = id;
          }
        }
        emitted = flat;
      } catch (const Error& e) {
        report.error = e.what();
      }
    }

    state.buffer.push_back(BufferItem{t, current});
    while (static_cast<int>(state.buffer.size()) > config_.buffer_size) state.buffer.pop_front();
    reports.push_back(std::move(report));

    if (!emitted) break;
    current = layer_input(l + 1, *emitted);
  }
  return reports;
}

}  // namespace conceptsig
