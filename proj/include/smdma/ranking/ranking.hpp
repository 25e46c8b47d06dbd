#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"
#include "smdma/nnkit/loss.hpp"
#include "smdma/nnkit/tensor.hpp"

namespace smdma::ranking {

using Permutation = std::vector<std::uint32_t>;

enum class RankingMode : std::uint8_t { calibrated = 0, per_frame = 1 };

inline const char* to_string(RankingMode m) { return m == RankingMode::calibrated ? "calibrated" : "per_frame"; }

/// Per-dimension reconstruction sensitivity and the descending order it induces.
struct SensitivityRanking {
  std::vector<double> scores;
  Permutation perm;
  double epsilon = 0.01;
  RankingMode source = RankingMode::calibrated;

  std::size_t dim() const noexcept { return perm.size(); }
};

/// Crop bookkeeping: K = floor(r d) leading sorted dimensions survive.
struct CropSpec {
  double ratio = 1.0;
  std::size_t kept = 0;
  std::vector<std::uint8_t> mask;  // mask[i] = 1 iff i < kept (positions of the sorted vector)
};

struct Cropped {
  nn::Tensor payload;
  CropSpec spec;
};

template <class D>
concept FeatureDecoder = requires(const D& d, const nn::Tensor& f) {
  { d(f) } -> std::convertible_to<nn::Tensor>;
};

inline bool is_permutation(std::span<const std::uint32_t> perm, std::size_t d) {
  if (perm.size() != d) return false;
  std::vector<std::uint8_t> seen(d, 0);
  for (auto p : perm) {
    if (p >= d || seen[p]) return false;
    seen[p] = 1;
  }
  return true;
}

/// score_i = L(target, dec(f + eps e_i)) - L(target, dec(f)), L = MSE.
/// Costs exactly d + 1 decoder evaluations.
template <FeatureDecoder D>
std::vector<double> sensitivity_scores(const nn::Tensor& f, const D& decoder, std::span<const double> target, double eps) {
  require(eps > 0.0 && std::isfinite(eps), ErrorKind::usage, "perturbation amplitude must be positive");
  const nn::Tensor base = decoder(f);
  if (!base.all_finite()) fail(ErrorKind::numeric, "decoder produced non-finite output for the unperturbed features");
  const double base_loss = nn::mse(base.span(), target);
  std::vector<double> scores(f.size());
  nn::Tensor probe = f;
  for (std::size_t i = 0; i < f.size(); ++i) {
    probe[i] = f[i] + eps;
    const nn::Tensor out = decoder(probe);
    probe[i] = f[i];
    if (!out.all_finite()) fail(ErrorKind::numeric, "decoder produced non-finite output when perturbing dimension " + std::to_string(i));
    scores[i] = nn::mse(out.span(), target) - base_loss;
  }
  return scores;
}

/// Descending stable argsort; ties keep ascending original index.
inline Permutation rank(std::span<const double> scores) {
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!std::isfinite(scores[i])) fail(ErrorKind::numeric, "non-finite sensitivity score at dimension " + std::to_string(i));
  Permutation perm(scores.size());
  std::iota(perm.begin(), perm.end(), 0u);
  std::stable_sort(perm.begin(), perm.end(), [&](std::uint32_t a, std::uint32_t b) { return scores[a] > scores[b]; });
  return perm;
}

inline Permutation identity_permutation(std::size_t d) {
  Permutation p(d);
  std::iota(p.begin(), p.end(), 0u);
  return p;
}

inline Permutation random_permutation(std::size_t d, Rng& rng) {
  Permutation p = identity_permutation(d);
  rng.shuffle(std::span(p));
  return p;
}

/// K = floor(r d); a tiny guard absorbs representation error such as 0.3 * 10.
inline std::size_t preserved_count(double ratio, std::size_t d) {
  require(ratio > 0.0 && ratio <= 1.0, ErrorKind::usage, "bandwidth ratio must lie in (0, 1]");
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(d) + 1e-9));
}

inline CropSpec crop_spec(double ratio, std::size_t d) {
  CropSpec spec{ratio, preserved_count(ratio, d), {}};
  if (spec.kept == 0) fail(ErrorKind::usage, "ratio preserves zero dimensions");
  spec.mask.assign(d, 0);
  std::fill_n(spec.mask.begin(), spec.kept, std::uint8_t{1});
  return spec;
}

/// Reorder by perm and keep the leading K entries. Equivalent to masking the
/// sorted vector and dropping its all-zero tail.
inline Cropped crop(const nn::Tensor& f, std::span<const std::uint32_t> perm, double ratio) {
  if (!is_permutation(perm, f.size())) fail(ErrorKind::usage, "crop: invalid permutation for dimension " + std::to_string(f.size()));
  Cropped out{nn::Tensor(), crop_spec(ratio, f.size())};
  out.payload = nn::Tensor(out.spec.kept);
  for (std::size_t i = 0; i < out.spec.kept; ++i) out.payload[i] = f[perm[i]];
  return out;
}

/// Zero-pad the sorted payload to d and undo the permutation.
inline nn::Tensor restore(const nn::Tensor& payload, std::span<const std::uint32_t> perm, std::size_t d) {
  if (!is_permutation(perm, d)) fail(ErrorKind::usage, "restore: invalid permutation for dimension " + std::to_string(d));
  if (payload.size() > d) fail(ErrorKind::shape, "restore: payload longer than feature dimension");
  if (payload.empty()) fail(ErrorKind::usage, "restore: empty payload");
  nn::Tensor f(d);
  for (std::size_t i = 0; i < payload.size(); ++i) f[perm[i]] = payload[i];
  return f;
}

template <FeatureDecoder D>
SensitivityRanking rank_features(const nn::Tensor& f, const D& decoder, std::span<const double> target, double eps) {
  SensitivityRanking r;
  r.scores = sensitivity_scores(f, decoder, target, eps);
  r.perm = rank(r.scores);
  r.epsilon = eps;
  r.source = RankingMode::per_frame;
  return r;
}

/// Average scores over (features, target) items and rank once.
template <FeatureDecoder D>
SensitivityRanking calibrate_ranking(std::span<const nn::Tensor> features, std::span<const nn::Tensor> targets, const D& decoder,
                                     double eps) {
  require(!features.empty(), ErrorKind::data, "calibration dataset is empty");
  require(features.size() == targets.size(), ErrorKind::shape, "calibration features/targets count mismatch");
  const std::size_t d = features.front().size();
  std::vector<double> mean(d, 0.0);
  for (std::size_t n = 0; n < features.size(); ++n) {
    require(features[n].size() == d, ErrorKind::shape, "calibration features have inconsistent dimension");
    const auto s = sensitivity_scores(features[n], decoder, targets[n].span(), eps);
    for (std::size_t i = 0; i < d; ++i) mean[i] += s[i];
  }
  for (auto& v : mean) v /= static_cast<double>(features.size());
  SensitivityRanking r;
  r.perm = rank(mean);
  r.scores = std::move(mean);
  r.epsilon = eps;
  r.source = RankingMode::calibrated;
  return r;
}

}  // namespace smdma::ranking
