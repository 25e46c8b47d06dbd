#pragma once

#include <cassert>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "smdma/core/error.hpp"
#include "smdma/nnkit/tensor.hpp"

namespace smdma::ortho {

/// Pair of orthonormal signature vectors of length q.
struct OrthoBasis {
  std::vector<double> u1{0.5, -0.5, 0.5, -0.5};
  std::vector<double> u2{0.5, 0.5, -0.5, -0.5};

  std::size_t q() const noexcept { return u1.size(); }

  void validate() const {
    require(!u1.empty() && u1.size() == u2.size(), ErrorKind::config, "basis vectors must be nonempty and of equal length");
    const double cross = nn::dot(u1, u2);
    require(std::abs(cross) <= 1e-12, ErrorKind::config, "basis vectors are not orthogonal (u1.u2 = " + std::to_string(cross) + ")");
    for (const auto* u : {&u1, &u2}) {
      const double norm = std::sqrt(nn::dot(*u, *u));
      require(std::abs(norm - 1.0) <= 1e-9, ErrorKind::config, "basis vectors must have unit norm");
    }
  }
};

/// F (x) u: block i equals F_i * u.
inline nn::Tensor embed(std::span<const double> f, std::span<const double> u) {
  nn::Tensor out(f.size() * u.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j) out[i * u.size() + j] = f[i] * u[j];
  return out;
}

/// Superposed, power-normalized frame payload.
struct MixedFrame {
  nn::Tensor payload;
  double norm_scale = 1.0;
  std::size_t kept = 0;  // K, per-stream preserved dimension
  std::size_t q = 4;
};

/// payload = (a + b) / norm_scale with norm_scale = sqrt(mean((a + b)^2)) floored at
/// 1e-12. With `normalize` off the scale is fixed at 1.
inline MixedFrame mix(const nn::Tensor& shared_emb, const nn::Tensor& delta_emb, std::size_t q, bool normalize = true) {
  if (shared_emb.size() != delta_emb.size()) fail(ErrorKind::shape, "mix: embedded streams differ in length");
  require(q > 0 && shared_emb.size() % q == 0, ErrorKind::shape, "mix: stream length is not a multiple of q");
  assert(std::abs(nn::dot(shared_emb.span(), delta_emb.span())) <=
         1e-9 * (1.0 + std::sqrt(nn::dot(shared_emb.span(), shared_emb.span()) * nn::dot(delta_emb.span(), delta_emb.span()))));
  MixedFrame frame;
  frame.q = q;
  frame.kept = shared_emb.size() / q;
  frame.payload = shared_emb;
  double power = 0.0;
  for (std::size_t i = 0; i < frame.payload.size(); ++i) {
    frame.payload[i] += delta_emb[i];
    power += frame.payload[i] * frame.payload[i];
  }
  if (normalize && !frame.payload.empty()) {
    frame.norm_scale = std::max(std::sqrt(power / static_cast<double>(frame.payload.size())), 1e-12);
    for (auto& v : frame.payload) v /= frame.norm_scale;
  }
  return frame;
}

/// Blockwise projection: out_k = norm_scale * <payload block k, u>.
inline nn::Tensor separate(std::span<const double> payload, double norm_scale, std::span<const double> u) {
  const std::size_t q = u.size();
  if (q == 0 || payload.size() % q != 0)
    fail(ErrorKind::shape, "separate: payload length " + std::to_string(payload.size()) + " is not a multiple of q=" + std::to_string(q));
  nn::Tensor out(payload.size() / q);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < q; ++j) s += payload[k * q + j] * u[j];
    out[k] = s * norm_scale;
  }
  return out;
}

inline nn::Tensor separate(const MixedFrame& frame, std::span<const double> u) {
  return separate(frame.payload.span(), frame.norm_scale, u);
}

/// |<F_s (x) u1, F_d (x) u2>|.
inline double verify_lemma1(std::span<const double> fs, std::span<const double> fd, const OrthoBasis& basis) {
  require(fs.size() == fd.size() && basis.u1.size() == basis.u2.size(), ErrorKind::shape, "verify_lemma1: length mismatch");
  const auto a = embed(fs, basis.u1);
  const auto b = embed(fd, basis.u2);
  return std::abs(nn::dot(a.span(), b.span()));
}

}  // namespace smdma::ortho
