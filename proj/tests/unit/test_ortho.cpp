#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "smdma/core/rng.hpp"
#include "smdma/ortho/frame.hpp"
#include "smdma/ortho/ortho.hpp"
#include "support.hpp"

using namespace smdma;
using namespace smdma::ortho;

namespace {

nn::Tensor random_tensor(Rng& r, std::size_t n) {
  nn::Tensor t(n);
  for (auto& v : t) v = r.normal();
  return t;
}

// Random orthonormal pair of length q by Gram-Schmidt.
OrthoBasis random_basis(Rng& r, std::size_t q) {
  OrthoBasis b;
  b.u1.assign(q, 0.0);
  b.u2.assign(q, 0.0);
  for (auto& v : b.u1) v = r.normal();
  for (auto& v : b.u2) v = r.normal();
  const double n1 = std::sqrt(nn::dot(b.u1, b.u1));
  for (auto& v : b.u1) v /= n1;
  const double p = nn::dot(b.u1, b.u2);
  for (std::size_t i = 0; i < q; ++i) b.u2[i] -= p * b.u1[i];
  const double n2 = std::sqrt(nn::dot(b.u2, b.u2));
  for (auto& v : b.u2) v /= n2;
  return b;
}

double max_rel(const nn::Tensor& got, const nn::Tensor& want) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i)
    worst = std::max(worst, std::abs(got[i] - want[i]) / std::max(1.0, std::abs(want[i])));
  return worst;
}

Frame sample_frame(ranking::RankingMode mode) {
  Frame f;
  f.header.dim = 6;
  f.header.kept = 3;
  f.header.q = 4;
  f.header.mode = mode;
  if (mode == ranking::RankingMode::per_frame) {
    f.header.shared_perm = {5, 4, 3, 2, 1, 0};
    f.header.delta_perm = {0, 2, 4, 1, 3, 5};
  }
  f.header.norm_scale = 1.75;
  f.payload = nn::Tensor(12);
  for (std::size_t i = 0; i < 12; ++i) f.payload[i] = 0.25 * static_cast<double>(i) - 1.0;
  return f;
}

}  // namespace

TEST(Basis, DefaultIsOrthonormal) {
  const OrthoBasis b;
  EXPECT_NO_THROW(b.validate());
  EXPECT_EQ(nn::dot(b.u1, b.u2), 0.0);
  EXPECT_EQ(b.q(), 4u);
}

TEST(Basis, RejectsNonOrthogonalOrNonUnit) {
  OrthoBasis b;
  b.u2 = b.u1;
  EXPECT_EQ(test::thrown_kind([&] { b.validate(); }), ErrorKind::config);
  b = {};
  for (auto& v : b.u1) v *= 1.0 + 1e-8;
  EXPECT_EQ(test::thrown_kind([&] { b.validate(); }), ErrorKind::config);
  b = {};
  b.u2.pop_back();
  EXPECT_EQ(test::thrown_kind([&] { b.validate(); }), ErrorKind::config);
}

TEST(Embed, KroneckerDefinition) {
  const OrthoBasis b;
  EXPECT_EQ(embed(std::vector<double>{1, 2}, b.u1), (nn::Tensor{0.5, -0.5, 0.5, -0.5, 1, -1, 1, -1}));
  for (double v : embed(std::vector<double>(3, 0.0), b.u2)) EXPECT_EQ(v, 0.0);
  Rng r(1);
  const auto f = random_tensor(r, 9);
  const auto e = embed(f.span(), b.u1);
  EXPECT_NEAR(nn::dot(e.span(), e.span()), nn::dot(f.span(), f.span()), 1e-12);
}

TEST(Mix, BlockArithmeticExample) {
  const OrthoBasis b;
  const auto m = mix(embed(std::vector<double>{1, 2}, b.u1), embed(std::vector<double>{3, 4}, b.u2), 4, false);
  EXPECT_EQ(m.payload, (nn::Tensor{2, 1, -1, -2, 3, 1, -1, -3}));
  EXPECT_EQ(m.norm_scale, 1.0);
  EXPECT_EQ(m.kept, 2u);
  const double first_block[] = {2, 1, -1, -2};
  EXPECT_DOUBLE_EQ(nn::dot(first_block, b.u1), 1.0);
  EXPECT_DOUBLE_EQ(nn::dot(first_block, b.u2), 3.0);
}

TEST(Mix, ZeroDeltaIsProportionalToShared) {
  const OrthoBasis b;
  const auto s = embed(std::vector<double>{1, -3, 2}, b.u1);
  const auto m = mix(s, nn::Tensor(s.size()), 4);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_DOUBLE_EQ(m.payload[i] * m.norm_scale, s[i]);
}

TEST(Mix, NormalizedPowerIsUnit) {
  Rng r(2);
  const OrthoBasis b;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 1 + r.below(16);
    const auto m = mix(embed(random_tensor(r, k).span(), b.u1), embed(random_tensor(r, k).span(), b.u2), 4);
    const double p = nn::dot(m.payload.span(), m.payload.span()) / static_cast<double>(m.payload.size());
    ASSERT_NEAR(p, 1.0, 1e-9);
    ASSERT_GT(m.norm_scale, 0.0);
  }
}

TEST(Mix, ZeroInputsKeepFiniteScale) {
  const auto m = mix(nn::Tensor(8), nn::Tensor(8), 4);
  EXPECT_EQ(m.norm_scale, 1e-12);
  for (double v : m.payload) EXPECT_EQ(v, 0.0);
}

TEST(Mix, LengthErrors) {
  EXPECT_EQ(test::thrown_kind([] { mix(nn::Tensor(8), nn::Tensor(4), 4); }), ErrorKind::shape);
  EXPECT_EQ(test::thrown_kind([] { mix(nn::Tensor(6), nn::Tensor(6), 4); }), ErrorKind::shape);
  EXPECT_EQ(test::thrown_kind([] { separate(std::vector<double>(7), 1.0, OrthoBasis{}.u1); }), ErrorKind::shape);
}

TEST(Separate, NoiselessRoundTripRecoversBothStreams) {
  Rng r(3);
  for (int t = 0; t < 500; ++t) {
    const std::size_t q = 2 + r.below(6);
    const auto b = t % 2 ? random_basis(r, q) : OrthoBasis{};
    const std::size_t k = 1 + r.below(20);
    const auto fs = random_tensor(r, k), fd = random_tensor(r, k);
    const auto m = mix(embed(fs.span(), b.u1), embed(fd.span(), b.u2), b.q());
    ASSERT_LT(max_rel(separate(m, b.u1), fs), 1e-9);
    ASSERT_LT(max_rel(separate(m, b.u2), fd), 1e-9);
  }
}

TEST(Separate, NoiseEntersThroughBlockProjection) {
  Rng r(4);
  const OrthoBasis b;
  const auto fs = random_tensor(r, 5), fd = random_tensor(r, 5);
  const auto m = mix(embed(fs.span(), b.u1), embed(fd.span(), b.u2), 4);
  const auto noise = random_tensor(r, 20);
  auto noisy = m.payload;
  for (std::size_t i = 0; i < 20; ++i) noisy[i] += noise[i];
  const auto got = separate(noisy.span(), m.norm_scale, b.u2);
  const auto clean = separate(m, b.u2);
  for (std::size_t k = 0; k < 5; ++k) {
    double proj = 0.0;
    for (std::size_t j = 0; j < 4; ++j) proj += noise[k * 4 + j] * b.u2[j];
    EXPECT_NEAR(got[k], clean[k] + proj * m.norm_scale, 1e-12);
  }
  const auto noise_only = separate(noise.span(), 1.0, b.u2);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(got[k], clean[k] + noise_only[k] * m.norm_scale, 1e-12);
}

TEST(StreamOrthogonality, EmbeddedStreamsAreOrthogonal) {
  Rng r(5);
  const OrthoBasis b;
  for (int t = 0; t < 1000; ++t) {
    const auto fs = random_tensor(r, 1 + r.below(64));
    const auto fd = t % 2 ? fs : random_tensor(r, fs.size());
    ASSERT_LT(verify_lemma1(fs.span(), fd.span(), b), 1e-12);
  }
}

TEST(StreamOrthogonality, MixedProductIdentity) {
  Rng r(6);
  for (int t = 0; t < 300; ++t) {
    const std::size_t q = 1 + r.below(8), k = 1 + r.below(10);
    std::vector<double> u(q), v(q);
    for (auto& x : u) x = r.normal();
    for (auto& x : v) x = r.normal();
    const auto a = random_tensor(r, k), c = random_tensor(r, k);
    const auto ea = embed(a.span(), u), ec = embed(c.span(), v);
    const double lhs = nn::dot(ea.span(), ec.span());
    const double rhs = nn::dot(a.span(), c.span()) * nn::dot(u, v);
    ASSERT_NEAR(lhs, rhs, 1e-10 * (1.0 + std::abs(rhs)));
  }
}

TEST(StreamOrthogonality, NonOrthogonalBasisLeaks) {
  Rng r(7);
  OrthoBasis b;
  b.u2 = b.u1;
  const auto fs = random_tensor(r, 8), fd = random_tensor(r, 8);
  EXPECT_NEAR(verify_lemma1(fs.span(), fd.span(), b), std::abs(nn::dot(fs.span(), fd.span())), 1e-12);
  EXPECT_GT(verify_lemma1(fs.span(), fd.span(), b), 1e-6);
}

TEST(FrameCodec, RoundTripBothModes) {
  for (auto mode : {ranking::RankingMode::calibrated, ranking::RankingMode::per_frame}) {
    const auto f = sample_frame(mode);
    const auto bytes = encode_frame(f);
    const auto back = decode_frame(bytes);
    EXPECT_EQ(back.header, f.header);
    EXPECT_EQ(back.payload, f.payload);
    EXPECT_EQ(encode_frame(back), bytes);
  }
}

TEST(FrameCodec, LayoutSizes) {
  // magic 8 + version 2 + d 4 + K 4 + q 2 + mode 1 + scale 8 + payload 8*12
  EXPECT_EQ(encode_frame(sample_frame(ranking::RankingMode::calibrated)).size(), 29u + 96u);
  EXPECT_EQ(encode_frame(sample_frame(ranking::RankingMode::per_frame)).size(), 29u + 96u + 2u * 6u * 4u);
}

TEST(FrameCodec, ValidationErrorsAreDataErrors) {
  auto f = sample_frame(ranking::RankingMode::per_frame);
  f.header.kept = 7;
  EXPECT_EQ(test::thrown_kind([&] { encode_frame(f); }), ErrorKind::data);
  f = sample_frame(ranking::RankingMode::per_frame);
  f.header.delta_perm[0] = 2;
  const auto msg = test::thrown_message([&] { encode_frame(f); });
  EXPECT_NE(msg.find("frame error"), std::string::npos);
  f = sample_frame(ranking::RankingMode::calibrated);
  f.header.shared_perm = {0, 1, 2, 3, 4, 5};
  EXPECT_EQ(test::thrown_kind([&] { encode_frame(f); }), ErrorKind::data);
  f = sample_frame(ranking::RankingMode::calibrated);
  f.header.norm_scale = 0.0;
  EXPECT_EQ(test::thrown_kind([&] { encode_frame(f); }), ErrorKind::data);
  f = sample_frame(ranking::RankingMode::calibrated);
  f.payload = nn::Tensor(11);
  EXPECT_EQ(test::thrown_kind([&] { encode_frame(f); }), ErrorKind::data);
}

TEST(FrameCodec, CorruptBytesRejectedWithoutCrashing) {
  const auto valid = encode_frame(sample_frame(ranking::RankingMode::per_frame));
  for (std::size_t n = 0; n < valid.size(); ++n) {
    const Bytes cut(valid.begin(), valid.begin() + static_cast<std::ptrdiff_t>(n));
    EXPECT_THROW(decode_frame(cut), Error) << n;
  }
  auto bad_mode = valid;
  bad_mode[20] = 7;
  try {
    decode_frame(bad_mode);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 20u);
  }
  Rng r(8);
  for (int t = 0; t < 3000; ++t) {
    auto m = valid;
    m[r.below(29 + 48)] = static_cast<std::uint8_t>(r.below(256));
    try {
      const auto f = decode_frame(m);
      validate(f.header, f.payload.size());
    } catch (const Error&) {
    }
  }
}
