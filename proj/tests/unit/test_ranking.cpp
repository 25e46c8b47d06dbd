#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "smdma/codecs/train.hpp"
#include "smdma/media/synth.hpp"
#include "smdma/ranking/ranking.hpp"
#include "smdma/ranking/ranking_io.hpp"
#include "support.hpp"

using namespace smdma;
using namespace smdma::ranking;

namespace {

// out = W f for a row-major (rows x cols) matrix, counting calls.
struct LinearDecoder {
  std::vector<double> w;
  std::size_t rows, cols;
  std::size_t* calls = nullptr;

  nn::Tensor operator()(const nn::Tensor& f) const {
    if (calls) ++*calls;
    nn::Tensor out(rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) out[r] += w[r * cols + c] * f[c];
    return out;
  }

  double column_norm2(std::size_t c) const {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += w[r * cols + c] * w[r * cols + c];
    return s;
  }
};

LinearDecoder random_linear(Rng& r, std::size_t rows, std::size_t cols) {
  LinearDecoder dec{std::vector<double>(rows * cols), rows, cols};
  for (auto& v : dec.w) v = r.normal();
  return dec;
}

}  // namespace

TEST(Sensitivity, LinearDecoderClosedForm) {
  const LinearDecoder dec{{1, 0, 0, 2}, 2, 2};
  const nn::Tensor f{0.3, -0.4};
  const auto target = dec(f);
  const auto s = sensitivity_scores(f, dec, target.span(), 0.1);
  EXPECT_NEAR(s[0], 0.005, 1e-12);
  EXPECT_NEAR(s[1], 0.02, 1e-12);
  EXPECT_EQ(rank(s), (Permutation{1, 0}));
}

TEST(Sensitivity, QuadraticInEpsilonAndColumnNormOracle) {
  Rng r(1);
  for (int t = 0; t < 20; ++t) {
    const auto dec = random_linear(r, 12, 6);
    nn::Tensor f(6);
    for (auto& v : f) v = r.normal();
    const auto target = dec(f);
    const auto s1 = sensitivity_scores(f, dec, target.span(), 0.01);
    const auto s2 = sensitivity_scores(f, dec, target.span(), 0.02);
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_NEAR(s1[i], 1e-4 * dec.column_norm2(i) / 12.0, 1e-12);
      EXPECT_NEAR(s2[i], 4.0 * s1[i], 1e-9);
    }
  }
}

TEST(Sensitivity, IgnoredDimensionScoresZero) {
  const LinearDecoder dec{{1, 0, 3, 0}, 2, 2};
  const nn::Tensor f{1, 1};
  const auto target = dec(f);
  EXPECT_EQ(sensitivity_scores(f, dec, target.span(), 0.05)[1], 0.0);
}

TEST(Sensitivity, CostsExactlyDPlusOneEvaluations) {
  Rng r(2);
  for (std::size_t d : {1u, 8u, 33u}) {
    std::size_t calls = 0;
    auto dec = random_linear(r, 4, d);
    dec.calls = &calls;
    nn::Tensor f(d, 0.5);
    const std::vector<double> target(4, 0.0);
    sensitivity_scores(f, dec, target, 0.01);
    EXPECT_EQ(calls, d + 1);
  }
}

TEST(Sensitivity, NonFiniteOutputNamesDimension) {
  auto dec = [](const nn::Tensor& f) {
    nn::Tensor out = f;
    if (f[2] != 0.0) out[0] = std::nan("");
    return out;
  };
  const std::vector<double> target(4, 0.0);
  const auto msg = test::thrown_message([&] { sensitivity_scores(nn::Tensor(4), dec, target, 0.1); });
  EXPECT_NE(msg.find("dimension 2"), std::string::npos) << msg;
  EXPECT_EQ(test::thrown_kind([&] { sensitivity_scores(nn::Tensor(4), dec, target, 0.0); }), ErrorKind::usage);
}

TEST(Rank, StableDescending) {
  EXPECT_EQ(rank(std::vector<double>{1, 1, 1}), (Permutation{0, 1, 2}));
  EXPECT_EQ(rank(std::vector<double>{3, 2, 1}), (Permutation{0, 1, 2}));
  EXPECT_EQ(rank(std::vector<double>{1, 3, 3, 2}), (Permutation{1, 2, 3, 0}));
  EXPECT_EQ(test::thrown_kind([] { rank(std::vector<double>{1, std::nan("")}); }), ErrorKind::numeric);
}

TEST(Rank, RandomizedOrderInvariant) {
  Rng r(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> s(1 + r.below(40));
    for (auto& v : s) v = static_cast<double>(r.below(5));
    const auto p = rank(s);
    ASSERT_TRUE(is_permutation(p, s.size()));
    for (std::size_t i = 1; i < p.size(); ++i) {
      ASSERT_GE(s[p[i - 1]], s[p[i]]);
      if (s[p[i - 1]] == s[p[i]]) ASSERT_LT(p[i - 1], p[i]);
    }
  }
}

TEST(Crop, PreservedCounts) {
  EXPECT_EQ(preserved_count(0.5, 64), 32u);
  EXPECT_EQ(preserved_count(0.3, 10), 3u);
  EXPECT_EQ(preserved_count(1.0, 7), 7u);
  EXPECT_EQ(preserved_count(0.99, 64), 63u);
  const auto msg = test::thrown_message([] { crop_spec(0.01, 64); });
  EXPECT_NE(msg.find("ratio preserves zero dimensions"), std::string::npos);
  EXPECT_EQ(test::thrown_kind([] { preserved_count(0.0, 4); }), ErrorKind::usage);
  EXPECT_EQ(test::thrown_kind([] { preserved_count(1.5, 4); }), ErrorKind::usage);
}

TEST(Crop, MaskHasKLeadingOnes) {
  const auto spec = crop_spec(0.25, 16);
  EXPECT_EQ(spec.kept, 4u);
  EXPECT_EQ(std::count(spec.mask.begin(), spec.mask.end(), 1), 4);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(spec.mask[i], i < 4 ? 1 : 0);
}

TEST(Crop, ExampleAndRestore) {
  const nn::Tensor f{10, 20, 30};
  const Permutation p{2, 0, 1};
  const auto c = crop(f, p, 2.0 / 3.0);
  EXPECT_EQ(c.spec.kept, 2u);
  EXPECT_EQ(c.payload, (nn::Tensor{30, 10}));
  EXPECT_EQ(restore(c.payload, p, 3), (nn::Tensor{10, 0, 30}));
}

TEST(Crop, MatchesMaskMultiplyOfSortedVector) {
  Rng r(4);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + r.below(30);
    nn::Tensor f(d);
    for (auto& v : f) v = r.normal();
    const auto p = random_permutation(d, r);
    const double ratio = r.uniform(1.0 / static_cast<double>(d), 1.0);
    const auto c = crop(f, p, ratio);
    for (std::size_t i = 0; i < d; ++i) {
      const double masked = f[p[i]] * c.spec.mask[i];
      if (i < c.spec.kept)
        ASSERT_EQ(c.payload[i], masked);
      else
        ASSERT_EQ(masked, 0.0 * f[p[i]]);
    }
  }
}

TEST(Crop, FullRatioRoundTripIsIdentity) {
  Rng r(5);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = 1 + r.below(20);
    nn::Tensor f(d);
    for (auto& v : f) v = r.normal();
    const auto p = random_permutation(d, r);
    ASSERT_EQ(restore(crop(f, p, 1.0).payload, p, d), f);
  }
}

TEST(Crop, KeptSetsNestAcrossRatios) {
  Rng r(6);
  const auto p = random_permutation(50, r);
  std::vector<std::uint32_t> prev;
  for (int k = 1; k <= 10; ++k) {
    const auto spec = crop_spec(k / 10.0, 50);
    std::vector<std::uint32_t> kept(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(spec.kept));
    ASSERT_TRUE(std::equal(prev.begin(), prev.end(), kept.begin()));
    prev = kept;
  }
}

TEST(Crop, RestoreErrors) {
  const Permutation p{0, 1, 2};
  EXPECT_EQ(test::thrown_kind([&] { restore(nn::Tensor{1, 2, 3, 4}, p, 3); }), ErrorKind::shape);
  EXPECT_EQ(test::thrown_kind([&] { restore(nn::Tensor{}, p, 3); }), ErrorKind::usage);
  EXPECT_EQ(test::thrown_kind([&] { restore(nn::Tensor{1}, Permutation{0, 0, 1}, 3); }), ErrorKind::usage);
  EXPECT_EQ(test::thrown_kind([&] { crop(nn::Tensor{1, 2}, p, 1.0); }), ErrorKind::usage);
}

TEST(Calibrate, SingleItemAndDuplication) {
  Rng r(7);
  const auto dec = random_linear(r, 10, 8);
  std::vector<nn::Tensor> fs, ts;
  for (int i = 0; i < 4; ++i) {
    nn::Tensor f(8), t(10);
    for (auto& v : f) v = r.normal();
    for (auto& v : t) v = r.normal();
    fs.push_back(f);
    ts.push_back(t);
  }
  const auto one = calibrate_ranking(std::span(fs).first(1), std::span(ts).first(1), dec, 0.01);
  EXPECT_EQ(one.perm, rank(sensitivity_scores(fs[0], dec, ts[0].span(), 0.01)));
  EXPECT_EQ(one.source, RankingMode::calibrated);
  const auto once = calibrate_ranking(fs, ts, dec, 0.01);
  auto fs2 = fs, ts2 = ts;
  fs2.insert(fs2.end(), fs.begin(), fs.end());
  ts2.insert(ts2.end(), ts.begin(), ts.end());
  EXPECT_EQ(calibrate_ranking(fs2, ts2, dec, 0.01).perm, once.perm);
}

TEST(Calibrate, LinearFixtureMatchesColumnNormOrder) {
  Rng r(8);
  const auto dec = random_linear(r, 16, 10);
  std::vector<nn::Tensor> fs, ts;
  for (int i = 0; i < 5; ++i) {
    nn::Tensor f(10);
    for (auto& v : f) v = r.normal();
    fs.push_back(f);
    ts.push_back(dec(f));
  }
  std::vector<double> norms(10);
  for (std::size_t c = 0; c < 10; ++c) norms[c] = dec.column_norm2(c);
  Permutation expect = identity_permutation(10);
  std::stable_sort(expect.begin(), expect.end(), [&](auto a, auto b) { return norms[a] > norms[b]; });
  EXPECT_EQ(calibrate_ranking(fs, ts, dec, 0.01).perm, expect);
}

TEST(Calibrate, Errors) {
  const LinearDecoder dec{{1}, 1, 1};
  std::vector<nn::Tensor> none;
  EXPECT_EQ(test::thrown_kind([&] { calibrate_ranking(none, none, dec, 0.01); }), ErrorKind::data);
}

TEST(Calibrate, CropQualityImprovesWithRatioOnTrainedCodec) {
  codecs::SemanticCodecConfig cfg;
  cfg.height = cfg.width = 16;
  cfg.hidden = 64;
  cfg.feature_dim = 20;
  std::vector<media::Image> data;
  media::PairSpec spec;
  spec.size = 16;
  for (std::size_t i = 0; i < 24; ++i) data.push_back(media::gen_pair(spec, 100 + i).first);

  // mse[seed][ratio index]
  std::vector<std::vector<double>> mse;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    codecs::TrainOptions opt;
    opt.epochs = 60;
    opt.learning_rate = 1e-3;
    opt.seed = seed;
    const auto codec = codecs::train_semantic(data, cfg, opt).codec;
    auto dec = [&](const nn::Tensor& f) { return codec.decode_raw(f); };
    std::vector<nn::Tensor> fs, ts;
    for (const auto& img : data) {
      fs.push_back(codec.encode(img));
      ts.push_back(nn::to_tensor(img.samples()));
    }
    const auto ranking = calibrate_ranking(fs, ts, dec, 0.01);
    std::vector<double> row;
    for (int k = 1; k <= 10; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto c = crop(fs[i], ranking.perm, k / 10.0);
        s += nn::mse(codec.decode_raw(restore(c.payload, ranking.perm, 20)), ts[i]);
      }
      row.push_back(s / static_cast<double>(fs.size()));
    }
    mse.push_back(row);
  }
  double prev = INFINITY;
  for (std::size_t k = 0; k < 10; ++k) {
    std::vector<double> col;
    for (const auto& row : mse) col.push_back(row[k]);
    std::sort(col.begin(), col.end());
    const double median = col[col.size() / 2];
    EXPECT_LE(median, prev) << "ratio " << (k + 1) / 10.0;
    prev = median;
  }
}

TEST(RankingFile, RoundTripAndChecksum) {
  Rng r(9);
  const auto p = random_permutation(12, r);
  const auto text = format_ranking(p, 0.01);
  const auto back = parse_ranking(text);
  EXPECT_EQ(back.perm, p);
  EXPECT_EQ(back.epsilon, 0.01);
  const auto body_end = text.find("crc32=");
  char expect[32];
  std::snprintf(expect, sizeof expect, "crc32=%08x\n", crc32(text.substr(0, body_end)));
  EXPECT_EQ(text.substr(body_end), expect);
}

TEST(RankingFile, CorruptionRejected) {
  const auto text = format_ranking(Permutation{2, 0, 1}, 0.01);
  auto flipped = text;
  flipped[4] = flipped[4] == '0' ? '1' : '0';
  EXPECT_THROW(parse_ranking(flipped), ParseError);
  EXPECT_THROW(parse_ranking(text.substr(0, text.size() - 3)), ParseError);
  EXPECT_THROW(parse_ranking("d=3\n0 0 1\nepsilon=0.01\ncrc32=00000000\n"), ParseError);
  EXPECT_THROW(parse_ranking("d=x\n"), ParseError);
  try {
    auto bad = text;
    bad[bad.size() - 2] = bad[bad.size() - 2] == 'a' ? 'b' : 'a';
    parse_ranking(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
  }
}
