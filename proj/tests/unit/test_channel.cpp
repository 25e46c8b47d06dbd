#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <gtest/gtest.h>

#include "smdma/channel/channel.hpp"
#include "smdma/channel/hyp1f1.hpp"
#include "smdma/channel/shadowed_rician.hpp"
#include "support.hpp"

using namespace smdma;
using namespace smdma::channel;

namespace {

// Independent generator mirror: reference SplitMix64 over the derived key, with the
// documented uniform/normal/gamma consumption pattern.
struct Mirror {
  std::uint64_t state;
  explicit Mirror(std::uint64_t seed) : state(mix64(seed)) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double u() { return std::ldexp(static_cast<double>(next() >> 11), -53); }
  double u_open0() { return std::ldexp(static_cast<double>((next() >> 11) + 1), -53); }
  double normal() {
    const double a = u_open0(), b = u();
    return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * std::numbers::pi * b);
  }
  double gamma(double k, double theta) {
    const double d = k - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x = normal(), v = 1.0 + c * x;
      while (v <= 0.0) {
        x = normal();
        v = 1.0 + c * x;
      }
      v = v * v * v;
      const double w = u_open0();
      if (w < 1.0 - 0.0331 * x * x * x * x || std::log(w) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return theta * d * v;
    }
  }
};

double quad(auto f, double a, double b) { return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13); }

// Integral of sr_pdf over [0, inf) split at a few points where the mass lives.
double sr_integral(const SrParams& p, auto weight) {
  const double mu = p.mean_power();
  double s = 0.0, lo = 0.0;
  for (double hi : {0.25 * mu, 0.5 * mu, mu, 1.5 * mu, 2.0 * mu, 3.0 * mu, 6.0 * mu, 12.0 * mu, 40.0 * mu}) {
    s += quad([&](double r) { return weight(r) * sr_pdf(r, p); }, lo, hi);
    lo = hi;
  }
  return s;
}

template <class Pdf>
double ks_against_pdf(std::vector<double> xs, Pdf pdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double cdf = 0.0, prev = 0.0, d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > prev) cdf += boost::math::quadrature::gauss<double, 20>::integrate(pdf, prev, xs[i]);
    prev = xs[i];
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  return d;
}

}  // namespace

TEST(Hyp1f1, Identities) {
  for (double m : {0.5, 1.0, 19.4}) EXPECT_EQ(hyp1f1(m, 1.0, 0.0), 1.0);
  EXPECT_NEAR(hyp1f1(1, 1, 1), std::exp(1.0), 1e-12);
  EXPECT_NEAR(hyp1f1(2, 1, 1), 2.0 * std::exp(1.0), 1e-10);
  for (double x : {0.0, 0.3, 2.0, 7.5}) EXPECT_NEAR(hyp1f1(2, 1, x), (1 + x) * std::exp(x), 1e-12 * (1 + x) * std::exp(x));
}

TEST(Hyp1f1, MatchesBoostOverParameterGrid) {
  for (double a : {0.5, 1.0, 3.3, 19.4, 60.0})
    for (double b : {0.5, 1.0, 2.5})
      for (double x : {0.0, 0.01, 0.5, 3.0, 12.0, 40.0}) {
        const double want = boost::math::hypergeometric_1F1(a, b, x);
        EXPECT_NEAR(hyp1f1(a, b, x), want, 1e-11 * std::abs(want)) << a << " " << b << " " << x;
      }
}

TEST(Hyp1f1, DomainErrorsAndNonConvergence) {
  EXPECT_EQ(test::thrown_kind([] { hyp1f1(1, 0, 1); }), ErrorKind::usage);
  EXPECT_EQ(test::thrown_kind([] { hyp1f1(1, -2, 1); }), ErrorKind::usage);
  EXPECT_EQ(test::thrown_kind([] { hyp1f1(1, 1, -1); }), ErrorKind::usage);
  try {
    hyp1f1(1.0, 1.0, 800.0);
    FAIL();
  } catch (const SeriesError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numeric);
  }
}

TEST(SrPdf, ExponentialLimitWithoutLineOfSight) {
  SrParams p;
  p.omega = 0.0;
  EXPECT_NEAR(sr_pdf(0.0, p), 1.0 / (2 * p.b0), 1e-12);
  for (double r : {0.1, 0.5, 2.0}) EXPECT_NEAR(sr_pdf(r, p), std::exp(-r / (2 * p.b0)) / (2 * p.b0), 1e-12);
}

TEST(SrPdf, MatchesBoostClosedForm) {
  const SrParams p;
  for (double r : {0.0, 0.05, 0.4, 1.0, 1.606, 3.0, 6.0}) {
    const double two_b0 = 2 * p.b0;
    const double want = std::pow(two_b0 * p.m / (two_b0 * p.m + p.omega), p.m) / two_b0 * std::exp(-r / two_b0) *
                        boost::math::hypergeometric_1F1(p.m, 1.0, p.omega * r / (two_b0 * (two_b0 * p.m + p.omega)));
    EXPECT_NEAR(sr_pdf(r, p), want, 1e-10 * want) << r;
    EXPECT_GE(sr_pdf(r, p), 0.0);
  }
}

TEST(SrPdf, IntegratesToOneWithMeanPower) {
  const SrParams p;
  EXPECT_NEAR(sr_integral(p, [](double) { return 1.0; }), 1.0, 1e-6);
  EXPECT_NEAR(sr_integral(p, [](double r) { return r; }), 1.606, 1e-4);
  for (SrParams q : {SrParams{0.5, 2.0, 0.3}, SrParams{0.063, 0.739, 8.97e-4}, SrParams{0.126, 10.1, 0.835}}) {
    EXPECT_NEAR(sr_integral(q, [](double) { return 1.0; }), 1.0, 1e-6);
    EXPECT_NEAR(sr_integral(q, [](double r) { return r; }), q.mean_power(), 1e-5);
  }
}

TEST(SrCdf, AgreesWithQuadrature) {
  const SrParams p;
  const SrCdf cdf(p);
  EXPECT_NEAR(cdf.total(), 1.0, 1e-8);
  double acc = 0.0, prev = 0.0;
  for (double r : {0.2, 0.6, 1.0, 1.6, 2.5, 4.0}) {
    acc += quad([&](double x) { return sr_pdf(x, p); }, prev, r);
    prev = r;
    EXPECT_NEAR(cdf(r), acc, 1e-6) << r;
  }
  EXPECT_EQ(cdf(-1.0), 0.0);
}

TEST(SrSample, MeanAndKolmogorovSmirnov) {
  const SrParams p;
  const auto xs = sr_sample(100000, p, 2024);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  EXPECT_NEAR(mean, 1.606, 0.02);
  const SrCdf cdf(p);
  EXPECT_LT(ks_statistic(xs, cdf), ks_critical_001(xs.size()));
}

TEST(SrSample, KsAgainstIndependentQuadratureCdf) {
  const SrParams p;
  const auto xs = sr_sample(5000, p, 77);
  EXPECT_LT(ks_against_pdf(xs, [&](double r) { return sr_pdf(r, p); }), ks_critical_001(xs.size()));
}

TEST(SrSample, LargeShadowingParameterApproachesRician) {
  const SrParams p{0.158, 1e6, 1.29};
  const auto xs = sr_sample(5000, p, 5);
  const double s2 = p.omega, sig2 = p.b0;
  auto rician = [&](double r) {
    return std::exp(-(r + s2) / (2 * sig2)) * boost::math::cyl_bessel_i(0, std::sqrt(s2 * r) / sig2) / (2 * sig2);
  };
  EXPECT_LT(ks_against_pdf(xs, rician), ks_critical_001(xs.size()));
}

TEST(SrSample, DegenerateLimitConcentratesAtLineOfSight) {
  const SrParams p{1e-9, 1e7, 1.29};
  const auto xs = sr_sample(2000, p, 9);
  for (double x : xs) ASSERT_NEAR(x, 1.29, 2e-3);
}

TEST(SrSample, DeterministicAndMirrored) {
  const SrParams p;
  EXPECT_EQ(sr_sample(100, p, 3), sr_sample(100, p, 3));
  EXPECT_NE(sr_sample(100, p, 3), sr_sample(100, p, 4));
  const auto xs = sr_sample(200, p, 3);
  Mirror m(3);
  for (double x : xs) {
    const double g = m.gamma(p.m, p.omega / p.m);
    const double re = std::sqrt(g) + std::sqrt(p.b0) * m.normal();
    const double im = std::sqrt(p.b0) * m.normal();
    ASSERT_EQ(x, re * re + im * im);
  }
  EXPECT_EQ(test::thrown_kind([&] { sr_sample(0, p, 1); }), ErrorKind::usage);
  EXPECT_EQ(test::thrown_kind([&] { sr_sample(1, SrParams{0.0, 1.0, 1.0}, 1); }), ErrorKind::config);
}

TEST(Channel, NoiseVarianceConvention) {
  EXPECT_EQ(noise_variance(0.0), 1.0);
  EXPECT_NEAR(noise_variance(10.0), 0.1, 1e-15);
  EXPECT_NEAR(noise_variance(-10.0), 10.0, 1e-12);
}

TEST(Channel, HighSnrAwgnIsNearlyTransparentAndIdealIsExact) {
  Rng r(1);
  const nn::Tensor y{0.5, -1.0, 1.5};
  const auto hi = draw_realization(ChannelMode::awgn_only, 300.0, {}, r);
  const auto out = apply_channel(y, hi);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(out[i], y[i], 1e-12);
  const auto ideal = draw_realization(ChannelMode::ideal, -20.0, {}, r);
  EXPECT_EQ(apply_channel(y, ideal), y);
  EXPECT_EQ(ideal.gain, 1.0);
}

TEST(Channel, OutputReproducedByIndependentMirror) {
  Rng r(12);
  const SrParams p;
  nn::Tensor y(16);
  for (auto& v : y) v = r.normal();
  for (int t = 0; t < 20; ++t) {
    const auto real = draw_realization(ChannelMode::sr_fading, 3.0, p, r);
    const auto out = apply_channel(y, real);
    Mirror m(real.noise_seed);
    const double sd = std::sqrt(noise_variance(3.0));
    for (std::size_t i = 0; i < y.size(); ++i) ASSERT_EQ(out[i], std::sqrt(real.gain) * y[i] + sd * m.normal());
  }
}

TEST(Channel, RealizationDrawsGainThenNoiseSeed) {
  const SrParams p;
  Rng a(4), b(4);
  const auto real = draw_realization(ChannelMode::sr_fading, 0.0, p, a);
  EXPECT_EQ(real.gain, sr_draw(p, b));
  EXPECT_EQ(real.noise_seed, b.next_u64());
  EXPECT_NEAR(real.post_fading_snr_db(), 10.0 * std::log10(real.gain), 1e-12);
}

TEST(Channel, EmpiricalAwgnSnrMatchesConfigured) {
  Rng r(6);
  for (double snr : {-10.0, 0.0, 10.0}) {
    double signal = 0.0, noise = 0.0;
    for (int f = 0; f < 1000; ++f) {
      nn::Tensor y(32);
      for (auto& v : y) v = r.normal();
      double p = 0.0;
      for (double v : y) p += v * v;
      const double scale = std::sqrt(p / 32.0);
      for (auto& v : y) v /= scale;
      const auto out = apply_channel(y, draw_realization(ChannelMode::awgn_only, snr, {}, r));
      for (std::size_t i = 0; i < 32; ++i) {
        signal += y[i] * y[i];
        noise += (out[i] - y[i]) * (out[i] - y[i]);
      }
    }
    EXPECT_NEAR(10.0 * std::log10(signal / noise), snr, 0.2);
  }
}

TEST(Channel, GenieEqualizationUndoesGain) {
  ChannelRealization real;
  real.mode = ChannelMode::sr_fading;
  real.gain = 2.25;
  real.noise_var = 0.0;
  const nn::Tensor y{1.0, -2.0};
  const auto eq = equalize(apply_channel(y, real), real);
  EXPECT_DOUBLE_EQ(eq[0], 1.0);
  EXPECT_DOUBLE_EQ(eq[1], -2.0);
}

TEST(Channel, ModeParsing) {
  EXPECT_EQ(parse_channel_mode("sr_fading"), ChannelMode::sr_fading);
  EXPECT_EQ(parse_channel_mode("ideal"), ChannelMode::ideal);
  EXPECT_EQ(test::thrown_kind([] { parse_channel_mode("rayleigh"); }), ErrorKind::config);
  EXPECT_EQ(test::thrown_kind([] { apply_channel(nn::Tensor{}, {}); }), ErrorKind::usage);
}
