#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "smdma/channel/channel.hpp"
#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"
#include "smdma/media/metrics.hpp"
#include "smdma/pipeline/config.hpp"
#include "smdma/pipeline/system.hpp"

namespace smdma::pipeline {

enum class Sorting { sensitivity, random };

inline const char* to_string(Sorting s) { return s == Sorting::sensitivity ? "sensitivity" : "random"; }

struct SweepGrid {
  std::vector<double> snrs{0.0};
  std::vector<double> ratios{1.0};
  std::vector<Sorting> sortings{Sorting::sensitivity};
  std::vector<bool> normalizations{true};
  std::size_t seeds = 1;
  std::uint64_t base_seed = 1;

  std::size_t points() const noexcept { return snrs.size() * ratios.size() * sortings.size() * normalizations.size() * seeds; }
};

struct SweepRecord {
  double snr_db = 0.0;
  double ratio = 1.0;
  std::size_t seed = 0;
  std::size_t user = 1;
  Sorting sorting = Sorting::sensitivity;
  bool normalization = true;
  double mse = 0.0;  // mean over pairs, 0-255 scale
  double psnr_db = 0.0;
  double ssim = 0.0;
};

using ImagePairs = std::vector<std::pair<media::Image, media::Image>>;

/// One grid point: every evaluation pair is sent once and received by both users.
/// Channel draws and random orderings depend only on (base_seed, seed), so points
/// that differ in one swept value see the same fading, noise and permutations.
inline std::array<SweepRecord, 2> evaluate_point(const ImagePairs& pairs, PipelineConfig cfg, const SystemModels& base_models, double snr,
                                                 double ratio, Sorting sorting, bool normalization, std::size_t seed,
                                                 std::uint64_t base_seed) {
  require(!pairs.empty(), ErrorKind::data, "sweep needs at least one evaluation pair");
  cfg.ratio = ratio;
  cfg.normalize = normalization;
  const SystemModels* models = &base_models;
  SystemModels shuffled;
  if (sorting == Sorting::random) {
    shuffled = base_models;
    Rng perm_rng(derive_seed(base_seed, {seed, 0x7065726dULL}));
    const std::size_t d = base_models.semantic.config.feature_dim;
    auto shared = ranking::random_permutation(d, perm_rng);
    auto delta = ranking::random_permutation(d, perm_rng);
    shuffled.calibrated = StreamRanking{std::move(shared), std::move(delta)};
    cfg.ranking_mode = ranking::RankingMode::calibrated;
    models = &shuffled;
  }

  std::array<SweepRecord, 2> out;
  std::array<double, 2> mse{}, ssim{};
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [s1, s2] = pairs[p];
    const auto tx = transmit(s1, s2, cfg, *models);
    for (std::size_t u = 1; u <= 2; ++u) {
      Rng link_rng(derive_seed(base_seed, {seed, p, u}));
      const auto real = channel::draw_realization(cfg.channel_mode, snr, cfg.sr, link_rng);
      ortho::Frame rx = tx.frame;
      rx.payload = channel::apply_channel(tx.frame.payload, real);
      const auto img = receive(rx, u, cfg, *models, &real);
      const auto& ref = u == 1 ? s1 : s2;
      mse[u - 1] += media::mse_255(img, ref);
      ssim[u - 1] += media::ssim(img, ref);
    }
  }
  const double n = static_cast<double>(pairs.size());
  for (std::size_t u = 0; u < 2; ++u) {
    auto& r = out[u];
    r.snr_db = snr;
    r.ratio = ratio;
    r.seed = seed;
    r.user = u + 1;
    r.sorting = sorting;
    r.normalization = normalization;
    r.mse = mse[u] / n;
    r.psnr_db = media::psnr_from_mse(r.mse);
    r.ssim = ssim[u] / n;
  }
  return out;
}

/// Full-factorial sweep. Records come out in grid order (sorting, normalization,
/// snr, ratio, seed, user) whatever the thread count.
inline std::vector<SweepRecord> evaluate_sweep(const ImagePairs& pairs, const PipelineConfig& cfg, const SystemModels& models,
                                               const SweepGrid& grid, std::size_t threads = 1) {
  require(grid.points() > 0, ErrorKind::usage, "sweep grid is empty");
  struct Point {
    double snr, ratio;
    Sorting sorting;
    bool norm;
    std::size_t seed;
  };
  std::vector<Point> points;
  for (auto sorting : grid.sortings)
    for (bool norm : grid.normalizations)
      for (double snr : grid.snrs)
        for (double ratio : grid.ratios)
          for (std::size_t s = 0; s < grid.seeds; ++s) points.push_back({snr, ratio, sorting, norm, s});

  std::vector<std::array<SweepRecord, 2>> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
      const auto& p = points[i];
      try {
        results[i] = evaluate_point(pairs, cfg, models, p.snr, p.ratio, p.sorting, p.norm, p.seed, grid.base_seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, points.size()));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<SweepRecord> records;
  records.reserve(points.size() * 2);
  for (const auto& r : results) records.insert(records.end(), r.begin(), r.end());
  return records;
}

inline constexpr const char* sweep_csv_header = "snr_db,ratio,seed,user,sorting,normalization,mse,psnr_db,ssim";

inline std::string format_number(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

inline std::string format_sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = std::string(sweep_csv_header) + "\n";
  for (const auto& r : records) {
    out += format_number("%g", r.snr_db) + "," + format_number("%g", r.ratio) + "," + std::to_string(r.seed) + "," +
           std::to_string(r.user) + "," + to_string(r.sorting) + "," + (r.normalization ? "on" : "off") + "," +
           format_number("%.6f", r.mse) + "," + (std::isinf(r.psnr_db) ? std::string("inf") : format_number("%.4f", r.psnr_db)) + "," +
           format_number("%.6f", r.ssim) + "\n";
  }
  return out;
}

/// Parse "a:b:step" (inclusive), a single number, or a comma list of either.
inline std::vector<double> parse_range(const std::string& text) {
  auto bad = [](const std::string& tok) -> double { fail(ErrorKind::usage, "malformed range '" + tok + "'"); };
  auto num = [&](const std::string& tok, const std::string& whole) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0' || !std::isfinite(v)) return bad(whole);
    return v;
  };
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(num(item, item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos || item.find(':', c2 + 1) != std::string::npos) bad(item);
    const double a = num(item.substr(0, c1), item), b = num(item.substr(c1 + 1, c2 - c1 - 1), item), step = num(item.substr(c2 + 1), item);
    if (!(step > 0.0) || b < a) bad(item);
    const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    if (n > 100000) bad(item);
    for (std::size_t i = 0; i < n; ++i) {
      double v = a + static_cast<double>(i) * step;
      if (std::abs(v) < 1e-12 * step) v = 0.0;
      out.push_back(v);
    }
  }
  if (out.empty()) bad(text);
  return out;
}

}  // namespace smdma::pipeline
