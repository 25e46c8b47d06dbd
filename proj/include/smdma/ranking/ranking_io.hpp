#pragma once

#include <cinttypes>
#include <cstdio>
#include <sstream>
#include <string>

#include "smdma/core/bytes.hpp"
#include "smdma/ranking/ranking.hpp"

namespace smdma::ranking {

/// Text form of a calibrated permutation:
///   d=<int>
///   <space-separated permutation>
///   epsilon=<float>
///   crc32=<8 hex digits over the three lines above, newlines included>
inline std::string format_ranking(std::span<const std::uint32_t> perm, double epsilon) {
  std::string body = "d=" + std::to_string(perm.size()) + "\n";
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (i) body += ' ';
    body += std::to_string(perm[i]);
  }
  char eps[64];
  std::snprintf(eps, sizeof eps, "%.17g", epsilon);
  body += "\nepsilon=" + std::string(eps) + "\n";
  char crc[32];
  std::snprintf(crc, sizeof crc, "crc32=%08" PRIx32 "\n", crc32(body));
  return body + crc;
}

struct StoredRanking {
  Permutation perm;
  double epsilon = 0.0;
};

inline StoredRanking parse_ranking(const std::string& text) {
  std::size_t offset = 0;
  auto next_line = [&](const char* what) {
    const auto nl = text.find('\n', offset);
    if (nl == std::string::npos) throw ParseError(offset, std::string("ranking file: missing ") + what + " line");
    std::string line = text.substr(offset, nl - offset);
    offset = nl + 1;
    return line;
  };
  const std::string l1 = next_line("dimension");
  const std::string l2 = next_line("permutation");
  const std::string l3 = next_line("epsilon");
  const std::size_t crc_at = offset;
  const std::string l4 = next_line("checksum");

  if (l1.rfind("d=", 0) != 0) throw ParseError(0, "ranking file: expected d=<int>");
  std::size_t d = 0;
  try {
    std::size_t used = 0;
    d = std::stoul(l1.substr(2), &used);
    if (used != l1.size() - 2) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ParseError(2, "ranking file: bad dimension");
  }
  StoredRanking out;
  std::istringstream ps(l2);
  std::uint64_t v = 0;
  while (ps >> v) {
    if (v > UINT32_MAX) throw ParseError(l1.size() + 1, "ranking file: index out of range");
    out.perm.push_back(static_cast<std::uint32_t>(v));
  }
  if (!ps.eof()) throw ParseError(l1.size() + 1, "ranking file: malformed permutation");
  if (!is_permutation(out.perm, d)) throw ParseError(l1.size() + 1, "ranking file: not a permutation of " + std::to_string(d));
  if (l3.rfind("epsilon=", 0) != 0) throw ParseError(l1.size() + l2.size() + 2, "ranking file: expected epsilon=<float>");
  try {
    out.epsilon = std::stod(l3.substr(8));
  } catch (const std::exception&) {
    throw ParseError(l1.size() + l2.size() + 10, "ranking file: bad epsilon");
  }
  char expect[32];
  std::snprintf(expect, sizeof expect, "crc32=%08" PRIx32, crc32(std::string_view(text).substr(0, crc_at)));
  if (l4 != expect) throw ParseError(crc_at, "ranking file: checksum mismatch");
  return out;
}

inline void save_ranking(const std::string& path, std::span<const std::uint32_t> perm, double epsilon) {
  write_file(path, format_ranking(perm, epsilon));
}

inline StoredRanking load_ranking(const std::string& path) { return parse_ranking(read_text(path)); }

}  // namespace smdma::ranking
