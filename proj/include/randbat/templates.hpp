#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "randbat/bitseq.hpp"

namespace randbat {

/// True when the length-m pattern stored in the low m bits of v (MSB-first:
/// bit m-1-j of v is pattern position j) cannot overlap a shifted copy of
/// itself. These are the templates used by the non-overlapping matching test.
inline bool is_aperiodic_template(std::uint32_t v, int m) {
  auto bit = [&](int j) { return (v >> (m - 1 - j)) & 1u; };
  for (int s = 1; s < m; ++s) {
    bool overlap = true;
    for (int j = 0; j + s < m; ++j) {
      if (bit(j) != bit(j + s)) {
        overlap = false;
        break;
      }
    }
    if (overlap) return false;
  }
  return true;
}

/// All aperiodic templates of length m, ascending pattern value.
inline std::vector<std::uint32_t> aperiodic_templates(int m) {
  if (m < 2 || m > 16) throw Error("aperiodic_templates: m out of range");
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < (1u << m); ++v)
    if (is_aperiodic_template(v, m)) out.push_back(v);
  return out;
}

/// Parses the shipped template data file (one ascii01 pattern per line).
inline std::vector<std::uint32_t> load_templates(const std::filesystem::path& path, int m) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open template file: " + path.string());
  std::vector<std::uint32_t> out;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (static_cast<int>(line.size()) != m)
      throw Error(path.string() + ":" + std::to_string(ln) + ": template length mismatch");
    std::uint32_t v = 0;
    for (char c : line) {
      if (c != '0' && c != '1')
        throw Error(path.string() + ":" + std::to_string(ln) + ": malformed symbol");
      v = (v << 1) | static_cast<std::uint32_t>(c - '0');
    }
    out.push_back(v);
  }
  return out;
}

inline void save_templates(const std::filesystem::path& path,
                           const std::vector<std::uint32_t>& templates, int m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  for (std::uint32_t v : templates) {
    std::string line(static_cast<std::size_t>(m), '0');
    for (int j = 0; j < m; ++j)
      if ((v >> (m - 1 - j)) & 1u) line[static_cast<std::size_t>(j)] = '1';
    out << line << '\n';
  }
}

}  // namespace randbat
