#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace randbat {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An ordered sequence of binary symbols. Stored one byte per bit for fast
/// random access by the test kernels; treated as immutable once built.
class BitSequence {
public:
  BitSequence() = default;
  explicit BitSequence(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (std::uint8_t b : bits_)
      if (b > 1) throw Error("BitSequence: symbol out of {0,1}");
  }

  static BitSequence from_string(std::string_view s) {
    BitSequence seq;
    seq.bits_.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      char c = s[i];
      if (c != '0' && c != '1')
        throw Error("malformed symbol at position " + std::to_string(i));
      seq.bits_.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return seq;
  }

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  const std::uint8_t* data() const { return bits_.data(); }

  void reserve(std::size_t n) { bits_.reserve(n); }
  void push_back(std::uint8_t bit) {
    if (bit > 1) throw Error("BitSequence: symbol out of {0,1}");
    bits_.push_back(bit);
  }
  void append(const BitSequence& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
  }

  std::string to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i) s[i] += bits_[i];
    return s;
  }

  std::size_t count_ones() const {
    return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
  }

  auto begin() const { return bits_.begin(); }
  auto end() const { return bits_.end(); }
  bool operator==(const BitSequence&) const = default;

private:
  std::vector<std::uint8_t> bits_;
};

/// Concatenation of `trials` in list order (chronological).
inline BitSequence combine(const std::vector<BitSequence>& trials) {
  std::size_t total = 0;
  for (const auto& t : trials) total += t.size();
  BitSequence out;
  out.reserve(total);
  for (const auto& t : trials) out.append(t);
  return out;
}

/// A set of trials from one source together with the chronologically
/// combined sequence.
struct TrialSet {
  std::vector<BitSequence> trials;
  BitSequence combined;
  std::string source_label;
  std::string qrng_label;
};

inline TrialSet make_trial_set(std::vector<BitSequence> trials,
                               std::string source_label = {},
                               std::string qrng_label = {}) {
  TrialSet ts;
  ts.combined = combine(trials);
  ts.trials = std::move(trials);
  ts.source_label = std::move(source_label);
  ts.qrng_label = std::move(qrng_label);
  return ts;
}

struct PartitionResult {
  std::vector<BitSequence> blocks;
  std::size_t remainder_bits = 0;  // trailing bits discarded
};

/// Splits `seq` into floor(n / block_len) blocks of exactly block_len bits.
inline PartitionResult partition(const BitSequence& seq, std::size_t block_len) {
  if (block_len == 0) throw Error("partition: block_len must be >= 1");
  PartitionResult res;
  std::size_t nblocks = seq.size() / block_len;
  res.blocks.reserve(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) {
    std::vector<std::uint8_t> bits(seq.data() + b * block_len,
                                   seq.data() + (b + 1) * block_len);
    res.blocks.emplace_back(std::move(bits));
  }
  res.remainder_bits = seq.size() - nblocks * block_len;
  return res;
}

enum class BitFileFormat { Ascii01, PackedLsbFirst, Hex };

inline BitFileFormat bit_file_format_from_string(std::string_view s) {
  if (s == "ascii01") return BitFileFormat::Ascii01;
  if (s == "packed" || s == "packed-lsb-first") return BitFileFormat::PackedLsbFirst;
  if (s == "hex") return BitFileFormat::Hex;
  throw Error("unknown bit file format: " + std::string(s));
}

inline std::string to_string(BitFileFormat f) {
  switch (f) {
    case BitFileFormat::Ascii01: return "ascii01";
    case BitFileFormat::PackedLsbFirst: return "packed-lsb-first";
    case BitFileFormat::Hex: return "hex";
  }
  return "?";
}

namespace detail {

inline int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

/// Loads one BitSequence per record; `combined` is built by concatenation.
inline TrialSet load_trials(const std::filesystem::path& path, BitFileFormat format) {
  std::vector<BitSequence> trials;
  switch (format) {
    case BitFileFormat::Ascii01: {
      auto lines = detail::read_lines(path);
      for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        if (line.empty()) {
          if (ln + 1 == lines.size()) continue;  // trailing newline
          throw Error(path.string() + ":" + std::to_string(ln + 1) + ": empty record");
        }
        try {
          trials.push_back(BitSequence::from_string(line));
        } catch (const Error& e) {
          throw Error(path.string() + ":" + std::to_string(ln + 1) + ": " + e.what());
        }
      }
      break;
    }
    case BitFileFormat::Hex: {
      auto lines = detail::read_lines(path);
      for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        if (line.empty()) {
          if (ln + 1 == lines.size()) continue;
          throw Error(path.string() + ":" + std::to_string(ln + 1) + ": empty record");
        }
        BitSequence seq;
        seq.reserve(line.size() * 4);
        for (std::size_t i = 0; i < line.size(); ++i) {
          int v = detail::hex_value(line[i]);
          if (v < 0)
            throw Error(path.string() + ":" + std::to_string(ln + 1) +
                        ": malformed hex digit at position " + std::to_string(i));
          for (int b = 3; b >= 0; --b) seq.push_back(static_cast<std::uint8_t>((v >> b) & 1));
        }
        trials.push_back(std::move(seq));
      }
      break;
    }
    case BitFileFormat::PackedLsbFirst: {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw Error("cannot open file: " + path.string());
      while (true) {
        unsigned char hdr[8];
        in.read(reinterpret_cast<char*>(hdr), 8);
        if (in.gcount() == 0) break;
        if (in.gcount() != 8) throw Error(path.string() + ": truncated record header");
        std::uint64_t nbits = 0;
        for (int i = 7; i >= 0; --i) nbits = (nbits << 8) | hdr[i];
        std::size_t nbytes = static_cast<std::size_t>((nbits + 7) / 8);
        std::vector<unsigned char> buf(nbytes);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(nbytes));
        if (static_cast<std::size_t>(in.gcount()) != nbytes)
          throw Error(path.string() + ": truncated packed record");
        BitSequence seq;
        seq.reserve(nbits);
        for (std::uint64_t j = 0; j < nbits; ++j)
          seq.push_back(static_cast<std::uint8_t>((buf[j / 8] >> (j % 8)) & 1));
        trials.push_back(std::move(seq));
      }
      break;
    }
  }
  if (trials.empty()) throw Error(path.string() + ": empty file");
  TrialSet ts = make_trial_set(std::move(trials));
  ts.source_label = path.stem().string();
  return ts;
}

inline void save_trials(const std::filesystem::path& path,
                        const std::vector<BitSequence>& trials, BitFileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  switch (format) {
    case BitFileFormat::Ascii01:
      for (const auto& t : trials) out << t.to_string() << '\n';
      break;
    case BitFileFormat::Hex:
      for (const auto& t : trials) {
        if (t.size() % 4 != 0)
          throw Error("hex format requires trial length divisible by 4");
        std::string line(t.size() / 4, '0');
        for (std::size_t i = 0; i < line.size(); ++i) {
          int v = (t[4 * i] << 3) | (t[4 * i + 1] << 2) | (t[4 * i + 2] << 1) | t[4 * i + 3];
          line[i] = "0123456789ABCDEF"[v];
        }
        out << line << '\n';
      }
      break;
    case BitFileFormat::PackedLsbFirst:
      for (const auto& t : trials) {
        std::uint64_t nbits = t.size();
        unsigned char hdr[8];
        for (int i = 0; i < 8; ++i) hdr[i] = static_cast<unsigned char>((nbits >> (8 * i)) & 0xFF);
        out.write(reinterpret_cast<const char*>(hdr), 8);
        std::vector<unsigned char> buf((t.size() + 7) / 8, 0);
        for (std::size_t j = 0; j < t.size(); ++j)
          if (t[j]) buf[j / 8] |= static_cast<unsigned char>(1u << (j % 8));
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
      }
      break;
  }
  if (!out) throw Error("write failed: " + path.string());
}

inline void save_trials(const std::filesystem::path& path, const TrialSet& ts,
                        BitFileFormat format) {
  save_trials(path, ts.trials, format);
}

}  // namespace randbat
