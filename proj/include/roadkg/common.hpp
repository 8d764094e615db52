#pragma once

#include <cctype>
#include <cstdint>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace roadkg {

// All recoverable failures surface as roadkg::Error; parse errors carry
// file/line context in the message.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

// Single RNG type used everywhere a seed appears in a contract.
using Rng = std::mt19937_64;

// Deterministic sampling helpers. The standard distributions and
// std::shuffle are implementation-defined, which would make seeded runs
// differ across standard libraries; these spell out the algorithm so
// checkpoints and golden files are portable.

// Uniform over [0, n). Modulo bias is ~n / 2^64, far below anything
// observable here.
inline uint64_t uniform_index(Rng& rng, uint64_t n) { return rng() % n; }

// Uniform over [0, 1) with 53 random mantissa bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

template <typename T>
void shuffle_deterministic(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

inline double parse_double(const std::string& cell, const std::string& context) {
  try {
    size_t pos = 0;
    double v = std::stod(cell, &pos);
    if (pos != cell.size()) fail(context + ": trailing characters in number '" + cell + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(context + ": not a number '" + cell + "'");
  } catch (const std::out_of_range&) {
    fail(context + ": number out of range '" + cell + "'");
  }
}

inline long parse_long(const std::string& cell, const std::string& context) {
  try {
    size_t pos = 0;
    long v = std::stol(cell, &pos);
    if (pos != cell.size()) fail(context + ": trailing characters in integer '" + cell + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(context + ": not an integer '" + cell + "'");
  } catch (const std::out_of_range&) {
    fail(context + ": integer out of range '" + cell + "'");
  }
}

// Little-endian binary I/O helpers for the checkpoint format.
namespace detail {

inline void write_le_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_le_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_le_f64(std::string& out, double d) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(d));
  std::memcpy(&bits, &d, sizeof(bits));
  write_le_u64(out, bits);
}

class ByteReader {
 public:
  ByteReader(const std::string& data, std::string name)
      : data_(data), name_(std::move(name)) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(byte()) << (8 * i);
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(byte()) << (8 * i);
    return v;
  }

  double f64() {
    uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
  }

  std::string bytes(size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool exhausted() const { return pos_ == data_.size(); }

 private:
  uint8_t byte() { return static_cast<uint8_t>(data_[pos_++]); }
  void need(size_t n) {
    if (pos_ + n > data_.size()) fail(name_ + ": truncated file");
  }
  const std::string& data_;
  std::string name_;
  size_t pos_ = 0;
};

}  // namespace detail
}  // namespace roadkg
