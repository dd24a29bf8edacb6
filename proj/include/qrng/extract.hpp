// Copyright 2026 The qrng-bs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Classical post-processing of generator output: n-ary to binary
// downgrading, XOR combination, von Neumann debiasing and bit packing.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qrng {

/// Symbols over the alphabet [0, n).
class SymbolStream {
 public:
  SymbolStream(std::size_t alphabet_size, std::vector<std::uint32_t> symbols)
      : n_(alphabet_size), symbols_(std::move(symbols)) {
    if (n_ < 2) throw std::invalid_argument("alphabet size must be >= 2");
    for (std::uint32_t s : symbols_)
      if (s >= n_) throw std::invalid_argument("symbol " + std::to_string(s) + " outside alphabet of size " + std::to_string(n_));
  }

  std::size_t alphabet_size() const { return n_; }
  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  std::span<const std::uint32_t> symbols() const { return symbols_; }
  std::uint32_t operator[](std::size_t i) const { return symbols_[i]; }

 private:
  std::size_t n_;
  std::vector<std::uint32_t> symbols_;
};

/// Sequence of bits, one per byte, each 0 or 1.
class BitStream {
 public:
  BitStream() = default;
  explicit BitStream(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (std::uint8_t b : bits_)
      if (b > 1) throw std::invalid_argument("bit stream values must be 0 or 1");
  }

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::size_t count_ones() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1})); }

  SymbolStream as_symbols() const { return SymbolStream(2, std::vector<std::uint32_t>(bits_.begin(), bits_.end())); }

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Two equal-size disjoint classes covering the alphabet; class_zero maps to
/// 0 and class_one to 1.
struct Equipartition {
  std::vector<std::uint32_t> class_zero;
  std::vector<std::uint32_t> class_one;

  /// Parses "0,1|2,3".
  static Equipartition parse(const std::string& text) {
    const auto bar = text.find('|');
    if (bar == std::string::npos) throw std::invalid_argument("partition must look like '0,1|2,3'");
    auto parse_list = [](const std::string& part) {
      std::vector<std::uint32_t> out;
      std::size_t pos = 0;
      while (pos <= part.size()) {
        const auto comma = part.find(',', pos);
        const std::string item = part.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
          throw std::invalid_argument("partition entries must be non-negative integers");
        out.push_back(static_cast<std::uint32_t>(std::stoul(item)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      return out;
    };
    return {parse_list(text.substr(0, bar)), parse_list(text.substr(bar + 1))};
  }

  /// Lookup table symbol -> bit; throws unless the partition is valid for n.
  std::vector<std::uint8_t> table(std::size_t n) const {
    if (n % 2 != 0)
      throw std::invalid_argument("identify requires an even alphabet (n = " + std::to_string(n) +
                                  "); eliminate a symbol first");
    if (class_zero.size() != class_one.size() || class_zero.size() + class_one.size() != n)
      throw std::invalid_argument("partition classes must have equal size and cover the alphabet");
    std::vector<int> seen(n, -1);
    auto mark = [&](const std::vector<std::uint32_t>& cls, int bit) {
      for (std::uint32_t s : cls) {
        if (s >= n) throw std::invalid_argument("partition symbol " + std::to_string(s) + " outside alphabet");
        if (seen[s] != -1) throw std::invalid_argument("partition classes must be disjoint");
        seen[s] = bit;
      }
    };
    mark(class_zero, 0);
    mark(class_one, 1);
    return {seen.begin(), seen.end()};
  }
};

/// Reinterprets a binary-alphabet symbol stream as bits.
inline BitStream to_bits(const SymbolStream& stream) {
  if (stream.alphabet_size() != 2) throw std::invalid_argument("to_bits: alphabet must have exactly two symbols");
  return BitStream(std::vector<std::uint8_t>(stream.symbols().begin(), stream.symbols().end()));
}

/// Drops every symbol except keep.first (-> 0) and keep.second (-> 1).
inline BitStream eliminate(const SymbolStream& stream, std::pair<std::uint32_t, std::uint32_t> keep) {
  if (keep.first == keep.second) throw std::invalid_argument("eliminate: kept symbols must be distinct");
  if (keep.first >= stream.alphabet_size() || keep.second >= stream.alphabet_size())
    throw std::invalid_argument("eliminate: kept symbol outside alphabet");
  std::vector<std::uint8_t> out;
  out.reserve(stream.size());
  for (std::uint32_t s : stream.symbols()) {
    if (s == keep.first)
      out.push_back(0);
    else if (s == keep.second)
      out.push_back(1);
  }
  return BitStream(std::move(out));
}

inline BitStream identify(const SymbolStream& stream, const Equipartition& part) {
  const auto table = part.table(stream.alphabet_size());
  std::vector<std::uint8_t> out;
  out.reserve(stream.size());
  for (std::uint32_t s : stream.symbols()) out.push_back(table[s]);
  return BitStream(std::move(out));
}

/// s_j = a_j XOR b_j.
inline BitStream xor_combine(const BitStream& a, const BitStream& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("xor_combine: length mismatch (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] ^ b[i];
  return BitStream(std::move(out));
}

/// Non-overlapping pairs at absolute positions (0,1), (2,3), ...:
/// 01 -> 0, 10 -> 1, 00 and 11 dropped, trailing odd bit dropped.
inline BitStream von_neumann_debias(const BitStream& in) {
  std::vector<std::uint8_t> out;
  out.reserve(in.size() / 4);
  for (std::size_t i = 0; i + 1 < in.size(); i += 2)
    if (in[i] != in[i + 1]) out.push_back(in[i]);
  return BitStream(std::move(out));
}

/// MSB-first, final byte zero-padded.
inline std::vector<std::uint8_t> pack_bits(const BitStream& bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  return out;
}

inline BitStream unpack_bits(std::span<const std::uint8_t> bytes, std::size_t bit_length) {
  if (bit_length > 8 * bytes.size() || (bit_length + 7) / 8 != bytes.size())
    throw std::invalid_argument("bit length " + std::to_string(bit_length) + " inconsistent with " +
                                std::to_string(bytes.size()) + " bytes");
  std::vector<std::uint8_t> out(bit_length);
  for (std::size_t i = 0; i < bit_length; ++i) out[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
  return BitStream(std::move(out));
}

}  // namespace qrng
