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

// Bitstream payload files and their JSON sidecars.
//
// Payload: packed bits, MSB-first, final byte zero-padded. Format "raw"
// stores the bytes as-is, format "hex" stores them as lowercase hex text
// followed by a newline.
//
// Sidecar (<payload>.json):
//   {
//     "version":   tool version string,
//     "bitLength": number of valid bits,
//     "digest":    "sha256:" + hex SHA-256 of the packed bytes,
//     "format":    "raw" | "hex",
//     "config":    resolved run configuration (object)
//   }

#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrng/digest.hpp"
#include "qrng/extract.hpp"

namespace qrng::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Exit status 1.
struct ValidationError : std::runtime_error {
  ValidationError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field(std::move(field)) {}
  std::string field;
};

/// Exit status 2: unreadable or unwritable files.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exit status 2: sidecar missing or malformed.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exit status 2: payload does not match its sidecar.
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PayloadFormat { kRaw, kHex };

inline PayloadFormat parse_payload_format(const std::string& s) {
  if (s == "raw") return PayloadFormat::kRaw;
  if (s == "hex") return PayloadFormat::kHex;
  throw ValidationError("format", "must be 'raw' or 'hex' (got '" + s + "')");
}

inline std::string to_string(PayloadFormat f) { return f == PayloadFormat::kHex ? "hex" : "raw"; }

inline std::filesystem::path sidecar_path(const std::filesystem::path& payload) {
  auto p = payload;
  p += ".json";
  return p;
}

inline std::string stream_digest(std::span<const std::uint8_t> packed) { return "sha256:" + sha256_hex(packed); }

inline std::string encode_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * bytes.size() + 1);
  for (std::uint8_t b : bytes) {
    out.push_back(hex[b >> 4]);
    out.push_back(hex[b & 0xF]);
  }
  out.push_back('\n');
  return out;
}

inline std::vector<std::uint8_t> decode_hex(const std::string& text) {
  std::string digits;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) digits.push_back(c);
  if (digits.size() % 2 != 0) throw FormatError("hex payload has an odd number of digits");
  auto value = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw FormatError(std::string("invalid hex digit '") + c + "'");
  };
  std::vector<std::uint8_t> out(digits.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(value(digits[2 * i]) << 4 | value(digits[2 * i + 1]));
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

struct StoredStream {
  BitStream bits;
  std::string digest;
  nlohmann::json sidecar;
};

/// Writes payload and sidecar; returns the sidecar document.
inline nlohmann::json write_bitstream(const std::filesystem::path& path, const BitStream& bits, PayloadFormat format,
                                      const nlohmann::json& config) {
  const auto packed = pack_bits(bits);
  const std::string payload =
      format == PayloadFormat::kHex ? encode_hex(packed) : std::string(packed.begin(), packed.end());
  nlohmann::json sidecar = {{"version", kVersion},
                            {"bitLength", bits.size()},
                            {"digest", stream_digest(packed)},
                            {"format", to_string(format)},
                            {"config", config}};
  write_file(path, payload);
  write_file(sidecar_path(path), sidecar.dump(2) + "\n");
  return sidecar;
}

inline std::vector<std::uint8_t> read_payload(const std::filesystem::path& path, PayloadFormat format) {
  const std::string data = read_file(path);
  if (format == PayloadFormat::kHex) return decode_hex(data);
  return {data.begin(), data.end()};
}

/// Reads a payload through its sidecar and verifies length and digest.
inline StoredStream read_bitstream(const std::filesystem::path& path) {
  const auto meta_path = sidecar_path(path);
  if (!std::filesystem::exists(meta_path)) throw FormatError("missing sidecar '" + meta_path.string() + "'");
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(read_file(meta_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("sidecar is not valid JSON: " + std::string(e.what()));
  }
  for (const char* key : {"bitLength", "digest", "format"})
    if (!sidecar.contains(key)) throw FormatError(std::string("sidecar lacks field '") + key + "'");
  if (!sidecar["bitLength"].is_number_unsigned() || !sidecar["digest"].is_string() || !sidecar["format"].is_string())
    throw FormatError("sidecar fields have the wrong type");

  PayloadFormat format;
  try {
    format = parse_payload_format(sidecar["format"].get<std::string>());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("sidecar ") + e.what());
  }
  const auto bytes = read_payload(path, format);
  const auto bit_length = sidecar["bitLength"].get<std::uint64_t>();
  if ((bit_length + 7) / 8 != bytes.size())
    throw IntegrityError("payload has " + std::to_string(bytes.size()) + " bytes but sidecar records " +
                         std::to_string(bit_length) + " bits");
  const std::string digest = stream_digest(bytes);
  if (digest != sidecar["digest"].get<std::string>())
    throw IntegrityError("digest mismatch: payload " + digest + ", sidecar " + sidecar["digest"].get<std::string>());
  return {unpack_bits(bytes, bit_length), digest, std::move(sidecar)};
}

}  // namespace qrng::cli
