#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kolmo/field.hpp"

namespace kolmo {

// FLD1 binary layout, little-endian throughout:
//   char[4] "FLD1", u32 version, u32 d, u32 components, u32 n, f64 time, f64 nu,
//   then components * n^d f64 values, component-major, row-major within.
struct FieldFileHeader {
  static constexpr char kMagic[4] = {'F', 'L', 'D', '1'};
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::size_t kBytes = 36;

  std::uint32_t version = kVersion;
  std::uint32_t dim = 0;
  std::uint32_t components = 0;
  std::uint32_t n = 0;
  double time = 0.0;
  double nu = 0.0;

  std::size_t payload_bytes() const;
};

struct FieldFile {
  FieldFileHeader header;
  Field field;
};

std::vector<unsigned char> encode_field(const Field& f, double nu);
FieldFile decode_field(const std::vector<unsigned char>& bytes);

// Throws IoError (with the path) on filesystem failures and FormatError on bad content.
void write_field(const std::filesystem::path& path, const Field& f, double nu);
FieldFile read_field(const std::filesystem::path& path);
FieldFileHeader read_field_header(const std::filesystem::path& path);

}  // namespace kolmo
