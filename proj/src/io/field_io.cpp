#include "kolmo/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "kolmo/error.hpp"

namespace kolmo {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <class T>
T get(const unsigned char* p) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

FieldFileHeader parse_header(const unsigned char* p, std::size_t available) {
  if (available < FieldFileHeader::kBytes) throw FormatError("FLD1: truncated header");
  if (std::memcmp(p, FieldFileHeader::kMagic, 4) != 0) throw FormatError("FLD1: bad magic");
  FieldFileHeader h;
  h.version = get<std::uint32_t>(p + 4);
  h.dim = get<std::uint32_t>(p + 8);
  h.components = get<std::uint32_t>(p + 12);
  h.n = get<std::uint32_t>(p + 16);
  h.time = get<double>(p + 20);
  h.nu = get<double>(p + 28);
  if (h.version != FieldFileHeader::kVersion) {
    throw FormatError("FLD1: unsupported version " + std::to_string(h.version));
  }
  if (h.dim != 2 && h.dim != 3) throw FormatError("FLD1: dimension must be 2 or 3");
  if (h.components < 1 || h.components > 16) throw FormatError("FLD1: bad component count");
  if (h.n < 8 || h.n > 4096 || (h.n & (h.n - 1)) != 0) throw FormatError("FLD1: bad resolution");
  return h;
}

}  // namespace

std::size_t FieldFileHeader::payload_bytes() const {
  std::size_t count = components;
  for (std::uint32_t a = 0; a < dim; ++a) count *= n;
  return count * sizeof(double);
}

std::vector<unsigned char> encode_field(const Field& f, double nu) {
  std::vector<unsigned char> out;
  out.reserve(FieldFileHeader::kBytes + f.data().size() * sizeof(double));
  out.insert(out.end(), FieldFileHeader::kMagic, FieldFileHeader::kMagic + 4);
  put<std::uint32_t>(out, FieldFileHeader::kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.components()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().n()));
  put<double>(out, f.time());
  put<double>(out, nu);
  for (double v : f.data()) put<double>(out, v);
  return out;
}

FieldFile decode_field(const std::vector<unsigned char>& bytes) {
  const FieldFileHeader h = parse_header(bytes.data(), bytes.size());
  if (bytes.size() != FieldFileHeader::kBytes + h.payload_bytes()) {
    throw FormatError("FLD1: payload length " + std::to_string(bytes.size() - FieldFileHeader::kBytes) +
                      " does not match header (" + std::to_string(h.payload_bytes()) + ")");
  }
  Field f(Grid(static_cast<int>(h.dim), static_cast<int>(h.n)), static_cast<int>(h.components), h.time);
  const unsigned char* p = bytes.data() + FieldFileHeader::kBytes;
  auto data = f.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = get<double>(p + i * sizeof(double));
  return {h, std::move(f)};
}

void write_field(const std::filesystem::path& path, const Field& f, double nu) {
  const auto bytes = encode_field(f, nu);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_field(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

FieldFileHeader read_field_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  unsigned char buf[FieldFileHeader::kBytes];
  in.read(reinterpret_cast<char*>(buf), sizeof(buf));
  return parse_header(buf, static_cast<std::size_t>(in.gcount()));
}

}  // namespace kolmo
