#include "tcatch/ctb.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "tcatch/errors.hpp"

namespace tcatch {

namespace {

constexpr std::array<char, 4> kMagic{'C', 'T', 'B', '1'};

template <class T>
void put_le(std::ostream& out, T value) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bits.begin(), bits.end());
  out.write(reinterpret_cast<const char*>(bits.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bits{};
  if (!in.read(reinterpret_cast<char*>(bits.data()), sizeof(T)))
    throw IoError(std::string("CTB: truncated payload while reading ") + what);
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bits.begin(), bits.end());
  return std::bit_cast<T>(bits);
}

} // namespace

void write_ctb(std::ostream& out, const DenseTensor& t) {
  if (t.order() > 255) throw DimensionError("CTB: order exceeds 255");
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.order()));
  for (std::size_t d : t.shape().dims()) put_le<std::uint64_t>(out, d);
  for (double v : t.data()) put_le<double>(out, v);
  if (!out) throw IoError("CTB: write failed");
}

DenseTensor read_ctb(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size())) throw IoError("CTB: truncated header");
  if (magic != kMagic) throw IoError("CTB: bad magic bytes");
  const auto order = get_le<std::uint8_t>(in, "order");
  if (order == 0) throw IoError("CTB: order must be at least 1");
  std::vector<std::size_t> dims(order);
  for (auto& d : dims) d = static_cast<std::size_t>(get_le<std::uint64_t>(in, "dims"));
  TensorShape shape = [&] {
    try {
      return TensorShape(dims);
    } catch (const DimensionError& e) {
      throw IoError(std::string("CTB: invalid dims: ") + e.what());
    }
  }();
  std::vector<double> values(shape.size());
  for (auto& v : values) v = get_le<double>(in, "values");
  return DenseTensor(std::move(shape), std::move(values));
}

void write_ctb(const std::filesystem::path& path, const DenseTensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_ctb(out, t);
}

DenseTensor read_ctb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_ctb(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

} // namespace tcatch
