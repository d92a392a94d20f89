#pragma once

#include <filesystem>
#include <iosfwd>

#include "tcatch/tensor.hpp"

namespace tcatch {

// CTB tensor file layout, all integers little-endian:
//   "CTB1" | u8 order M | M x u64 dims | prod(dims) x f64 values in vec order
void write_ctb(std::ostream& out, const DenseTensor& t);
DenseTensor read_ctb(std::istream& in);

void write_ctb(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor read_ctb(const std::filesystem::path& path);

} // namespace tcatch
