#pragma once

#include "hd/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>

namespace hd::io {

/// HDTN v1: "HDTN", u8 version, u8 dtype, u8 ndim (1..4), u32 per dim, then
/// the row-major little-endian payload.
enum class DType : std::uint8_t {
    float32 = 0,
    float64 = 1,
};

struct TensorFile {
    Tensor tensor;
    DType dtype = DType::float32;
};

/// float32 rounds each value to the nearest float.
void write_tensor(std::ostream& os, const Tensor& t, DType dtype = DType::float32);
TensorFile read_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, const Tensor& t, DType dtype = DType::float32);
TensorFile load_tensor(const std::filesystem::path& path);

} // namespace hd::io
