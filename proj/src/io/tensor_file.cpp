#include "hd/io/tensor_file.hpp"

#include "hd/io/binary.hpp"

#include <bit>
#include <fstream>

namespace hd::io {

namespace {
constexpr std::string_view kMagic = "HDTN";
constexpr std::uint8_t kVersion = 1;
} // namespace

void write_tensor(std::ostream& os, const Tensor& t, DType dtype) {
    require(t.rank() >= 1 && t.rank() <= 4, ErrorKind::unsupported_dimension, "tensor files hold rank 1..4");
    require(dtype == DType::float32 || dtype == DType::float64, ErrorKind::invalid_argument, "unknown dtype");
    put_magic(os, kMagic);
    put_u8(os, kVersion);
    put_u8(os, static_cast<std::uint8_t>(dtype));
    put_u8(os, static_cast<std::uint8_t>(t.rank()));
    for (auto d : t.shape()) {
        require(d <= 0xFFFFFFFFu, ErrorKind::invalid_argument, "dimension exceeds u32");
        put_u32(os, static_cast<std::uint32_t>(d));
    }
    for (double v : t.values()) {
        if (dtype == DType::float32) {
            put_le(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        } else {
            put_le(os, std::bit_cast<std::uint64_t>(v));
        }
    }
    require(static_cast<bool>(os), ErrorKind::io, "write failed");
}

TensorFile read_tensor(std::istream& is) {
    expect_magic(is, kMagic);
    const auto version = get_u8(is);
    require(version == kVersion, ErrorKind::format, "unsupported HDTN version " + std::to_string(version));
    const auto dtype = get_u8(is);
    require(dtype <= 1, ErrorKind::format, "unknown HDTN dtype " + std::to_string(dtype));
    const auto ndim = get_u8(is);
    require(ndim >= 1 && ndim <= 4, ErrorKind::format, "HDTN ndim must be 1..4");
    Shape shape(ndim);
    for (auto& d : shape) {
        d = get_u32(is);
    }
    TensorFile f;
    f.dtype = static_cast<DType>(dtype);
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) {
        v = f.dtype == DType::float32 ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(is)))
                                      : std::bit_cast<double>(get_le<std::uint64_t>(is));
    }
    expect_eof(is);
    f.tensor = Tensor(std::move(shape), std::move(values));
    return f;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t, DType dtype) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), ErrorKind::io, "cannot open " + path.string() + " for writing");
    write_tensor(os, t, dtype);
}

TensorFile load_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), ErrorKind::io, "cannot open " + path.string());
    return read_tensor(is);
}

} // namespace hd::io
