#pragma once

#include "hd/error.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string_view>

namespace hd::io {

// Little-endian primitives shared by the HDMT and HDTN formats.

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void put_u8(std::ostream& os, std::uint8_t v) { put_bytes(os, &v, 1); }

template <class UInt>
void put_le(std::ostream& os, UInt v) {
    std::array<unsigned char, sizeof(UInt)> b{};
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
    }
    put_bytes(os, b.data(), b.size());
}

inline void put_u16(std::ostream& os, std::uint16_t v) { put_le(os, v); }
inline void put_u32(std::ostream& os, std::uint32_t v) { put_le(os, v); }

inline void get_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    require(static_cast<std::size_t>(is.gcount()) == n, ErrorKind::format, "unexpected end of file");
}

inline std::uint8_t get_u8(std::istream& is) {
    std::uint8_t v = 0;
    get_bytes(is, &v, 1);
    return v;
}

template <class UInt>
UInt get_le(std::istream& is) {
    std::array<unsigned char, sizeof(UInt)> b{};
    get_bytes(is, b.data(), b.size());
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        v = static_cast<UInt>(v | (static_cast<UInt>(b[i]) << (8 * i)));
    }
    return v;
}

inline std::uint16_t get_u16(std::istream& is) { return get_le<std::uint16_t>(is); }
inline std::uint32_t get_u32(std::istream& is) { return get_le<std::uint32_t>(is); }

inline void put_magic(std::ostream& os, std::string_view magic) { put_bytes(os, magic.data(), magic.size()); }

inline void expect_magic(std::istream& is, std::string_view magic) {
    std::array<char, 8> buf{};
    get_bytes(is, buf.data(), magic.size());
    require(std::string_view(buf.data(), magic.size()) == magic, ErrorKind::format,
            "bad magic, expected " + std::string(magic));
}

inline void expect_eof(std::istream& is) {
    is.peek();
    require(is.eof(), ErrorKind::format, "trailing bytes after payload");
}

} // namespace hd::io
