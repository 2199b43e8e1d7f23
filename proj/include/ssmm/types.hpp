#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ssmm {

// Element types supported by the machine and the binary file formats.
enum class Dtype : std::uint8_t { i32 = 0, f32 = 1, f64 = 2, i64 = 3 };

template <typename T>
struct dtype_of;
template <> struct dtype_of<std::int32_t> { static constexpr Dtype value = Dtype::i32; };
template <> struct dtype_of<float>        { static constexpr Dtype value = Dtype::f32; };
template <> struct dtype_of<double>       { static constexpr Dtype value = Dtype::f64; };
template <> struct dtype_of<std::int64_t> { static constexpr Dtype value = Dtype::i64; };

inline const char* dtype_name(Dtype d) {
    switch (d) {
        case Dtype::i32: return "i32";
        case Dtype::f32: return "f32";
        case Dtype::f64: return "f64";
        case Dtype::i64: return "i64";
    }
    return "?";
}

inline int dtype_bytes(Dtype d) {
    switch (d) {
        case Dtype::i32: case Dtype::f32: return 4;
        case Dtype::f64: case Dtype::i64: return 8;
    }
    return 4;
}

inline bool parse_dtype(const std::string& s, Dtype& out) {
    if (s == "i32") { out = Dtype::i32; return true; }
    if (s == "f32") { out = Dtype::f32; return true; }
    if (s == "f64") { out = Dtype::f64; return true; }
    if (s == "i64") { out = Dtype::i64; return true; }
    return false;
}

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

struct BlockViolation : std::runtime_error {
    std::int64_t row, block;
    BlockViolation(std::int64_t r, std::int64_t b, const std::string& what)
        : std::runtime_error(what), row(r), block(b) {}
};

struct OutOfBounds : std::runtime_error {
    explicit OutOfBounds(const std::string& what) : std::runtime_error(what) {}
};

struct IndexOutOfRange : std::runtime_error {
    explicit IndexOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct TileMismatch : std::runtime_error {
    explicit TileMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct PhaseMismatch : std::runtime_error {
    explicit PhaseMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedConfig : std::runtime_error {
    explicit UnsupportedConfig(const std::string& what) : std::runtime_error(what) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ssmm
