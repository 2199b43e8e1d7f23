#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ssmm/analysis.hpp"
#include "ssmm/sparse_format.hpp"

namespace ssmm {

// Binary matrix containers, little-endian:
//   SSNM (sparse): "SSNM" u8 version u8 dtype u16 n u16 m u64 rows u64 cols,
//                  values row-major, col_idx bytes row-major
//   SSDM (dense):  "SSDM" u8 version u8 dtype u64 rows u64 cols, data row-major

namespace detail {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename U>
void put_le(std::ostream& os, U v) {
    unsigned char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(os, buf, sizeof(U));
}

template <typename U>
U get_le(std::istream& is) {
    unsigned char buf[sizeof(U)];
    is.read(reinterpret_cast<char*>(buf), sizeof(U));
    if (!is) throw FormatError("file: truncated header");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
}

template <typename T>
void put_scalar_le(std::ostream& os, T v) {
    if constexpr (sizeof(T) == 4)
        put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(v));
    else
        put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
}

template <typename T>
T get_scalar_le(std::istream& is) {
    if constexpr (sizeof(T) == 4)
        return std::bit_cast<T>(get_le<std::uint32_t>(is));
    else
        return std::bit_cast<T>(get_le<std::uint64_t>(is));
}

inline void expect_magic(std::istream& is, const char* magic) {
    char buf[4];
    is.read(buf, 4);
    if (!is || std::memcmp(buf, magic, 4) != 0)
        throw FormatError(std::string("file: bad magic, expected ") + magic);
}

}  // namespace detail

struct FileInfo {
    bool sparse = false;
    Dtype dtype = Dtype::i32;
    int n = 0, m = 0;  // sparse only
    std::int64_t rows = 0, cols = 0;
};

inline FileInfo probe_matrix_file(std::istream& is) {
    char buf[4];
    is.read(buf, 4);
    if (!is) throw FormatError("file: truncated magic");
    FileInfo info;
    if (std::memcmp(buf, "SSNM", 4) == 0)
        info.sparse = true;
    else if (std::memcmp(buf, "SSDM", 4) == 0)
        info.sparse = false;
    else
        throw FormatError("file: unrecognized magic");
    const auto version = detail::get_le<std::uint8_t>(is);
    if (version != 1) throw FormatError("file: unsupported version");
    const auto dt = detail::get_le<std::uint8_t>(is);
    if (dt > 3) throw FormatError("file: unknown dtype code");
    info.dtype = static_cast<Dtype>(dt);
    if (info.sparse) {
        info.n = detail::get_le<std::uint16_t>(is);
        info.m = detail::get_le<std::uint16_t>(is);
    }
    info.rows = static_cast<std::int64_t>(detail::get_le<std::uint64_t>(is));
    info.cols = static_cast<std::int64_t>(detail::get_le<std::uint64_t>(is));
    return info;
}

template <typename T>
void write_ssnm(std::ostream& os, const StructuredSparseMatrix<T>& ssm) {
    detail::put_bytes(os, "SSNM", 4);
    detail::put_le<std::uint8_t>(os, 1);
    detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(dtype_of<T>::value));
    detail::put_le<std::uint16_t>(os, static_cast<std::uint16_t>(ssm.pattern.n));
    detail::put_le<std::uint16_t>(os, static_cast<std::uint16_t>(ssm.pattern.m));
    detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(ssm.rows));
    detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(ssm.cols));
    for (Index i = 0; i < ssm.values.size(); ++i)
        detail::put_scalar_le<T>(os, *(ssm.values.data() + i));
    for (Index i = 0; i < ssm.col_idx.size(); ++i)
        detail::put_le<std::uint8_t>(os, *(ssm.col_idx.data() + i));
}

template <typename T>
StructuredSparseMatrix<T> read_ssnm(std::istream& is) {
    detail::expect_magic(is, "SSNM");
    if (detail::get_le<std::uint8_t>(is) != 1) throw FormatError("ssnm: unsupported version");
    if (static_cast<Dtype>(detail::get_le<std::uint8_t>(is)) != dtype_of<T>::value)
        throw FormatError("ssnm: dtype mismatch");
    StructuredSparseMatrix<T> ssm;
    ssm.pattern.n = detail::get_le<std::uint16_t>(is);
    ssm.pattern.m = detail::get_le<std::uint16_t>(is);
    ssm.rows = static_cast<Index>(detail::get_le<std::uint64_t>(is));
    ssm.cols = static_cast<Index>(detail::get_le<std::uint64_t>(is));
    if (!ssm.pattern.valid() || ssm.rows < 0 || ssm.cols < 0 || ssm.cols % ssm.pattern.m != 0)
        throw FormatError("ssnm: inconsistent header");
    const Index stored = ssm.stored_per_row();
    ssm.values.resize(ssm.rows, stored);
    ssm.col_idx.resize(ssm.rows, stored);
    for (Index i = 0; i < ssm.values.size(); ++i)
        *(ssm.values.data() + i) = detail::get_scalar_le<T>(is);
    for (Index i = 0; i < ssm.col_idx.size(); ++i)
        *(ssm.col_idx.data() + i) = detail::get_le<std::uint8_t>(is);
    if (const auto v = validate(ssm); !v.empty())
        throw FormatError("ssnm: payload fails validation: " + v.front().rule);
    return ssm;
}

template <typename T>
void write_ssdm(std::ostream& os, const DenseMatrix<T>& d) {
    detail::put_bytes(os, "SSDM", 4);
    detail::put_le<std::uint8_t>(os, 1);
    detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(dtype_of<T>::value));
    detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(d.rows()));
    detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(d.cols()));
    for (Index i = 0; i < d.size(); ++i) detail::put_scalar_le<T>(os, *(d.data() + i));
}

template <typename T>
DenseMatrix<T> read_ssdm(std::istream& is) {
    detail::expect_magic(is, "SSDM");
    if (detail::get_le<std::uint8_t>(is) != 1) throw FormatError("ssdm: unsupported version");
    if (static_cast<Dtype>(detail::get_le<std::uint8_t>(is)) != dtype_of<T>::value)
        throw FormatError("ssdm: dtype mismatch");
    const auto rows = static_cast<Index>(detail::get_le<std::uint64_t>(is));
    const auto cols = static_cast<Index>(detail::get_le<std::uint64_t>(is));
    if (rows < 0 || cols < 0) throw FormatError("ssdm: inconsistent header");
    DenseMatrix<T> d(rows, cols);
    for (Index i = 0; i < d.size(); ++i) *(d.data() + i) = detail::get_scalar_le<T>(is);
    return d;
}

// CSV import/export for dense matrices, one row per line.

template <typename T>
void write_csv(std::ostream& os, const DenseMatrix<T>& d) {
    os.precision(17);
    for (Index i = 0; i < d.rows(); ++i) {
        for (Index j = 0; j < d.cols(); ++j) {
            if (j) os << ',';
            if constexpr (std::is_integral_v<T>)
                os << static_cast<std::int64_t>(d(i, j));
            else
                os << d(i, j);
        }
        os << '\n';
    }
}

template <typename T>
DenseMatrix<T> read_csv(std::istream& is) {
    std::vector<std::vector<T>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
        std::vector<T> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t\r");
            const auto e = cell.find_last_not_of(" \t\r");
            const std::string trimmed =
                b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1);
            std::size_t used = 0;
            try {
                if constexpr (std::is_integral_v<T>)
                    row.push_back(static_cast<T>(std::stoll(trimmed, &used)));
                else
                    row.push_back(static_cast<T>(std::stod(trimmed, &used)));
            } catch (const std::exception&) {
                throw FormatError("csv: unparsable cell '" + cell + "'");
            }
            if (used != trimmed.size())
                throw FormatError("csv: trailing junk in cell '" + cell + "'");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw FormatError("csv: ragged rows");
        rows.push_back(std::move(row));
    }
    DenseMatrix<T> d(static_cast<Index>(rows.size()),
                     rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < d.rows(); ++i)
        for (Index j = 0; j < d.cols(); ++j)
            d(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return d;
}

inline CostWeights load_weights_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("weights: cannot open " + path);
    return parse_weights(f);
}

}  // namespace ssmm
