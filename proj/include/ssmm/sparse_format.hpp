#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ssmm/dense.hpp"
#include "ssmm/types.hpp"

namespace ssmm {

/// N:M structured sparsity: every block of m consecutive columns in a row
/// holds at most n non-zeros. m must be a power of two so index math can be
/// done with shifts; m <= 256 keeps stored indexes inside one byte.
struct SparsityPattern {
    int n = 1;
    int m = 4;

    bool valid() const {
        return n >= 1 && n <= m && m <= 256 && std::has_single_bit(static_cast<unsigned>(m));
    }
    void require_valid() const {
        if (!valid()) throw UnsupportedConfig("invalid sparsity pattern " + str());
    }
    Index stored_per_row(Index cols) const { return cols / m * n; }
    std::string str() const { return std::to_string(n) + ":" + std::to_string(m); }

    friend bool operator==(const SparsityPattern&, const SparsityPattern&) = default;
};

inline bool parse_pattern(const std::string& s, SparsityPattern& out) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) return false;
    try {
        out.n = std::stoi(s.substr(0, colon));
        out.m = std::stoi(s.substr(colon + 1));
    } catch (const std::exception&) {
        return false;
    }
    return out.valid();
}

/// Recovers the full-row column of a stored entry: the stored in-block index
/// plus block_id * m, where block_id = floor(j / n) for stored-slot position j.
/// Shifts replace mul/div when n and m are powers of two.
inline std::int64_t actual_col_index(std::int64_t j, std::int64_t stored_idx,
                                     const SparsityPattern& p) {
    const std::int64_t block_id = std::has_single_bit(static_cast<unsigned>(p.n))
                                      ? (j >> std::countr_zero(static_cast<unsigned>(p.n)))
                                      : (j / p.n);
    return stored_idx + (block_id << std::countr_zero(static_cast<unsigned>(p.m)));
}

/// Compressed N:M operand: per row, exactly stored_per_row slots of
/// (value, in-block column index), n slots per block, zero-padded.
template <typename T>
struct StructuredSparseMatrix {
    SparsityPattern pattern;
    Index rows = 0;
    Index cols = 0;            // logical columns of the decompressed matrix
    DenseMatrix<T> values;     // rows x stored_per_row
    IdxMatrix col_idx;         // rows x stored_per_row, entries in [0, m)

    Index stored_per_row() const { return pattern.stored_per_row(cols); }
    double density() const { return static_cast<double>(pattern.n) / pattern.m; }
};

struct Violation {
    Index row = -1;    // -1 when the violation is not row-local
    Index block = -1;
    std::string rule;
};

template <typename T>
StructuredSparseMatrix<T> encode(const DenseMatrix<T>& dense, const SparsityPattern& p) {
    p.require_valid();
    if (dense.cols() % p.m != 0)
        throw ShapeError("encode: cols " + std::to_string(dense.cols()) +
                         " not a multiple of m=" + std::to_string(p.m));

    StructuredSparseMatrix<T> out;
    out.pattern = p;
    out.rows = dense.rows();
    out.cols = dense.cols();
    const Index stored = out.stored_per_row();
    out.values = DenseMatrix<T>::Zero(out.rows, stored);
    out.col_idx = IdxMatrix::Zero(out.rows, stored);

    const Index blocks = dense.cols() / p.m;
    std::vector<int> picked;
    for (Index i = 0; i < dense.rows(); ++i) {
        for (Index b = 0; b < blocks; ++b) {
            picked.clear();
            for (int c = 0; c < p.m; ++c)
                if (dense(i, b * p.m + c) != T(0)) picked.push_back(c);
            if (static_cast<int>(picked.size()) > p.n)
                throw BlockViolation(i, b, "encode: block (" + std::to_string(i) + "," +
                                               std::to_string(b) + ") has " +
                                               std::to_string(picked.size()) +
                                               " non-zeros, pattern allows " +
                                               std::to_string(p.n));
            // Pad with the smallest unused in-block indexes; the merged set is
            // sorted so the n slots stay strictly ascending.
            for (int c = 0; c < p.m && static_cast<int>(picked.size()) < p.n; ++c)
                if (!std::binary_search(picked.begin(), picked.end(), c)) {
                    picked.insert(std::lower_bound(picked.begin(), picked.end(), c), c);
                }
            for (int s = 0; s < p.n; ++s) {
                out.values(i, b * p.n + s) = dense(i, b * p.m + picked[s]);
                out.col_idx(i, b * p.n + s) = static_cast<std::uint8_t>(picked[s]);
            }
        }
    }
    return out;
}

template <typename T>
DenseMatrix<T> decode(const StructuredSparseMatrix<T>& ssm) {
    DenseMatrix<T> out = DenseMatrix<T>::Zero(ssm.rows, ssm.cols);
    const Index stored = ssm.stored_per_row();
    for (Index i = 0; i < ssm.rows; ++i)
        for (Index j = 0; j < stored; ++j)
            out(i, actual_col_index(j, ssm.col_idx(i, j), ssm.pattern)) = ssm.values(i, j);
    return out;
}

/// Magnitude pruning to the N:M constraint: per block keep the n entries of
/// largest |value|, ties resolved toward the lower column index.
template <typename T>
StructuredSparseMatrix<T> prune_to_nm(const DenseMatrix<T>& dense, const SparsityPattern& p) {
    p.require_valid();
    if (dense.cols() % p.m != 0)
        throw ShapeError("prune_to_nm: cols not a multiple of m");

    DenseMatrix<T> kept = dense;
    const Index blocks = dense.cols() / p.m;
    std::vector<int> order(p.m);
    for (Index i = 0; i < dense.rows(); ++i)
        for (Index b = 0; b < blocks; ++b) {
            for (int c = 0; c < p.m; ++c) order[c] = c;
            std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
                using std::abs;
                return abs(dense(i, b * p.m + x)) > abs(dense(i, b * p.m + y));
            });
            for (int s = p.n; s < p.m; ++s) kept(i, b * p.m + order[s]) = T(0);
        }
    return encode(kept, p);
}

template <typename T>
std::vector<Violation> validate(const StructuredSparseMatrix<T>& ssm) {
    std::vector<Violation> v;
    if (!ssm.pattern.valid()) {
        v.push_back({-1, -1, "pattern: invalid n:m"});
        return v;
    }
    if (ssm.cols % ssm.pattern.m != 0)
        v.push_back({-1, -1, "shape: cols not a multiple of m"});
    const Index stored = ssm.stored_per_row();
    if (ssm.values.rows() != ssm.rows || ssm.values.cols() != stored)
        v.push_back({-1, -1, "shape: values array is not rows x stored_per_row"});
    if (ssm.col_idx.rows() != ssm.rows || ssm.col_idx.cols() != stored)
        v.push_back({-1, -1, "shape: col_idx array is not rows x stored_per_row"});
    if (!v.empty()) return v;

    for (Index i = 0; i < ssm.rows; ++i)
        for (Index j = 0; j < stored; ++j) {
            const Index b = j / ssm.pattern.n;
            if (ssm.col_idx(i, j) >= ssm.pattern.m)
                v.push_back({i, b, "range: col_idx >= m"});
            if (j % ssm.pattern.n != 0 && ssm.col_idx(i, j) <= ssm.col_idx(i, j - 1))
                v.push_back({i, b, "order: in-block indexes not strictly ascending"});
        }
    return v;
}

/// Relative storage growth of switching the stored index of each slot from
/// ceil(log2(m)) bits to a full-column ceil(log2(cols)) index.
template <typename T>
double full_column_overhead(const StructuredSparseMatrix<T>& ssm, int value_bits) {
    const auto bits_for = [](std::int64_t x) {
        int b = 0;
        while ((std::int64_t{1} << b) < x) ++b;
        return b;
    };
    const int bits_struct = bits_for(ssm.pattern.m);
    const int bits_full = bits_for(ssm.cols);
    return static_cast<double>(bits_full - bits_struct) / (value_bits + bits_struct);
}

/// Side representation for the full-column kernel variant: each slot's
/// recovered column, stored at full width.
template <typename T>
DenseMatrix<std::int32_t> full_column_indexes(const StructuredSparseMatrix<T>& ssm) {
    const Index stored = ssm.stored_per_row();
    DenseMatrix<std::int32_t> fc(ssm.rows, stored);
    for (Index i = 0; i < ssm.rows; ++i)
        for (Index j = 0; j < stored; ++j)
            fc(i, j) = static_cast<std::int32_t>(
                actual_col_index(j, ssm.col_idx(i, j), ssm.pattern));
    return fc;
}

}  // namespace ssmm
