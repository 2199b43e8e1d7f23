#pragma once

#include <algorithm>
#include <string>
#include <thread>
#include <vector>

#include "ssmm/machine.hpp"
#include "ssmm/sparse_format.hpp"

namespace ssmm {

enum class Algorithm : int {
    dense1 = 0,     // A row in VRF, element extraction via vmv_x_s + vslide1down
    dense2,         // A elements through the scalar value file
    dense3,         // A row in VRF, element broadcast via vrgather.vx
    alg1s,          // sparse variant of dense1
    alg2s,          // sparse variant of dense2
    alg3s,          // sparse variant of dense3
    alg3s_unrolled, // alg3s with interleaved inner/outer unrolling
    alg3s_fc,       // alg3s with precomputed full-column indexes (no index alu)
    alg5,           // vindexmac, single resident tile of B
    alg6,           // vindexmac, tile reload phases covering a full value row
    alg6_unrolled,  // alg6 generalized: any shape, unrolling, b-stationary order
};

inline const char* algorithm_name(Algorithm a) {
    static constexpr const char* names[] = {"dense1", "dense2", "dense3",
                                            "alg1s",  "alg2s",  "alg3s",
                                            "alg3s_unrolled", "alg3s_fc",
                                            "alg5",   "alg6",   "alg6_unrolled"};
    return names[static_cast<int>(a)];
}

inline bool parse_algorithm(const std::string& s, Algorithm& out) {
    for (int i = 0; i <= static_cast<int>(Algorithm::alg6_unrolled); ++i)
        if (s == algorithm_name(static_cast<Algorithm>(i))) {
            out = static_cast<Algorithm>(i);
            return true;
        }
    return false;
}

inline bool is_dense(Algorithm a) {
    return a == Algorithm::dense1 || a == Algorithm::dense2 || a == Algorithm::dense3;
}

inline bool is_vindexmac(Algorithm a) {
    return a == Algorithm::alg5 || a == Algorithm::alg6 || a == Algorithm::alg6_unrolled;
}

struct KernelConfig {
    Algorithm algorithm = Algorithm::alg3s;
    // inner_unroll/mid_unroll group slot positions resp. tile phases per
    // unrolled step. Positions stay sequential register-reusing chains, so
    // these two change neither the emitted stream nor the counters; they are
    // kept for configuration sweeps and register-budget bookkeeping.
    int inner_unroll = 1;
    int outer_unroll = 1;   // rows of A processed together (interleaved)
    int mid_unroll = 1;
    int tile_rows = 16;     // L, multiple of pattern.m
    int tile_base = 16;     // first vector register of the B tile
    bool b_stationary = true;
};

struct RegisterBudget {
    int vregs = 0;
    int sregs = 0;
    bool fits() const { return vregs <= 32 && sregs <= 32; }
};

/// Vector/scalar register demand of a configuration. Callers reject
/// configurations whose demand exceeds the 32-register files.
inline RegisterBudget register_budget(const KernelConfig& cfg) {
    const int u = std::max(1, cfg.outer_unroll);
    switch (cfg.algorithm) {
        case Algorithm::dense1: return {3, 1};
        case Algorithm::dense2: return {2, 1};
        case Algorithm::dense3: return {4, 1};
        case Algorithm::alg1s:  return {3, 1};
        case Algorithm::alg2s:  return {2, 2};
        case Algorithm::alg3s:  return {4, 1};
        case Algorithm::alg3s_unrolled:
        case Algorithm::alg3s_fc: return {4 * u, u};
        case Algorithm::alg5:
        case Algorithm::alg6:   return {cfg.tile_rows + 2, 1};
        case Algorithm::alg6_unrolled: return {cfg.tile_rows + 2 * u, u};
    }
    return {32, 32};
}

// ---------------------------------------------------------------------------
// Loop-bound plans. Kernels emit instructions from these; the analysis module
// derives closed-form counts from the same bounds.

struct Stripe {
    Index col0 = 0;
    int width = 0;  // effective vector length for this stripe
};

inline std::vector<Stripe> make_stripes(Index cols, int vl_max) {
    std::vector<Stripe> s;
    for (Index c = 0; c < cols; c += vl_max)
        s.push_back({c, static_cast<int>(std::min<Index>(vl_max, cols - c))});
    return s;
}

struct TilePhase {
    Index k0 = 0;
    int height = 0;  // B rows in this tile load; multiple of m except never padded
};

struct TileSegment {
    Index k0 = 0, k_end = 0;
    std::vector<TilePhase> phases;
};

/// Column layout of the vindexmac dataflow for one stripe: tile height is
/// clamped so a phase's value slice fits the stripe's vector length, segments
/// group as many phases as one register of values can feed.
struct VimacPlan {
    int tile_rows = 0;           // effective L for this stripe
    bool per_slot_values = false;  // stripe narrower than n: load values one by one
    std::vector<TileSegment> segments;
};

inline VimacPlan plan_vimac_stripe(Index k_cols, const SparsityPattern& p, int tile_rows_cfg,
                                   int width) {
    VimacPlan plan;
    if (width >= p.n) {
        Index cap_rows = static_cast<Index>(width) * p.m / p.n;
        cap_rows -= cap_rows % p.m;
        plan.tile_rows = static_cast<int>(std::min<Index>(tile_rows_cfg, cap_rows));
        plan.per_slot_values = false;
    } else {
        plan.tile_rows = p.m;
        plan.per_slot_values = true;
    }
    const Index slots_per_tile = static_cast<Index>(plan.tile_rows) * p.n / p.m;
    const Index phases_per_seg =
        plan.per_slot_values ? 1 : std::max<Index>(1, width / slots_per_tile);
    const Index seg_cols = phases_per_seg * plan.tile_rows;
    for (Index k0 = 0; k0 < k_cols; k0 += seg_cols) {
        TileSegment seg;
        seg.k0 = k0;
        seg.k_end = std::min(k_cols, k0 + seg_cols);
        for (Index kp = seg.k0; kp < seg.k_end; kp += plan.tile_rows)
            seg.phases.push_back(
                {kp, static_cast<int>(std::min<Index>(plan.tile_rows, seg.k_end - kp))});
        plan.segments.push_back(std::move(seg));
    }
    return plan;
}

/// Phase count of the exact-fit alg6 dataflow: m_phases = (m/n) * (vl/L).
/// Returns 0 when the formula is not integral for the given operands.
inline Index alg6_phase_count(const SparsityPattern& p, int vl, int tile_rows) {
    const Index num = static_cast<Index>(p.m) * vl;
    const Index den = static_cast<Index>(p.n) * tile_rows;
    if (den == 0 || num % den != 0) return 0;
    return num / den;
}

// ---------------------------------------------------------------------------
// Machine-resident problem images.

template <typename T>
struct BoundProblem {
    std::size_t values = 0, colidx = 0, fc = 0, b = 0, c = 0, a_dense = 0;
    Index rows = 0, k = 0, cols = 0, stored = 0;
    SparsityPattern pat;

    std::size_t values_at(Index i, Index j) const { return values + i * stored + j; }
    std::size_t colidx_at(Index i, Index j) const { return colidx + i * stored + j; }
    std::size_t fc_at(Index i, Index j) const { return fc + i * stored + j; }
    std::size_t a_at(Index i, Index kk) const { return a_dense + i * k + kk; }
    std::size_t b_at(Index kk, Index c0) const { return b + kk * cols + c0; }
    std::size_t c_at(Index i, Index c0) const { return c + i * cols + c0; }
};

template <typename T>
BoundProblem<T> bind_sparse(VectorMachine<T>& m, const StructuredSparseMatrix<T>& a,
                            const DenseMatrix<T>& b, bool with_fc) {
    BoundProblem<T> p;
    p.rows = a.rows;
    p.k = a.cols;
    p.cols = b.cols();
    p.stored = a.stored_per_row();
    p.pat = a.pattern;
    p.values = m.map_region("A_values", {a.values.data(), static_cast<std::size_t>(a.values.size())});
    std::vector<T> idx(a.col_idx.size());
    for (Index i = 0; i < a.col_idx.size(); ++i)
        idx[static_cast<std::size_t>(i)] = static_cast<T>(*(a.col_idx.data() + i));
    p.colidx = m.map_region("A_colidx", idx);
    if (with_fc) {
        const auto fcm = full_column_indexes(a);
        std::vector<T> fc(fcm.size());
        for (Index i = 0; i < fcm.size(); ++i)
            fc[static_cast<std::size_t>(i)] = static_cast<T>(*(fcm.data() + i));
        p.fc = m.map_region("A_fc", fc);
    }
    p.b = m.map_region("B", {b.data(), static_cast<std::size_t>(b.size())});
    p.c = m.alloc_region("C", static_cast<std::size_t>(p.rows * p.cols));
    return p;
}

template <typename T>
BoundProblem<T> bind_dense(VectorMachine<T>& m, const DenseMatrix<T>& a,
                           const DenseMatrix<T>& b) {
    BoundProblem<T> p;
    p.rows = a.rows();
    p.k = a.cols();
    p.cols = b.cols();
    p.a_dense = m.map_region("A_dense", {a.data(), static_cast<std::size_t>(a.size())});
    p.b = m.map_region("B", {b.data(), static_cast<std::size_t>(b.size())});
    p.c = m.alloc_region("C", static_cast<std::size_t>(p.rows * p.cols));
    return p;
}

template <typename T>
DenseMatrix<T> read_back_c(const VectorMachine<T>& m, Index rows, Index cols) {
    DenseMatrix<T> c(rows, cols);
    const auto span = m.region("C");
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) c(i, j) = span[static_cast<std::size_t>(i * cols + j)];
    return c;
}

// ---------------------------------------------------------------------------
// Stream emitters. The machine's active vl is the stripe width on entry and
// on exit of every emitter.

namespace detail {

// Loads one values/A-row chunk for a group of rows, shrinking vl for a
// partial chunk and restoring it afterwards.
template <typename T, typename AddrFn>
void load_group_chunk(VectorMachine<T>& mach, int width, int chunk, int nrows, AddrFn addr,
                      const std::vector<int>& regs) {
    if (chunk != width) mach.set_vl(chunk);
    for (int r = 0; r < nrows; ++r) mach.vload(regs[r], addr(r));
    if (chunk != width) mach.set_vl(width);
}

// Row-wise kernels over one stripe: dense variants 1-3 and the sparse
// algorithms 1-S/2-S/3-S (plus the full-column 3-S). Rows are processed in
// interleaved groups of `outer` with class-grouped round-robin emission; the
// leftover rows run rolled.
template <typename T>
void emit_rowwise_stripe(VectorMachine<T>& mach, const BoundProblem<T>& p, const Stripe& st,
                         Algorithm alg, int outer) {
    const bool dense = is_dense(alg);
    const Index inner_len = dense ? p.k : p.stored;
    const int w = st.width;
    const int u = std::max(1, outer);

    std::vector<Index> rows;
    for (Index i0 = 0; i0 < p.rows;) {
        const int g = static_cast<int>(std::min<Index>(p.rows - i0 >= u ? u : 1, p.rows - i0));
        rows.clear();
        for (int r = 0; r < g; ++r) rows.push_back(i0 + r);

        // register map: values chunk r, accumulator u+r, B row 2u+r, gather 3u+r
        std::vector<int> val_regs(g), acc_regs(g), b_regs(g), gat_regs(g);
        for (int r = 0; r < g; ++r) {
            val_regs[r] = r;
            acc_regs[r] = u + r;
            b_regs[r] = 2 * u + r;
            gat_regs[r] = 3 * u + r;
        }

        for (int r = 0; r < g; ++r) mach.vmv_zero(acc_regs[r]);

        for (Index j0 = 0; j0 < inner_len; j0 += w) {
            const int chunk = static_cast<int>(std::min<Index>(w, inner_len - j0));
            const bool holds_row_in_vrf =
                alg == Algorithm::dense1 || alg == Algorithm::dense3 ||
                alg == Algorithm::alg1s || alg == Algorithm::alg3s ||
                alg == Algorithm::alg3s_unrolled || alg == Algorithm::alg3s_fc;
            if (holds_row_in_vrf)
                load_group_chunk(mach, w, chunk, g,
                                 [&](int r) {
                                     return dense ? p.a_at(rows[r], j0)
                                                  : p.values_at(rows[r], j0);
                                 },
                                 val_regs);

            for (Index j = j0; j < j0 + chunk; ++j) {
                switch (alg) {
                    case Algorithm::dense1:
                        for (int r = 0; r < g; ++r) mach.vload(b_regs[r], p.b_at(j, st.col0));
                        for (int r = 0; r < g; ++r) mach.vmv_x_s(r, val_regs[r]);
                        for (int r = 0; r < g; ++r) mach.vmacc_vx(acc_regs[r], r, b_regs[r]);
                        for (int r = 0; r < g; ++r) mach.vslide1down(val_regs[r], val_regs[r]);
                        break;
                    case Algorithm::dense2:
                        for (int r = 0; r < g; ++r) mach.load_scalar_value(r, p.a_at(rows[r], j));
                        for (int r = 0; r < g; ++r) mach.vload(b_regs[r], p.b_at(j, st.col0));
                        for (int r = 0; r < g; ++r) mach.vmacc_vx(acc_regs[r], r, b_regs[r]);
                        break;
                    case Algorithm::dense3:
                        for (int r = 0; r < g; ++r) mach.vload(b_regs[r], p.b_at(j, st.col0));
                        for (int r = 0; r < g; ++r)
                            mach.vrgather_vx(gat_regs[r], val_regs[r], static_cast<int>(j - j0));
                        for (int r = 0; r < g; ++r)
                            mach.vmacc_vv(acc_regs[r], gat_regs[r], b_regs[r]);
                        break;
                    case Algorithm::alg1s: {
                        const std::int64_t off = (j / p.pat.n) * p.pat.m;
                        for (int r = 0; r < g; ++r) mach.load_scalar(r, p.colidx_at(rows[r], j));
                        for (int r = 0; r < g; ++r) mach.salu_addi(r, r, off);
                        for (int r = 0; r < g; ++r)
                            mach.vload(b_regs[r], p.b_at(mach.srf(r), st.col0));
                        for (int r = 0; r < g; ++r) mach.vmv_x_s(r, val_regs[r]);
                        for (int r = 0; r < g; ++r) mach.vmacc_vx(acc_regs[r], r, b_regs[r]);
                        for (int r = 0; r < g; ++r) mach.vslide1down(val_regs[r], val_regs[r]);
                        break;
                    }
                    case Algorithm::alg2s: {
                        const std::int64_t off = (j / p.pat.n) * p.pat.m;
                        for (int r = 0; r < g; ++r) mach.load_scalar(r, p.colidx_at(rows[r], j));
                        for (int r = 0; r < g; ++r) mach.salu_addi(r, r, off);
                        for (int r = 0; r < g; ++r)
                            mach.load_scalar_value(r, p.values_at(rows[r], j));
                        for (int r = 0; r < g; ++r)
                            mach.vload(b_regs[r], p.b_at(mach.srf(r), st.col0));
                        for (int r = 0; r < g; ++r) mach.vmacc_vx(acc_regs[r], r, b_regs[r]);
                        break;
                    }
                    case Algorithm::alg3s:
                    case Algorithm::alg3s_unrolled: {
                        const std::int64_t off = (j / p.pat.n) * p.pat.m;
                        for (int r = 0; r < g; ++r) mach.load_scalar(r, p.colidx_at(rows[r], j));
                        for (int r = 0; r < g; ++r) mach.salu_addi(r, r, off);
                        for (int r = 0; r < g; ++r)
                            mach.vload(b_regs[r], p.b_at(mach.srf(r), st.col0));
                        for (int r = 0; r < g; ++r)
                            mach.vrgather_vx(gat_regs[r], val_regs[r], static_cast<int>(j - j0));
                        for (int r = 0; r < g; ++r)
                            mach.vmacc_vv(acc_regs[r], gat_regs[r], b_regs[r]);
                        break;
                    }
                    case Algorithm::alg3s_fc:
                        for (int r = 0; r < g; ++r) mach.load_scalar(r, p.fc_at(rows[r], j));
                        for (int r = 0; r < g; ++r)
                            mach.vload(b_regs[r], p.b_at(mach.srf(r), st.col0));
                        for (int r = 0; r < g; ++r)
                            mach.vrgather_vx(gat_regs[r], val_regs[r], static_cast<int>(j - j0));
                        for (int r = 0; r < g; ++r)
                            mach.vmacc_vv(acc_regs[r], gat_regs[r], b_regs[r]);
                        break;
                    default:
                        throw UnsupportedConfig("emit_rowwise_stripe: not a row-wise algorithm");
                }
            }
        }
        for (int r = 0; r < g; ++r) mach.vstore(acc_regs[r], p.c_at(rows[r], st.col0));
        i0 += g;
    }
}

// vindexmac dataflow over one stripe. Order per `b_stationary`:
//   false — per-row (C resident per row, tiles reloaded per row group)
//   true  — phase-outer (each tile loaded once, C rows revisited per phase)
template <typename T>
void emit_vimac_stripe(VectorMachine<T>& mach, const BoundProblem<T>& p, const Stripe& st,
                       const VimacPlan& plan, int tile_base, int outer, bool b_stationary) {
    const int w = st.width;
    const int u = std::max(1, outer);
    const int n = p.pat.n, m = p.pat.m;

    const auto load_tile = [&](const TilePhase& ph) {
        for (int kk = 0; kk < ph.height; ++kk)
            mach.vload(tile_base + kk, p.b_at(ph.k0 + kk, st.col0));
    };

    // One slot for a group of rows: index load, recovery into the tile's
    // register space, indirect multiply-accumulate, value advance.
    const auto emit_slot = [&](const std::vector<Index>& rows, int g, Index j, Index jp0,
                               const std::vector<int>& val_regs,
                               const std::vector<int>& acc_regs) {
        const std::int64_t imm = tile_base + ((j - jp0) / n) * m;
        for (int r = 0; r < g; ++r) mach.load_scalar(r, p.colidx_at(rows[r], j));
        for (int r = 0; r < g; ++r) mach.salu_addi(r, r, imm);
        if (plan.per_slot_values) {
            mach.set_vl(1);
            for (int r = 0; r < g; ++r) mach.vload(val_regs[r], p.values_at(rows[r], j));
            mach.set_vl(w);
        }
        for (int r = 0; r < g; ++r) mach.vindexmac_vx(acc_regs[r], val_regs[r], r);
        if (!plan.per_slot_values)
            for (int r = 0; r < g; ++r) mach.vslide1down(val_regs[r], val_regs[r]);
    };

    const auto group_rows = [&](Index i0) {
        return static_cast<int>(std::min<Index>(p.rows - i0 >= u ? u : 1, p.rows - i0));
    };

    if (!b_stationary) {
        for (Index i0 = 0; i0 < p.rows;) {
            const int g = group_rows(i0);
            std::vector<Index> rows(g);
            std::vector<int> val_regs(g), acc_regs(g);
            for (int r = 0; r < g; ++r) {
                rows[r] = i0 + r;
                val_regs[r] = r;
                acc_regs[r] = u + r;
            }
            for (int r = 0; r < g; ++r) mach.vload(acc_regs[r], p.c_at(rows[r], st.col0));
            for (const auto& seg : plan.segments) {
                const Index j0 = seg.k0 * n / m;
                const int q = static_cast<int>((seg.k_end - seg.k0) * n / m);
                if (!plan.per_slot_values)
                    load_group_chunk(mach, w, q, g,
                                     [&](int r) { return p.values_at(rows[r], j0); }, val_regs);
                for (const auto& ph : seg.phases) {
                    load_tile(ph);
                    const Index jp0 = ph.k0 * n / m;
                    const Index jp1 = jp0 + static_cast<Index>(ph.height) * n / m;
                    for (Index j = jp0; j < jp1; ++j)
                        emit_slot(rows, g, j, jp0, val_regs, acc_regs);
                }
            }
            for (int r = 0; r < g; ++r) mach.vstore(acc_regs[r], p.c_at(rows[r], st.col0));
            i0 += g;
        }
        return;
    }

    for (const auto& seg : plan.segments) {
        for (const auto& ph : seg.phases) {
            load_tile(ph);
            const Index jp0 = ph.k0 * n / m;
            const Index jp1 = jp0 + static_cast<Index>(ph.height) * n / m;
            for (Index i0 = 0; i0 < p.rows;) {
                const int g = group_rows(i0);
                std::vector<Index> rows(g);
                std::vector<int> val_regs(g), acc_regs(g);
                for (int r = 0; r < g; ++r) {
                    rows[r] = i0 + r;
                    val_regs[r] = r;
                    acc_regs[r] = u + r;
                }
                if (!plan.per_slot_values)
                    load_group_chunk(mach, w, static_cast<int>(jp1 - jp0), g,
                                     [&](int r) { return p.values_at(rows[r], jp0); }, val_regs);
                for (int r = 0; r < g; ++r) mach.vload(acc_regs[r], p.c_at(rows[r], st.col0));
                for (Index j = jp0; j < jp1; ++j) emit_slot(rows, g, j, jp0, val_regs, acc_regs);
                for (int r = 0; r < g; ++r) mach.vstore(acc_regs[r], p.c_at(rows[r], st.col0));
                i0 += g;
            }
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Drivers.

template <typename T>
void validate_kernel_config(const KernelConfig& cfg, const StructuredSparseMatrix<T>* a) {
    if (cfg.inner_unroll < 1 || cfg.outer_unroll < 1 || cfg.mid_unroll < 1)
        throw UnsupportedConfig("unroll factors must be >= 1");
    const auto budget = register_budget(cfg);
    if (!budget.fits())
        throw BudgetExceeded("configuration needs " + std::to_string(budget.vregs) +
                             " vector registers, 32 available");
    if (is_vindexmac(cfg.algorithm)) {
        if (a && cfg.tile_rows % a->pattern.m != 0)
            throw UnsupportedConfig("tile_rows must be a multiple of pattern m");
        if (cfg.tile_base < 0 || cfg.tile_base + cfg.tile_rows > 32)
            throw UnsupportedConfig("tile does not fit the register file above tile_base");
        if (cfg.tile_base < 2 * cfg.outer_unroll)
            throw UnsupportedConfig("tile_base overlaps value/accumulator registers");
    }
}

/// Runs the configured kernel over a chosen subset of column stripes (all of
/// them by default). Stats accumulate on the machine; pass a fresh machine for
/// per-run counters.
template <typename T>
ExecStats run_sparse_on_stripes(VectorMachine<T>& mach, const KernelConfig& cfg,
                                const StructuredSparseMatrix<T>& a, const DenseMatrix<T>& b,
                                DenseMatrix<T>& c_out, const std::vector<int>* stripe_subset) {
    if (is_dense(cfg.algorithm))
        throw UnsupportedConfig("run_sparse_on_stripes: dense algorithm");
    if (a.cols != b.rows())
        throw ShapeError("kernel: a.cols != b.rows");
    if (const auto viols = validate(a); !viols.empty())
        throw ShapeError("kernel: operand A fails validation: " + viols.front().rule);
    validate_kernel_config(cfg, &a);

    auto prob = bind_sparse(mach, a, b, cfg.algorithm == Algorithm::alg3s_fc);
    const auto stripes = make_stripes(prob.cols, mach.config().vl_max);

    std::vector<int> all;
    if (!stripe_subset) {
        all.resize(stripes.size());
        for (std::size_t i = 0; i < stripes.size(); ++i) all[i] = static_cast<int>(i);
        stripe_subset = &all;
    }

    // Strict-shape kernels are checked across every stripe up front so a
    // mismatch never leaves a half-executed stream behind.
    for (int si : *stripe_subset) {
        const Stripe& st = stripes.at(static_cast<std::size_t>(si));
        if (cfg.algorithm == Algorithm::alg5) {
            if (prob.k != cfg.tile_rows)
                throw TileMismatch("alg5: a.cols " + std::to_string(prob.k) +
                                   " != tile_rows " + std::to_string(cfg.tile_rows));
            if (prob.stored > st.width)
                throw UnsupportedConfig("alg5: value row longer than stripe width");
        } else if (cfg.algorithm == Algorithm::alg6) {
            const Index phases = alg6_phase_count(prob.pat, st.width, cfg.tile_rows);
            if (phases == 0)
                throw PhaseMismatch("alg6: (m/n)*(vl/L) is not a positive integer");
            if (prob.k != phases * cfg.tile_rows)
                throw PhaseMismatch("alg6: a.cols != m_phases * tile_rows");
        }
    }

    for (int si : *stripe_subset) {
        const Stripe& st = stripes[static_cast<std::size_t>(si)];
        mach.set_vl(st.width);
        switch (cfg.algorithm) {
            case Algorithm::alg1s:
            case Algorithm::alg2s:
            case Algorithm::alg3s:
                detail::emit_rowwise_stripe(mach, prob, st, cfg.algorithm, 1);
                break;
            case Algorithm::alg3s_unrolled:
            case Algorithm::alg3s_fc:
                detail::emit_rowwise_stripe(mach, prob, st, cfg.algorithm, cfg.outer_unroll);
                break;
            case Algorithm::alg5: {
                VimacPlan plan;
                plan.tile_rows = cfg.tile_rows;
                plan.segments.push_back({0, prob.k, {{0, cfg.tile_rows}}});
                detail::emit_vimac_stripe(mach, prob, st, plan, cfg.tile_base, 1, true);
                break;
            }
            case Algorithm::alg6: {
                const Index phases = alg6_phase_count(prob.pat, st.width, cfg.tile_rows);
                VimacPlan plan;
                plan.tile_rows = cfg.tile_rows;
                TileSegment seg{0, prob.k, {}};
                for (Index kp = 0; kp < prob.k; kp += cfg.tile_rows)
                    seg.phases.push_back({kp, cfg.tile_rows});
                plan.segments.push_back(std::move(seg));
                // A single phase never reloads the tile: prefer the resident-tile
                // order (equivalent to alg5).
                const bool stationary = phases == 1 ? true : cfg.b_stationary;
                detail::emit_vimac_stripe(mach, prob, st, plan, cfg.tile_base, 1, stationary);
                break;
            }
            case Algorithm::alg6_unrolled: {
                const auto plan =
                    plan_vimac_stripe(prob.k, prob.pat, cfg.tile_rows, st.width);
                // A stripe too narrow to feed the configured tile would spend
                // more on per-phase C reloads than the indirect reads save;
                // such tail stripes run the rowwise kernel instead.
                if (plan.tile_rows < cfg.tile_rows)
                    detail::emit_rowwise_stripe(mach, prob, st, Algorithm::alg3s_unrolled,
                                                cfg.outer_unroll);
                else
                    detail::emit_vimac_stripe(mach, prob, st, plan, cfg.tile_base,
                                              cfg.outer_unroll, cfg.b_stationary);
                break;
            }
            default:
                throw UnsupportedConfig("unhandled algorithm");
        }
    }
    c_out = read_back_c(mach, prob.rows, prob.cols);
    return mach.snapshot_stats();
}

template <typename T>
ExecStats run_sparse_kernel(VectorMachine<T>& mach, const KernelConfig& cfg,
                            const StructuredSparseMatrix<T>& a, const DenseMatrix<T>& b,
                            DenseMatrix<T>& c_out) {
    return run_sparse_on_stripes(mach, cfg, a, b, c_out, nullptr);
}

/// Dense row-wise baselines (variants 1-3).
template <typename T>
ExecStats dense_rowwise(VectorMachine<T>& mach, const DenseMatrix<T>& a, const DenseMatrix<T>& b,
                        DenseMatrix<T>& c_out, int variant) {
    if (variant < 1 || variant > 3) throw UnsupportedConfig("dense_rowwise: variant must be 1-3");
    if (a.cols() != b.rows()) throw ShapeError("dense_rowwise: a.cols != b.rows");
    auto prob = bind_dense(mach, a, b);
    const Algorithm alg = variant == 1   ? Algorithm::dense1
                          : variant == 2 ? Algorithm::dense2
                                         : Algorithm::dense3;
    for (const auto& st : make_stripes(prob.cols, mach.config().vl_max)) {
        mach.set_vl(st.width);
        detail::emit_rowwise_stripe(mach, prob, st, alg, 1);
    }
    c_out = read_back_c(mach, prob.rows, prob.cols);
    return mach.snapshot_stats();
}

/// General-shape vindexmac driver (vertical B stripes, A column segments).
template <typename T>
ExecStats tiled_matmul(VectorMachine<T>& mach, const KernelConfig& cfg,
                       const StructuredSparseMatrix<T>& a, const DenseMatrix<T>& b,
                       DenseMatrix<T>& c_out) {
    KernelConfig c = cfg;
    c.algorithm = Algorithm::alg6_unrolled;
    return run_sparse_kernel(mach, c, a, b, c_out);
}

// ---------------------------------------------------------------------------
// Multicore partitioning: B column stripes round-robin across independent
// machines; A and B are mapped into every core's memory, C merges stripe-wise.

template <typename T>
struct MulticoreRun {
    std::vector<ExecStats> per_core;
    std::vector<std::vector<int>> stripes_per_core;
    ExecStats merged_stats;
    DenseMatrix<T> c;
};

template <typename T>
MulticoreRun<T> multicore_run(const MachineConfig& mc, const KernelConfig& cfg,
                              const StructuredSparseMatrix<T>& a, const DenseMatrix<T>& b,
                              int num_cores) {
    if (num_cores < 1) throw UnsupportedConfig("multicore_run: need at least one core");
    const int num_stripes = static_cast<int>(make_stripes(b.cols(), mc.vl_max).size());

    MulticoreRun<T> out;
    out.stripes_per_core.resize(static_cast<std::size_t>(num_cores));
    for (int s = 0; s < num_stripes; ++s)
        out.stripes_per_core[static_cast<std::size_t>(s % num_cores)].push_back(s);

    out.per_core.resize(static_cast<std::size_t>(num_cores));
    std::vector<DenseMatrix<T>> per_core_c(static_cast<std::size_t>(num_cores));
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(num_cores));
    for (int core = 0; core < num_cores; ++core) {
        workers.emplace_back([&, core] {
            VectorMachine<T> mach(mc);
            DenseMatrix<T> c;
            run_sparse_on_stripes(mach, cfg, a, b, c,
                                  &out.stripes_per_core[static_cast<std::size_t>(core)]);
            per_core_c[static_cast<std::size_t>(core)] = std::move(c);
            out.per_core[static_cast<std::size_t>(core)] = mach.snapshot_stats();
        });
    }
    for (auto& t : workers) t.join();

    const auto stripes = make_stripes(b.cols(), mc.vl_max);
    out.c = DenseMatrix<T>::Zero(a.rows, b.cols());
    for (int core = 0; core < num_cores; ++core)
        for (int s : out.stripes_per_core[static_cast<std::size_t>(core)]) {
            const auto& st = stripes[static_cast<std::size_t>(s)];
            out.c.block(0, st.col0, a.rows, st.width) =
                per_core_c[static_cast<std::size_t>(core)].block(0, st.col0, a.rows, st.width);
        }
    for (const auto& s : out.per_core) out.merged_stats += s;
    return out;
}

}  // namespace ssmm
