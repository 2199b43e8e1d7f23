#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <span>
#include <string>

#include "ssmm/kernels.hpp"
#include "ssmm/machine.hpp"

namespace ssmm {

// ---------------------------------------------------------------------------
// Linear cost model over ExecStats.

struct CostWeights {
    std::array<double, kNumOps> op{};
    double element_load = 0.0;
    double element_store = 0.0;
    double line_touch = 0.0;
};

/// Every instruction costs 1, memory terms cost 0: cost == instruction count.
inline CostWeights unit_weights() {
    CostWeights w;
    w.op.fill(1.0);
    return w;
}

/// Traffic-bound profile: instructions still cost 1, touched cache lines
/// dominate.
inline CostWeights memory_weights() {
    CostWeights w;
    w.op.fill(1.0);
    w.line_touch = 16.0;
    return w;
}

inline double cost(const ExecStats& s, const CostWeights& w) {
    double c = 0.0;
    for (int i = 0; i < kNumOps; ++i) c += w.op[static_cast<std::size_t>(i)] * s.ops[static_cast<std::size_t>(i)];
    c += w.element_load * static_cast<double>(s.mem_elements_loaded);
    c += w.element_store * static_cast<double>(s.mem_elements_stored);
    c += w.line_touch * static_cast<double>(s.mem_lines_touched);
    return c;
}

/// Parses "name = weight" lines; '#' starts a comment. Names are the
/// instruction classes plus element_load / element_store / line_touch.
inline CostWeights parse_weights(std::istream& in) {
    CostWeights w = unit_weights();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw FormatError("weights: line " + std::to_string(lineno) + " has no '='");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        double value = 0.0;
        try {
            value = std::stod(trim(line.substr(eq + 1)));
        } catch (const std::exception&) {
            throw FormatError("weights: bad value on line " + std::to_string(lineno));
        }
        if (value < 0) throw FormatError("weights: negative weight on line " + std::to_string(lineno));
        Op o;
        if (parse_op(key, o))
            w.op[static_cast<std::size_t>(o)] = value;
        else if (key == "element_load")
            w.element_load = value;
        else if (key == "element_store")
            w.element_store = value;
        else if (key == "line_touch")
            w.line_touch = value;
        else
            throw FormatError("weights: unknown counter '" + key + "'");
    }
    return w;
}

// ---------------------------------------------------------------------------
// Comparison reports, Fig.-style: ratios are candidate / baseline.

struct ComparisonReport {
    std::string baseline_id;
    std::string candidate_id;
    std::array<double, kNumOps> op_ratio{};
    double memory_access_ratio = 1.0;
    double cost_ratio = 1.0;
};

inline double safe_ratio(double cand, double base) {
    if (base == 0.0) return cand == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return cand / base;
}

inline ComparisonReport compare(const ExecStats& baseline, const ExecStats& candidate,
                                const CostWeights& w, std::string baseline_id = "baseline",
                                std::string candidate_id = "candidate") {
    ComparisonReport r;
    r.baseline_id = std::move(baseline_id);
    r.candidate_id = std::move(candidate_id);
    for (int i = 0; i < kNumOps; ++i)
        r.op_ratio[static_cast<std::size_t>(i)] =
            safe_ratio(static_cast<double>(candidate.ops[static_cast<std::size_t>(i)]),
                       static_cast<double>(baseline.ops[static_cast<std::size_t>(i)]));
    r.memory_access_ratio = safe_ratio(static_cast<double>(candidate.mem_element_accesses()),
                                       static_cast<double>(baseline.mem_element_accesses()));
    r.cost_ratio = safe_ratio(cost(candidate, w), cost(baseline, w));
    return r;
}

inline double geometric_mean(std::span<const double> xs) {
    if (xs.empty()) return 1.0;
    double acc = 0.0;
    for (double x : xs) acc += std::log(x);
    return std::exp(acc / static_cast<double>(xs.size()));
}

// ---------------------------------------------------------------------------
// Closed-form counter predictions, derived from the kernels' loop bounds.
// They serve as an independent oracle for the emitted instruction streams:
// op-class counts and element traffic are exact. Line counts depend on the
// memory layout and are not predicted (left at zero).

namespace detail {

struct Accum {
    ExecStats s;
    void add(Op o, std::uint64_t c) { s.count(o) += c; }
    void load(const char* region, std::uint64_t elements) {
        s.mem_elements_loaded += elements;
        s.region_traffic[region].elements_loaded += elements;
    }
    void store(const char* region, std::uint64_t elements) {
        s.mem_elements_stored += elements;
        s.region_traffic[region].elements_stored += elements;
    }
};

// floor(rows/u) interleaved groups plus one rolled group per leftover row
inline std::uint64_t group_events(std::uint64_t rows, int u) {
    return rows / static_cast<std::uint64_t>(u) + rows % static_cast<std::uint64_t>(u);
}

inline void expect_rowwise_stripe(Accum& a, Algorithm alg, std::uint64_t rows,
                                  std::uint64_t inner_len, int width, int outer) {
    const std::uint64_t w = static_cast<std::uint64_t>(width);
    const std::uint64_t chunks = (inner_len + w - 1) / w;
    const bool partial = inner_len % w != 0;
    const std::uint64_t events = group_events(rows, std::max(1, outer));
    const bool holds_row = alg == Algorithm::dense1 || alg == Algorithm::dense3 ||
                           alg == Algorithm::alg1s || alg == Algorithm::alg3s ||
                           alg == Algorithm::alg3s_unrolled || alg == Algorithm::alg3s_fc;
    const bool dense = is_dense(alg);
    const char* a_region = dense ? "A_dense" : "A_values";
    const std::uint64_t slots = rows * inner_len;

    a.add(Op::vmv_zero, rows);
    a.add(Op::vstore, rows);
    a.store("C", rows * w);
    if (holds_row) {
        a.add(Op::vload, rows * chunks);
        a.load(a_region, slots);
        if (partial) a.add(Op::set_vl, 2 * events);
    }

    switch (alg) {
        case Algorithm::dense1:
            a.add(Op::vload, slots);
            a.add(Op::vmv_x_s, slots);
            a.add(Op::vmacc_vx, slots);
            a.add(Op::vslide1down, slots);
            break;
        case Algorithm::dense2:
            a.add(Op::scalar_load, slots);
            a.load(a_region, slots);
            a.add(Op::vload, slots);
            a.add(Op::vmacc_vx, slots);
            break;
        case Algorithm::dense3:
            a.add(Op::vload, slots);
            a.add(Op::vrgather_vx, slots);
            a.add(Op::vmacc_vv, slots);
            break;
        case Algorithm::alg1s:
            a.add(Op::scalar_load, slots);
            a.load("A_colidx", slots);
            a.add(Op::scalar_alu, slots);
            a.add(Op::vload, slots);
            a.add(Op::vmv_x_s, slots);
            a.add(Op::vmacc_vx, slots);
            a.add(Op::vslide1down, slots);
            break;
        case Algorithm::alg2s:
            a.add(Op::scalar_load, 2 * slots);
            a.load("A_colidx", slots);
            a.load("A_values", slots);
            a.add(Op::scalar_alu, slots);
            a.add(Op::vload, slots);
            a.add(Op::vmacc_vx, slots);
            break;
        case Algorithm::alg3s:
        case Algorithm::alg3s_unrolled:
            a.add(Op::scalar_load, slots);
            a.load("A_colidx", slots);
            a.add(Op::scalar_alu, slots);
            a.add(Op::vload, slots);
            a.add(Op::vrgather_vx, slots);
            a.add(Op::vmacc_vv, slots);
            break;
        case Algorithm::alg3s_fc:
            a.add(Op::scalar_load, slots);
            a.load("A_fc", slots);
            a.add(Op::vload, slots);
            a.add(Op::vrgather_vx, slots);
            a.add(Op::vmacc_vv, slots);
            break;
        default:
            throw UnsupportedConfig("expect_rowwise_stripe: not a row-wise algorithm");
    }
    // B rows are loaded once per slot, width elements each.
    a.load("B", slots * w);
}

inline void expect_vimac_stripe(Accum& a, const VimacPlan& plan, std::uint64_t rows,
                                const SparsityPattern& pat, std::uint64_t stored, int width,
                                int outer, bool b_stationary) {
    const std::uint64_t w = static_cast<std::uint64_t>(width);
    const std::uint64_t events = group_events(rows, std::max(1, outer));
    const std::uint64_t slots = rows * stored;

    std::uint64_t phases = 0, tile_row_loads = 0, seg_count = 0;
    std::uint64_t dance_segments = 0, dance_phases = 0;
    for (const auto& seg : plan.segments) {
        ++seg_count;
        const std::uint64_t q_seg =
            static_cast<std::uint64_t>(seg.k_end - seg.k0) * pat.n / pat.m;
        if (q_seg != w) ++dance_segments;
        for (const auto& ph : seg.phases) {
            ++phases;
            tile_row_loads += static_cast<std::uint64_t>(ph.height);
            if (static_cast<std::uint64_t>(ph.height) * pat.n / pat.m != w) ++dance_phases;
        }
    }

    // slot bodies
    a.add(Op::scalar_load, slots);
    a.load("A_colidx", slots);
    a.add(Op::scalar_alu, slots);
    a.add(Op::vindexmac, slots);
    if (plan.per_slot_values) {
        a.add(Op::vload, slots);
        a.load("A_values", slots);
        a.add(Op::set_vl, 2 * events * stored);
    } else {
        a.add(Op::vslide1down, slots);
    }

    if (!b_stationary) {
        a.add(Op::vload, tile_row_loads * events);           // tiles per row group
        a.load("B", tile_row_loads * events * w);
        a.add(Op::vload, rows);                              // C in
        a.load("C", rows * w);
        a.add(Op::vstore, rows);
        a.store("C", rows * w);
        if (!plan.per_slot_values) {
            a.add(Op::vload, rows * seg_count);              // value slices per segment
            a.load("A_values", slots);
            a.add(Op::set_vl, 2 * events * dance_segments);
        }
    } else {
        a.add(Op::vload, tile_row_loads);                    // each tile once
        a.load("B", tile_row_loads * w);
        a.add(Op::vload, rows * phases);                     // C revisited per phase
        a.load("C", rows * phases * w);
        a.add(Op::vstore, rows * phases);
        a.store("C", rows * phases * w);
        if (!plan.per_slot_values) {
            a.add(Op::vload, rows * phases);                 // value slices per phase
            a.load("A_values", slots);
            a.add(Op::set_vl, 2 * events * dance_phases);
        }
    }
}

}  // namespace detail

/// Predicted counters for one kernel configuration on one problem shape,
/// optionally restricted to a subset of column stripes (multicore cores).
/// Matches the machine's measured op counts and element traffic exactly.
inline ExecStats expected_counts_on_stripes(Index rows, Index k, Index cols,
                                            const SparsityPattern& pat,
                                            const MachineConfig& mc, const KernelConfig& cfg,
                                            const std::vector<int>* stripe_subset) {
    detail::Accum acc;
    const auto stripes = make_stripes(cols, mc.vl_max);
    std::vector<int> all;
    if (!stripe_subset) {
        all.resize(stripes.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        stripe_subset = &all;
    }
    const std::uint64_t r = static_cast<std::uint64_t>(rows);
    const std::uint64_t stored = static_cast<std::uint64_t>(pat.stored_per_row(k));

    for (int si : *stripe_subset) {
        const Stripe& st = stripes.at(static_cast<std::size_t>(si));
        acc.add(Op::set_vl, 1);
        switch (cfg.algorithm) {
            case Algorithm::dense1:
            case Algorithm::dense2:
            case Algorithm::dense3:
                detail::expect_rowwise_stripe(acc, cfg.algorithm, r,
                                              static_cast<std::uint64_t>(k), st.width, 1);
                break;
            case Algorithm::alg1s:
            case Algorithm::alg2s:
            case Algorithm::alg3s:
                detail::expect_rowwise_stripe(acc, cfg.algorithm, r, stored, st.width, 1);
                break;
            case Algorithm::alg3s_unrolled:
            case Algorithm::alg3s_fc:
                detail::expect_rowwise_stripe(acc, cfg.algorithm, r, stored, st.width,
                                              cfg.outer_unroll);
                break;
            case Algorithm::alg5: {
                VimacPlan plan;
                plan.tile_rows = cfg.tile_rows;
                plan.segments.push_back({0, k, {{0, cfg.tile_rows}}});
                detail::expect_vimac_stripe(acc, plan, r, pat, stored, st.width, 1, true);
                break;
            }
            case Algorithm::alg6: {
                const Index phases = alg6_phase_count(pat, st.width, cfg.tile_rows);
                if (phases == 0 || k != phases * cfg.tile_rows)
                    throw UnsupportedConfig("expected_counts: shape does not fit alg6");
                VimacPlan plan;
                plan.tile_rows = cfg.tile_rows;
                TileSegment seg{0, k, {}};
                for (Index kp = 0; kp < k; kp += cfg.tile_rows)
                    seg.phases.push_back({kp, cfg.tile_rows});
                plan.segments.push_back(std::move(seg));
                const bool stationary = phases == 1 ? true : cfg.b_stationary;
                detail::expect_vimac_stripe(acc, plan, r, pat, stored, st.width, 1, stationary);
                break;
            }
            case Algorithm::alg6_unrolled: {
                const auto plan = plan_vimac_stripe(k, pat, cfg.tile_rows, st.width);
                if (plan.tile_rows < cfg.tile_rows)
                    detail::expect_rowwise_stripe(acc, Algorithm::alg3s_unrolled, r, stored,
                                                  st.width, cfg.outer_unroll);
                else
                    detail::expect_vimac_stripe(acc, plan, r, pat, stored, st.width,
                                                cfg.outer_unroll, cfg.b_stationary);
                break;
            }
        }
    }
    return acc.s;
}

inline ExecStats expected_counts(Index rows, Index k, Index cols, const SparsityPattern& pat,
                                 const MachineConfig& mc, const KernelConfig& cfg) {
    return expected_counts_on_stripes(rows, k, cols, pat, mc, cfg, nullptr);
}

}  // namespace ssmm
