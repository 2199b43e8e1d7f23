#pragma once

#include <json.hpp>

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ssmm/analysis.hpp"
#include "ssmm/io.hpp"
#include "ssmm/kernels.hpp"

namespace ssmm {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Workload presets: synthetic GEMM shapes named after the kind of CNN layer
// they stand in for.

struct Workload {
    std::string name;
    Index rows, k, cols;
};

inline const std::vector<Workload>& builtin_workloads() {
    static const std::vector<Workload> w = {
        {"densenet121-L5-like", 128, 288, 196},  {"densenet121-L23-like", 128, 512, 196},
        {"densenet121-L87-like", 128, 1024, 49}, {"resnet50-L12-like", 64, 576, 196},
        {"resnet50-L45-like", 256, 512, 49},     {"inceptionv3-L33-like", 96, 768, 144},
    };
    return w;
}

inline std::vector<Workload> parse_workloads(std::istream& in) {
    std::vector<Workload> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::stringstream ls(line);
        Workload w;
        if (!(ls >> w.name)) continue;
        if (!(ls >> w.rows >> w.k >> w.cols))
            throw FormatError("workloads: line " + std::to_string(lineno) +
                              " needs: name rows k cols");
        out.push_back(std::move(w));
    }
    return out;
}

inline const Workload* find_workload(const std::vector<Workload>& ws, const std::string& name) {
    for (const auto& w : ws)
        if (w.name == name) return &w;
    return nullptr;
}

// ---------------------------------------------------------------------------
// RunSpec: everything that determines one kernel execution. Identical specs
// produce identical counters and output digests.

struct RunSpec {
    std::string workload;  // informational preset name, may be empty
    Index rows = 8, k = 16, cols = 16;
    SparsityPattern pattern{1, 4};
    Dtype dtype = Dtype::i32;
    int vl = 16;
    int line_bytes = 64;
    KernelConfig kernel;
    std::uint64_t seed = 1;
    bool verify = true;
};

struct RunOutput {
    ExecStats stats;
    double cost_value = 0.0;
    std::optional<bool> oracle_ok;
    std::string digest;
    Index rows = 0, cols = 0;
};

inline std::string fnv1a_digest(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

template <typename T>
std::string matrix_digest(const DenseMatrix<T>& m) {
    return fnv1a_digest(m.data(), static_cast<std::size_t>(m.size()) * sizeof(T));
}

/// Element comparison used for verification: exact for integral scalars,
/// 1e-4 relative (with an absolute floor at magnitude <= 1) for floats.
template <typename T>
bool elements_match(T got, T want) {
    if constexpr (std::is_integral_v<T>) {
        return got == want;
    } else {
        const double g = static_cast<double>(got), e = static_cast<double>(want);
        const double scale = std::max({1.0, std::abs(g), std::abs(e)});
        return std::abs(g - e) <= 1e-4 * scale;
    }
}

template <typename T>
bool matrices_match(const DenseMatrix<T>& got, const DenseMatrix<T>& want) {
    if (got.rows() != want.rows() || got.cols() != want.cols()) return false;
    for (Index i = 0; i < got.rows(); ++i)
        for (Index j = 0; j < got.cols(); ++j)
            if (!elements_match(got(i, j), want(i, j))) return false;
    return true;
}

template <typename T>
MachineConfig machine_config_for(const RunSpec& spec) {
    MachineConfig mc;
    mc.vl_max = spec.vl;
    mc.line_bytes = spec.line_bytes;
    mc.element_bytes = static_cast<int>(sizeof(T));
    return mc;
}

template <typename T>
struct GeneratedProblem {
    DenseMatrix<T> a_dense;                          // dense operand (dense variants)
    std::optional<StructuredSparseMatrix<T>> a;      // sparse operand otherwise
    DenseMatrix<T> b;
};

template <typename T>
GeneratedProblem<T> generate_problem(const RunSpec& spec) {
    if (!is_dense(spec.kernel.algorithm) && spec.k % spec.pattern.m != 0)
        throw ShapeError("runspec: k must be a multiple of pattern m");
    std::mt19937_64 rng(spec.seed);
    GeneratedProblem<T> g;
    g.a_dense = random_dense<T>(spec.rows, spec.k, rng);
    g.b = random_dense<T>(spec.k, spec.cols, rng);
    if (!is_dense(spec.kernel.algorithm)) g.a = prune_to_nm(g.a_dense, spec.pattern);
    return g;
}

template <typename T>
RunOutput run_spec_t(const RunSpec& spec, const CostWeights& weights,
                     std::ostream* trace = nullptr) {
    const auto g = generate_problem<T>(spec);
    VectorMachine<T> mach(machine_config_for<T>(spec));
    if (trace) mach.enable_trace(trace);

    DenseMatrix<T> c;
    ExecStats stats;
    if (is_dense(spec.kernel.algorithm)) {
        const int variant = spec.kernel.algorithm == Algorithm::dense1   ? 1
                            : spec.kernel.algorithm == Algorithm::dense2 ? 2
                                                                         : 3;
        stats = dense_rowwise(mach, g.a_dense, g.b, c, variant);
    } else {
        stats = run_sparse_kernel(mach, spec.kernel, *g.a, g.b, c);
    }

    RunOutput out;
    out.stats = stats;
    out.cost_value = cost(stats, weights);
    out.digest = matrix_digest(c);
    out.rows = c.rows();
    out.cols = c.cols();
    if (spec.verify) {
        const DenseMatrix<T> ref = is_dense(spec.kernel.algorithm)
                                       ? reference_matmul(g.a_dense, g.b)
                                       : reference_matmul(decode(*g.a), g.b);
        out.oracle_ok = matrices_match(c, ref);
    }
    return out;
}

template <typename F>
auto dispatch_dtype(Dtype d, F&& f) {
    switch (d) {
        case Dtype::i32: return f.template operator()<std::int32_t>();
        case Dtype::f32: return f.template operator()<float>();
        case Dtype::f64: return f.template operator()<double>();
        case Dtype::i64: return f.template operator()<std::int64_t>();
    }
    throw UnsupportedConfig("unknown dtype");
}

inline RunOutput run_spec(const RunSpec& spec, const CostWeights& weights,
                          std::ostream* trace = nullptr) {
    return dispatch_dtype(spec.dtype, [&]<typename T>() {
        return run_spec_t<T>(spec, weights, trace);
    });
}

// ---------------------------------------------------------------------------
// JSON report (schema version 1; field names are a stable interface).

inline json spec_json(const RunSpec& spec) {
    json j;
    j["workload"] = spec.workload;
    j["algorithm"] = algorithm_name(spec.kernel.algorithm);
    j["pattern"] = spec.pattern.str();
    j["dtype"] = dtype_name(spec.dtype);
    j["rows"] = spec.rows;
    j["k"] = spec.k;
    j["cols"] = spec.cols;
    j["vl"] = spec.vl;
    j["line_bytes"] = spec.line_bytes;
    j["inner_unroll"] = spec.kernel.inner_unroll;
    j["outer_unroll"] = spec.kernel.outer_unroll;
    j["mid_unroll"] = spec.kernel.mid_unroll;
    j["tile_rows"] = spec.kernel.tile_rows;
    j["tile_base"] = spec.kernel.tile_base;
    j["b_stationary"] = spec.kernel.b_stationary;
    j["seed"] = spec.seed;
    j["verify"] = spec.verify;
    return j;
}

inline json stats_json(const ExecStats& s) {
    json j;
    for (int i = 0; i < kNumOps; ++i)
        j[op_name(static_cast<Op>(i))] = s.ops[static_cast<std::size_t>(i)];
    j["total_instructions"] = s.total_instructions();
    return j;
}

inline json mem_json(const ExecStats& s) {
    json j;
    j["elements_loaded"] = s.mem_elements_loaded;
    j["elements_stored"] = s.mem_elements_stored;
    j["element_accesses"] = s.mem_element_accesses();
    j["lines_touched"] = s.mem_lines_touched;
    json regions;
    for (const auto& [name, t] : s.region_traffic) {
        regions[name] = {{"loaded", t.elements_loaded}, {"stored", t.elements_stored}};
    }
    j["regions"] = regions;
    return j;
}

inline json run_report_json(const RunSpec& spec, const RunOutput& out) {
    json j;
    j["schema"] = 1;
    j["spec"] = spec_json(spec);
    j["stats"] = stats_json(out.stats);
    j["mem"] = mem_json(out.stats);
    j["cost"] = out.cost_value;
    if (out.oracle_ok.has_value())
        j["oracle_ok"] = *out.oracle_ok;
    else
        j["oracle_ok"] = nullptr;
    j["output_digest"] = out.digest;
    return j;
}

// ---------------------------------------------------------------------------
// Bench suites. A suite file holds one run per line as key=value tokens;
// `inner`, `outer` and `mid` accept lo..hi ranges which expand to a grid.
// Rows with role=baseline anchor the ratio for rows of the same group.

struct SuiteRow {
    RunSpec spec;
    std::string role;   // "baseline", "candidate", or empty
    std::string group;  // ratio-pairing key
};

inline void apply_algorithm_alias(const std::string& value, RunSpec& spec) {
    if (value == "spmm16x8") {
        spec.kernel.algorithm = Algorithm::alg3s_unrolled;
        spec.kernel.inner_unroll = 16;
        spec.kernel.outer_unroll = 8;
    } else if (value == "proposed8x4") {
        spec.kernel.algorithm = Algorithm::alg6_unrolled;
        spec.kernel.outer_unroll = 8;
        spec.kernel.mid_unroll = 4;
    } else if (!parse_algorithm(value, spec.kernel.algorithm)) {
        throw FormatError("suite: unknown algorithm '" + value + "'");
    }
}

inline std::vector<SuiteRow> parse_suite(std::istream& in,
                                         const std::vector<Workload>& workloads) {
    std::vector<SuiteRow> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::stringstream ls(line);
        std::string tok;
        SuiteRow row;
        struct Range {
            int lo = 1, hi = 1;
            bool given = false;
        };
        Range inner, outer, mid;
        bool any = false;
        const auto parse_range = [lineno](const std::string& v) {
            Range r;
            r.given = true;
            const auto dots = v.find("..");
            try {
                if (dots == std::string::npos) {
                    r.lo = r.hi = std::stoi(v);
                } else {
                    r.lo = std::stoi(v.substr(0, dots));
                    r.hi = std::stoi(v.substr(dots + 2));
                }
            } catch (const std::exception&) {
                throw FormatError("suite: bad range on line " + std::to_string(lineno));
            }
            return r;
        };
        while (ls >> tok) {
            any = true;
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw FormatError("suite: token '" + tok + "' on line " +
                                  std::to_string(lineno) + " is not key=value");
            const std::string key = tok.substr(0, eq);
            const std::string value = tok.substr(eq + 1);
            if (key == "workload") {
                const auto* w = find_workload(workloads, value);
                if (!w) throw FormatError("suite: unknown workload '" + value + "'");
                row.spec.workload = w->name;
                row.spec.rows = w->rows;
                row.spec.k = w->k;
                row.spec.cols = w->cols;
            } else if (key == "rows") {
                row.spec.rows = std::stoll(value);
            } else if (key == "k") {
                row.spec.k = std::stoll(value);
            } else if (key == "cols") {
                row.spec.cols = std::stoll(value);
            } else if (key == "pattern") {
                if (!parse_pattern(value, row.spec.pattern))
                    throw FormatError("suite: bad pattern '" + value + "'");
            } else if (key == "dtype") {
                if (!parse_dtype(value, row.spec.dtype))
                    throw FormatError("suite: bad dtype '" + value + "'");
            } else if (key == "algorithm") {
                apply_algorithm_alias(value, row.spec);
            } else if (key == "inner") {
                inner = parse_range(value);
            } else if (key == "outer") {
                outer = parse_range(value);
            } else if (key == "mid") {
                mid = parse_range(value);
            } else if (key == "tile_rows") {
                row.spec.kernel.tile_rows = std::stoi(value);
            } else if (key == "tile_base") {
                row.spec.kernel.tile_base = std::stoi(value);
            } else if (key == "b_stationary") {
                row.spec.kernel.b_stationary = value == "on" || value == "true" || value == "1";
            } else if (key == "vl") {
                row.spec.vl = std::stoi(value);
            } else if (key == "seed") {
                row.spec.seed = std::stoull(value);
            } else if (key == "verify") {
                row.spec.verify = value == "on" || value == "true" || value == "1";
            } else if (key == "role") {
                row.role = value;
            } else if (key == "group") {
                row.group = value;
            } else {
                throw FormatError("suite: unknown key '" + key + "' on line " +
                                  std::to_string(lineno));
            }
        }
        if (!any) continue;
        if (!inner.given) inner = {row.spec.kernel.inner_unroll, row.spec.kernel.inner_unroll, true};
        if (!outer.given) outer = {row.spec.kernel.outer_unroll, row.spec.kernel.outer_unroll, true};
        if (!mid.given) mid = {row.spec.kernel.mid_unroll, row.spec.kernel.mid_unroll, true};
        for (int iu = inner.lo; iu <= inner.hi; ++iu)
            for (int ou = outer.lo; ou <= outer.hi; ++ou)
                for (int mu = mid.lo; mu <= mid.hi; ++mu) {
                    SuiteRow r = row;
                    r.spec.kernel.inner_unroll = iu;
                    r.spec.kernel.outer_unroll = ou;
                    r.spec.kernel.mid_unroll = mu;
                    rows.push_back(std::move(r));
                }
    }
    return rows;
}

struct BenchRowResult {
    SuiteRow row;
    bool ok = false;
    std::string error;
    ExecStats stats;
    double cost_value = 0.0;
    double cost_ratio = 0.0;  // 0 when no baseline applies
    double mem_ratio = 0.0;
};

struct BenchResult {
    std::vector<BenchRowResult> rows;
    // pattern string -> geometric mean of candidate/baseline cost ratios
    std::vector<std::pair<std::string, double>> geomean_cost_ratio;
};

inline BenchResult bench_run(const std::vector<SuiteRow>& suite, const CostWeights& weights) {
    BenchResult result;
    result.rows.reserve(suite.size());
    for (const auto& row : suite) {
        BenchRowResult r;
        r.row = row;
        try {
            const auto out = run_spec(row.spec, weights);
            r.stats = out.stats;
            r.cost_value = out.cost_value;
            r.ok = !out.oracle_ok.has_value() || *out.oracle_ok;
            if (out.oracle_ok.has_value() && !*out.oracle_ok) r.error = "oracle mismatch";
        } catch (const std::exception& e) {
            r.ok = false;
            r.error = e.what();
        }
        result.rows.push_back(std::move(r));
    }
    // ratios vs the baseline row of the same group
    std::vector<std::pair<std::string, std::vector<double>>> by_pattern;
    for (auto& r : result.rows) {
        if (!r.ok || r.row.group.empty() || r.row.role == "baseline") continue;
        for (const auto& base : result.rows) {
            if (!base.ok || base.row.group != r.row.group || base.row.role != "baseline")
                continue;
            r.cost_ratio = safe_ratio(r.cost_value, base.cost_value);
            r.mem_ratio = safe_ratio(static_cast<double>(r.stats.mem_element_accesses()),
                                     static_cast<double>(base.stats.mem_element_accesses()));
            const std::string pat = r.row.spec.pattern.str();
            bool found = false;
            for (auto& [p, v] : by_pattern)
                if (p == pat) {
                    v.push_back(r.cost_ratio);
                    found = true;
                }
            if (!found) by_pattern.push_back({pat, {r.cost_ratio}});
            break;
        }
    }
    for (const auto& [p, v] : by_pattern)
        result.geomean_cost_ratio.push_back({p, geometric_mean(v)});
    return result;
}

inline std::string bench_csv(const BenchResult& result) {
    std::ostringstream os;
    os << "workload,pattern,dtype,algorithm,inner,outer,mid,tile_rows,b_stationary,vl,seed,"
          "status";
    for (int i = 0; i < kNumOps; ++i) os << ',' << op_name(static_cast<Op>(i));
    os << ",total_instructions,mem_elements_loaded,mem_elements_stored,mem_lines_touched,"
          "cost,cost_ratio_vs_baseline,mem_ratio_vs_baseline\n";
    const auto emit_ratio = [&os](double v) {
        if (v > 0.0)
            os << ',' << v;
        else
            os << ',';
    };
    for (const auto& r : result.rows) {
        const auto& s = r.row.spec;
        os << (s.workload.empty() ? "custom" : s.workload) << ',' << s.pattern.str() << ','
           << dtype_name(s.dtype) << ',' << algorithm_name(s.kernel.algorithm) << ','
           << s.kernel.inner_unroll << ',' << s.kernel.outer_unroll << ','
           << s.kernel.mid_unroll << ',' << s.kernel.tile_rows << ','
           << (s.kernel.b_stationary ? "on" : "off") << ',' << s.vl << ',' << s.seed << ','
           << (r.ok ? "ok" : ("error: " + r.error));
        for (int i = 0; i < kNumOps; ++i) os << ',' << r.stats.ops[static_cast<std::size_t>(i)];
        os << ',' << r.stats.total_instructions() << ',' << r.stats.mem_elements_loaded << ','
           << r.stats.mem_elements_stored << ',' << r.stats.mem_lines_touched << ','
           << r.cost_value;
        emit_ratio(r.cost_ratio);
        emit_ratio(r.mem_ratio);
        os << '\n';
    }
    for (const auto& [pat, gm] : result.geomean_cost_ratio) {
        os << "geomean," << pat << ",,,,,,,,,,ok";
        for (int i = 0; i < kNumOps; ++i) os << ',';
        os << ",,,,," << gm << ",\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Multicore command: run one spec across several core counts, check that the
// merged output never depends on the partition.

struct MulticoreReport {
    json report;
    bool digests_agree = true;
};

inline MulticoreReport multicore_command(const RunSpec& spec, const std::vector<int>& cores) {
    MulticoreReport rep;
    json runs = json::array();
    std::string first_digest;
    dispatch_dtype(spec.dtype, [&]<typename T>() {
        const auto g = generate_problem<T>(spec);
        if (!g.a) throw UnsupportedConfig("multicore: dense algorithms are single-core only");
        MachineConfig mc = machine_config_for<T>(spec);
        for (int n : cores) {
            const auto run = multicore_run<T>(mc, spec.kernel, *g.a, g.b, n);
            const std::string digest = matrix_digest(run.c);
            if (first_digest.empty())
                first_digest = digest;
            else if (digest != first_digest)
                rep.digests_agree = false;
            json jc;
            jc["cores"] = n;
            jc["merged_digest"] = digest;
            jc["merged_stats"] = stats_json(run.merged_stats);
            jc["merged_mem"] = mem_json(run.merged_stats);
            json per_core = json::array();
            for (std::size_t c = 0; c < run.per_core.size(); ++c) {
                json pc;
                pc["core"] = c;
                pc["stripes"] = run.stripes_per_core[c].size();
                pc["total_instructions"] = run.per_core[c].total_instructions();
                pc["mem_element_accesses"] = run.per_core[c].mem_element_accesses();
                const auto it = run.per_core[c].region_traffic.find("A_values");
                pc["a_value_elements_loaded"] =
                    it == run.per_core[c].region_traffic.end() ? 0 : it->second.elements_loaded;
                per_core.push_back(std::move(pc));
            }
            jc["per_core"] = std::move(per_core);
            runs.push_back(std::move(jc));
        }
        return 0;
    });
    rep.report["schema"] = 1;
    rep.report["spec"] = spec_json(spec);
    rep.report["runs"] = std::move(runs);
    rep.report["digests_agree"] = rep.digests_agree;
    return rep;
}

}  // namespace ssmm
