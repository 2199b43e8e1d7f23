// ssmm — structured-sparse matrix-multiply simulator CLI.
//
// Subcommands: gen, prune, info, run, bench, multicore. Exit codes:
//   0 success, 1 verification failure, 2 input/format error,
//   3 configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ssmm/io.hpp"
#include "ssmm/runner.hpp"

namespace {

using namespace ssmm;

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

struct SpecFlags {
    std::string workload;
    std::string algorithm = "alg3s";
    std::string pattern = "1:4";
    std::string dtype = "i32";
    std::int64_t rows = 8, k = 16, cols = 16;
    int vl = 16;
    int line_bytes = 64;
    std::vector<int> unroll;
    int tile_rows = 16;
    int tile_base = 16;
    std::string b_stationary = "on";
    std::string verify = "on";
    std::uint64_t seed = 1;
    std::string weights_file;
    std::string trace_file;
    std::string workloads_file;
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f) {
    cmd->add_option("--workload", f.workload, "preset shape name (overrides rows/k/cols)");
    cmd->add_option("--algorithm", f.algorithm,
                    "dense1|dense2|dense3|alg1s|alg2s|alg3s|alg3s_unrolled|alg3s_fc|"
                    "alg5|alg6|alg6_unrolled|spmm16x8|proposed8x4");
    cmd->add_option("--pattern", f.pattern, "sparsity pattern n:m");
    cmd->add_option("--dtype", f.dtype, "i32|f32|f64|i64");
    cmd->add_option("--rows", f.rows, "rows of A");
    cmd->add_option("--k", f.k, "cols of A == rows of B");
    cmd->add_option("--cols", f.cols, "cols of B");
    cmd->add_option("--vl", f.vl, "machine vector length (4|8|16|32)");
    cmd->add_option("--line-bytes", f.line_bytes, "cache line size for traffic counting");
    cmd->add_option("--unroll", f.unroll,
                    "a,b: inner,outer for alg3s_unrolled; outer,mid for alg6_unrolled")
        ->delimiter(',')
        ->expected(0, 2);
    cmd->add_option("--tile-rows", f.tile_rows, "B tile height L (multiple of m)");
    cmd->add_option("--tile-base", f.tile_base, "first vector register of the B tile");
    cmd->add_option("--b-stationary", f.b_stationary, "on|off tile-resident dataflow");
    cmd->add_option("--verify", f.verify, "on|off compare against the reference product");
    cmd->add_option("--seed", f.seed, "generator seed");
    cmd->add_option("--weights", f.weights_file, "cost-weight profile file");
    cmd->add_option("--trace", f.trace_file, "write an instruction trace to this file");
    cmd->add_option("--workloads", f.workloads_file, "workload preset file");
}

std::vector<Workload> load_workloads(const std::string& path) {
    if (path.empty()) return builtin_workloads();
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open workloads file " + path);
    return parse_workloads(f);
}

RunSpec spec_from_flags(const SpecFlags& f) {
    RunSpec spec;
    if (!f.workload.empty()) {
        const auto ws = load_workloads(f.workloads_file);
        const auto* w = find_workload(ws, f.workload);
        if (!w) throw UnsupportedConfig("unknown workload preset '" + f.workload + "'");
        spec.workload = w->name;
        spec.rows = w->rows;
        spec.k = w->k;
        spec.cols = w->cols;
    } else {
        spec.rows = f.rows;
        spec.k = f.k;
        spec.cols = f.cols;
    }
    if (!parse_pattern(f.pattern, spec.pattern))
        throw UnsupportedConfig("bad pattern '" + f.pattern + "'");
    if (!parse_dtype(f.dtype, spec.dtype))
        throw UnsupportedConfig("bad dtype '" + f.dtype + "'");
    spec.vl = f.vl;
    spec.line_bytes = f.line_bytes;
    spec.seed = f.seed;
    spec.verify = f.verify != "off";
    spec.kernel.tile_rows = f.tile_rows;
    spec.kernel.tile_base = f.tile_base;
    spec.kernel.b_stationary = f.b_stationary != "off";
    apply_algorithm_alias(f.algorithm, spec);
    if (!f.unroll.empty()) {
        const int a = f.unroll[0];
        const int b = f.unroll.size() > 1 ? f.unroll[1] : 1;
        if (spec.kernel.algorithm == Algorithm::alg6_unrolled) {
            spec.kernel.outer_unroll = a;
            spec.kernel.mid_unroll = b;
        } else {
            spec.kernel.inner_unroll = a;
            spec.kernel.outer_unroll = b;
        }
    }
    return spec;
}

CostWeights weights_from_flags(const SpecFlags& f) {
    if (f.weights_file.empty()) return unit_weights();
    return load_weights_file(f.weights_file);
}

template <typename T>
DenseMatrix<T> read_dense_any(const std::string& path) {
    if (std::filesystem::path(path).extension() == ".csv") {
        std::ifstream f(path);
        if (!f) throw FormatError("cannot open " + path);
        return read_csv<T>(f);
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open " + path);
    return read_ssdm<T>(f);
}

int cmd_gen(const std::string& out, const SpecFlags& f, bool as_csv, bool sparse) {
    RunSpec spec = spec_from_flags(f);
    return dispatch_dtype(spec.dtype, [&]<typename T>() {
        std::mt19937_64 rng(spec.seed);
        const auto d = random_dense<T>(spec.rows, spec.cols, rng);
        if (sparse) {
            const auto ssm = prune_to_nm(pad_cols_to_multiple(d, spec.pattern.m), spec.pattern);
            std::ofstream o(out, std::ios::binary);
            if (!o) throw FormatError("cannot open " + out);
            write_ssnm(o, ssm);
        } else if (as_csv) {
            std::ofstream o(out);
            if (!o) throw FormatError("cannot open " + out);
            write_csv(o, d);
        } else {
            std::ofstream o(out, std::ios::binary);
            if (!o) throw FormatError("cannot open " + out);
            write_ssdm(o, d);
        }
        std::cout << "wrote " << out << " (" << spec.rows << "x" << spec.cols << " "
                  << dtype_name(spec.dtype) << (sparse ? ", pattern " + spec.pattern.str() : "")
                  << ")\n";
        return kExitOk;
    });
}

int cmd_prune(const std::string& in, const std::string& out, const SpecFlags& f) {
    SparsityPattern pat;
    if (!parse_pattern(f.pattern, pat)) throw UnsupportedConfig("bad pattern " + f.pattern);
    Dtype dt = Dtype::i32;
    if (std::filesystem::path(in).extension() == ".csv") {
        if (!parse_dtype(f.dtype, dt)) throw UnsupportedConfig("bad dtype " + f.dtype);
    } else {
        std::ifstream probe(in, std::ios::binary);
        if (!probe) throw FormatError("cannot open " + in);
        const auto info = probe_matrix_file(probe);
        if (info.sparse) throw FormatError("prune: input is already a sparse file");
        dt = info.dtype;
    }
    return dispatch_dtype(dt, [&]<typename T>() {
        auto d = read_dense_any<T>(in);
        if (d.cols() % pat.m != 0) {
            std::cout << "padding " << d.cols() << " columns to a multiple of " << pat.m << "\n";
            d = pad_cols_to_multiple(d, pat.m);
        }
        const auto ssm = prune_to_nm(d, pat);
        // how much of the input already satisfied the pattern
        const auto roundtrip = decode(ssm);
        std::int64_t changed = 0;
        for (Index i = 0; i < d.rows(); ++i)
            for (Index j = 0; j < d.cols(); ++j)
                if (d(i, j) != roundtrip(i, j)) ++changed;
        const std::int64_t blocks = d.rows() * (d.cols() / pat.m);
        std::ofstream o(out, std::ios::binary);
        if (!o) throw FormatError("cannot open " + out);
        write_ssnm(o, ssm);
        std::cout << "wrote " << out << ": " << ssm.rows << "x" << ssm.cols << " pattern "
                  << pat.str() << ", " << blocks << " blocks, " << changed
                  << " elements zeroed" << (changed == 0 ? " (lossless)" : "") << "\n";
        return kExitOk;
    });
}

int cmd_info(const std::string& in) {
    std::ifstream f(in, std::ios::binary);
    if (!f) throw FormatError("cannot open " + in);
    const auto info = probe_matrix_file(f);
    std::cout << "file: " << in << "\n";
    std::cout << "kind: " << (info.sparse ? "sparse (SSNM)" : "dense (SSDM)") << "\n";
    std::cout << "dtype: " << dtype_name(info.dtype) << "\n";
    std::cout << "shape: " << info.rows << "x" << info.cols << "\n";
    if (!info.sparse) {
        std::cout << "pattern: dense\n";
        return kExitOk;
    }
    std::cout << "pattern: " << info.n << ":" << info.m << "\n";
    std::cout << "density: " << static_cast<double>(info.n) / info.m << "\n";
    return dispatch_dtype(info.dtype, [&]<typename T>() {
        std::ifstream g(in, std::ios::binary);
        const auto ssm = read_ssnm<T>(g);
        std::cout << "full_column_overhead: "
                  << full_column_overhead(ssm, 8 * static_cast<int>(sizeof(T))) << "\n";
        return kExitOk;
    });
}

int cmd_run(const SpecFlags& f, bool as_csv) {
    const RunSpec spec = spec_from_flags(f);
    const CostWeights weights = weights_from_flags(f);
    std::ofstream trace;
    if (!f.trace_file.empty()) {
        trace.open(f.trace_file);
        if (!trace) throw FormatError("cannot open trace file " + f.trace_file);
    }
    if (as_csv) {
        SuiteRow row;
        row.spec = spec;
        const auto result = bench_run({row}, weights);
        std::cout << bench_csv(result);
        return result.rows.front().ok ? kExitOk : kExitVerify;
    }
    const auto out = run_spec(spec, weights, f.trace_file.empty() ? nullptr : &trace);
    std::cout << run_report_json(spec, out).dump(2) << "\n";
    if (out.oracle_ok.has_value() && !*out.oracle_ok) return kExitVerify;
    return kExitOk;
}

int cmd_bench(const std::string& suite_path, const std::string& out_path, const SpecFlags& f) {
    const auto workloads = load_workloads(f.workloads_file);
    std::ifstream sf(suite_path);
    if (!sf) throw FormatError("cannot open suite file " + suite_path);
    const auto suite = parse_suite(sf, workloads);
    const auto result = bench_run(suite, weights_from_flags(f));
    const std::string csv = bench_csv(result);
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        std::ofstream o(out_path);
        if (!o) throw FormatError("cannot open " + out_path);
        o << csv;
        std::cout << "wrote " << out_path << " (" << result.rows.size() << " rows)\n";
        for (const auto& [pat, gm] : result.geomean_cost_ratio)
            std::cout << "geomean cost ratio " << pat << ": " << gm << "\n";
    }
    return kExitOk;
}

int cmd_multicore(const SpecFlags& f, std::vector<int> cores) {
    if (cores.empty()) cores = {1, 2, 4, 8};
    for (int c : cores)
        if (c < 1) throw UnsupportedConfig("core counts must be >= 1");
    const RunSpec spec = spec_from_flags(f);
    const auto rep = multicore_command(spec, cores);
    std::cout << rep.report.dump(2) << "\n";
    return rep.digests_agree ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ssmm: vector-machine simulator for N:M structured-sparse matmul kernels"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file mirroring the flags");

    SpecFlags flags;

    auto* gen = app.add_subcommand("gen", "generate a random matrix file");
    std::string gen_out = "matrix.ssdm";
    bool gen_csv = false, gen_sparse = false;
    add_spec_flags(gen, flags);
    gen->add_option("-o,--output", gen_out, "output path");
    gen->add_flag("--csv", gen_csv, "write CSV instead of SSDM");
    gen->add_flag("--sparse", gen_sparse, "prune to --pattern and write SSNM");

    auto* prune = app.add_subcommand("prune", "prune a dense matrix file to N:M and encode");
    std::string prune_in, prune_out = "matrix.ssnm";
    add_spec_flags(prune, flags);
    prune->add_option("input", prune_in, "dense input (.ssdm or .csv)")->required();
    prune->add_option("-o,--output", prune_out, "output SSNM path");

    auto* info = app.add_subcommand("info", "describe a matrix file");
    std::string info_in;
    info->add_option("input", info_in, "matrix file")->required();

    auto* run = app.add_subcommand("run", "execute one kernel and report counters");
    bool run_json = false, run_csv = false;
    add_spec_flags(run, flags);
    run->add_flag("--json", run_json, "JSON report (default)");
    run->add_flag("--csv", run_csv, "one bench-style CSV row instead of JSON");

    auto* bench = app.add_subcommand("bench", "run a suite file, emit CSV");
    std::string suite_path, bench_out;
    add_spec_flags(bench, flags);
    bench->add_option("suite", suite_path, "suite file")->required();
    bench->add_option("-o,--output", bench_out, "output CSV path (default stdout)");

    auto* multi = app.add_subcommand("multicore", "partition column stripes across cores");
    std::vector<int> cores;
    add_spec_flags(multi, flags);
    multi->add_option("--cores", cores, "core counts to test, e.g. 1,2,4,8")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_out, flags, gen_csv, gen_sparse);
        if (prune->parsed()) return cmd_prune(prune_in, prune_out, flags);
        if (info->parsed()) return cmd_info(info_in);
        if (run->parsed()) return cmd_run(flags, run_csv);
        if (bench->parsed()) return cmd_bench(suite_path, bench_out, flags);
        if (multi->parsed()) return cmd_multicore(flags, cores);
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
