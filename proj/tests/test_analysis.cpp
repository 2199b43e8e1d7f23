#include <doctest.h>

#include <random>
#include <sstream>

#include "ssmm/analysis.hpp"

using namespace ssmm;

namespace {

struct Case {
    Index rows, k, cols;
    SparsityPattern pat;
    int vl;
    KernelConfig cfg;
};

ExecStats measured(const Case& c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto b = random_dense<int>(c.k, c.cols, rng);
    MachineConfig mc;
    mc.vl_max = c.vl;
    VectorMachine<int> mach(mc);
    DenseMatrix<int> out;
    if (is_dense(c.cfg.algorithm)) {
        const auto a = random_dense<int>(c.rows, c.k, rng);
        const int variant = c.cfg.algorithm == Algorithm::dense1   ? 1
                            : c.cfg.algorithm == Algorithm::dense2 ? 2
                                                                   : 3;
        return dense_rowwise(mach, a, b, out, variant);
    }
    const auto a = prune_to_nm(random_dense<int>(c.rows, c.k, rng), c.pat);
    return run_sparse_kernel(mach, c.cfg, a, b, out);
}

bool stats_match(const ExecStats& got, const ExecStats& want) {
    if (!got.counters_equal(want)) return false;
    for (const auto& [name, t] : want.region_traffic) {
        const auto it = got.region_traffic.find(name);
        const std::uint64_t gl = it == got.region_traffic.end() ? 0 : it->second.elements_loaded;
        const std::uint64_t gs = it == got.region_traffic.end() ? 0 : it->second.elements_stored;
        if (gl != t.elements_loaded || gs != t.elements_stored) return false;
    }
    return true;
}

KernelConfig kc(Algorithm a, int inner = 1, int outer = 1, bool b_stat = true, int L = 16) {
    KernelConfig c;
    c.algorithm = a;
    c.inner_unroll = inner;
    c.outer_unroll = outer;
    c.b_stationary = b_stat;
    c.tile_rows = L;
    return c;
}

}  // namespace

TEST_CASE("cost model basics") {
    ExecStats s;
    const auto w = unit_weights();
    CHECK(cost(s, w) == 0.0);
    s.count(Op::vload) = 3;
    s.count(Op::vmacc_vv) = 2;
    s.mem_elements_loaded = 100;
    CHECK(cost(s, w) == doctest::Approx(5.0));
    CHECK(cost(s, w) == doctest::Approx(static_cast<double>(s.total_instructions())));

    SUBCASE("monotone in added instructions") {
        ExecStats more = s;
        more.count(Op::set_vl) += 7;
        CHECK(cost(more, w) >= cost(s, w));
    }
    SUBCASE("linear in stats") {
        ExecStats t;
        t.count(Op::vstore) = 5;
        t.mem_elements_stored = 9;
        CostWeights mw = memory_weights();
        t.mem_lines_touched = 4;
        ExecStats sum = s + t;
        CHECK(cost(sum, mw) == doctest::Approx(cost(s, mw) + cost(t, mw)));
    }
    SUBCASE("memory profile weighs lines") {
        ExecStats t;
        t.mem_lines_touched = 2;
        CHECK(cost(t, memory_weights()) == doctest::Approx(32.0));
    }
}

TEST_CASE("weights parsing") {
    std::istringstream good("vload = 2\nscalar_alu = 0.5\nline_touch = 8 # heavy\n");
    const auto w = parse_weights(good);
    CHECK(w.op[static_cast<size_t>(Op::vload)] == doctest::Approx(2.0));
    CHECK(w.op[static_cast<size_t>(Op::scalar_alu)] == doctest::Approx(0.5));
    CHECK(w.op[static_cast<size_t>(Op::vstore)] == doctest::Approx(1.0));  // untouched default
    CHECK(w.line_touch == doctest::Approx(8.0));

    std::istringstream unknown("bogus = 1\n");
    CHECK_THROWS_AS(parse_weights(unknown), FormatError);
    std::istringstream negative("vload = -1\n");
    CHECK_THROWS_AS(parse_weights(negative), FormatError);
}

TEST_CASE("compare ratios") {
    ExecStats a;
    a.count(Op::vload) = 10;
    a.mem_elements_loaded = 50;
    a.mem_elements_stored = 10;
    ExecStats b;
    b.count(Op::vload) = 5;
    b.mem_elements_loaded = 20;
    b.mem_elements_stored = 10;

    const auto w = unit_weights();
    const auto same = compare(a, a, w);
    CHECK(same.cost_ratio == doctest::Approx(1.0));
    CHECK(same.memory_access_ratio == doctest::Approx(1.0));

    const auto r = compare(a, b, w);
    CHECK(r.cost_ratio == doctest::Approx(0.5));
    CHECK(r.memory_access_ratio == doctest::Approx(0.5));
    const auto rinv = compare(b, a, w);
    CHECK(r.cost_ratio * rinv.cost_ratio == doctest::Approx(1.0));
    CHECK(r.memory_access_ratio * rinv.memory_access_ratio == doctest::Approx(1.0));
}

TEST_CASE("geometric mean") {
    const double xs[] = {0.5, 2.0};
    CHECK(geometric_mean(xs) == doctest::Approx(1.0));
    const double ys[] = {4.0, 4.0, 4.0};
    CHECK(geometric_mean(ys) == doctest::Approx(4.0));
    CHECK(geometric_mean({}) == doctest::Approx(1.0));
}

TEST_CASE("expected_counts matches measured counters exactly") {
    std::vector<Case> grid;
    // row-wise family across shapes, stripes and tails
    for (const auto alg : {Algorithm::dense1, Algorithm::dense2, Algorithm::dense3}) {
        grid.push_back({6, 13, 19, {1, 4}, 8, kc(alg)});
        grid.push_back({4, 8, 8, {1, 4}, 16, kc(alg)});
    }
    for (const auto alg : {Algorithm::alg1s, Algorithm::alg2s, Algorithm::alg3s,
                           Algorithm::alg3s_fc}) {
        grid.push_back({8, 16, 8, {1, 4}, 16, kc(alg)});
        grid.push_back({7, 24, 19, {2, 4}, 8, kc(alg)});
    }
    // unrolled row-wise
    grid.push_back({13, 32, 24, {2, 4}, 8, kc(Algorithm::alg3s_unrolled, 4, 4)});
    grid.push_back({64, 64, 16, {1, 4}, 16, kc(Algorithm::alg3s_unrolled, 16, 8)});
    // vindexmac family
    grid.push_back({8, 16, 16, {1, 4}, 16, kc(Algorithm::alg5, 1, 1, true, 16)});
    grid.push_back({5, 8, 10, {2, 4}, 16, kc(Algorithm::alg5, 1, 1, true, 8)});
    grid.push_back({8, 64, 16, {1, 4}, 16, kc(Algorithm::alg6, 1, 1, false)});
    grid.push_back({8, 64, 16, {1, 4}, 16, kc(Algorithm::alg6, 1, 1, true)});
    grid.push_back({6, 16, 4, {1, 4}, 4, kc(Algorithm::alg6)});
    grid.push_back({16, 64, 16, {1, 4}, 16, kc(Algorithm::alg6_unrolled, 1, 8, false)});
    grid.push_back({128, 128, 16, {1, 4}, 16, kc(Algorithm::alg6_unrolled, 1, 8, true)});
    grid.push_back({128, 128, 16, {2, 4}, 16, kc(Algorithm::alg6_unrolled, 1, 8, true)});
    grid.push_back({37, 64, 23, {1, 4}, 16, kc(Algorithm::alg6_unrolled, 1, 4, true)});
    grid.push_back({37, 64, 23, {1, 4}, 16, kc(Algorithm::alg6_unrolled, 1, 4, false)});
    grid.push_back({9, 48, 13, {3, 4}, 16, kc(Algorithm::alg6_unrolled, 1, 2, true, 8)});
    grid.push_back({5, 16, 1, {2, 4}, 16, kc(Algorithm::alg6_unrolled)});  // narrow: rowwise fallback
    grid.push_back({5, 16, 1, {2, 4}, 16, kc(Algorithm::alg6_unrolled, 1, 1, true, 4)});  // per-slot values
    grid.push_back({5, 16, 1, {2, 4}, 16, kc(Algorithm::alg6_unrolled, 1, 1, false, 4)});
    grid.push_back({0, 16, 8, {1, 4}, 8, kc(Algorithm::alg3s)});           // zero rows

    std::uint64_t seed = 900;
    for (const auto& c : grid) {
        CAPTURE(algorithm_name(c.cfg.algorithm));
        CAPTURE(c.rows);
        CAPTURE(c.k);
        CAPTURE(c.cols);
        CAPTURE(c.vl);
        MachineConfig mc;
        mc.vl_max = c.vl;
        const auto want = expected_counts(c.rows, c.k, c.cols, c.pat, mc, c.cfg);
        const auto got = measured(c, seed++);
        CHECK(stats_match(got, want));
        CHECK(got.total_instructions() == want.total_instructions());
    }
}

TEST_CASE("expected_counts fixed values") {
    MachineConfig mc;
    mc.vl_max = 8;
    SUBCASE("alg3s 8x16 (1:4), one 8-wide stripe: 32 B-row vloads") {
        const auto s = expected_counts(8, 16, 8, {1, 4}, mc, kc(Algorithm::alg3s));
        // B vloads = rows * stored; plus one values chunk per row
        CHECK(s.region_traffic.at("B").elements_loaded == 32ull * 8);
        CHECK(s.count(Op::vload) == 32 + 8);
        CHECK(s.count(Op::scalar_alu) == 32);
    }
    SUBCASE("alg5 preloads L rows once, any row count") {
        MachineConfig m16;
        m16.vl_max = 16;
        for (Index rows : {1, 8, 64}) {
            const auto s =
                expected_counts(rows, 16, 16, {1, 4}, m16, kc(Algorithm::alg5, 1, 1, true, 16));
            CHECK(s.region_traffic.at("B").elements_loaded == 16ull * 16);
        }
    }
    SUBCASE("zero-row A has no kernel-body counts") {
        const auto s = expected_counts(0, 16, 8, {1, 4}, mc, kc(Algorithm::alg3s));
        CHECK(s.count(Op::set_vl) == 1);
        CHECK(s.total_instructions() == 1);
        CHECK(s.mem_element_accesses() == 0);
    }
}

TEST_CASE("expected_counts per-core subsets compose to the whole") {
    MachineConfig mc;
    mc.vl_max = 16;
    const auto cfg = kc(Algorithm::alg6_unrolled, 1, 4, true);
    const std::vector<int> as{0, 2}, bs{1, 3};
    const auto sa = expected_counts_on_stripes(12, 32, 64, {2, 4}, mc, cfg, &as);
    const auto sb = expected_counts_on_stripes(12, 32, 64, {2, 4}, mc, cfg, &bs);
    const auto whole = expected_counts(12, 32, 64, {2, 4}, mc, cfg);
    CHECK((sa + sb).counters_equal(whole));
}
