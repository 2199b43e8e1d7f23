#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssmm/dense.hpp"
#include "ssmm/types.hpp"

namespace ssmm {

// Instruction classes counted by the machine. Every executor bumps exactly
// one of these.
enum class Op : int {
    vload = 0,
    vstore,
    scalar_load,
    vmacc_vx,
    vmacc_vv,
    vrgather_vx,
    vslide1down,
    vmv_x_s,
    vmv_zero,
    vindexmac,
    scalar_alu,
    set_vl,
    count_,
};

inline constexpr int kNumOps = static_cast<int>(Op::count_);

inline const char* op_name(Op o) {
    static constexpr const char* names[kNumOps] = {
        "vload",       "vstore",  "scalar_load", "vmacc_vx",  "vmacc_vv", "vrgather_vx",
        "vslide1down", "vmv_x_s", "vmv_zero",    "vindexmac", "scalar_alu", "set_vl"};
    return names[static_cast<int>(o)];
}

inline bool parse_op(std::string_view s, Op& out) {
    for (int i = 0; i < kNumOps; ++i)
        if (s == op_name(static_cast<Op>(i))) {
            out = static_cast<Op>(i);
            return true;
        }
    return false;
}

struct RegionTraffic {
    std::uint64_t elements_loaded = 0;
    std::uint64_t elements_stored = 0;
};

struct ExecStats {
    std::array<std::uint64_t, kNumOps> ops{};
    std::uint64_t mem_elements_loaded = 0;
    std::uint64_t mem_elements_stored = 0;
    std::uint64_t mem_lines_touched = 0;  // per-instruction spanned lines, not a distinct set
    std::uint64_t alias_hazards = 0;
    std::map<std::string, RegionTraffic> region_traffic;

    std::uint64_t count(Op o) const { return ops[static_cast<int>(o)]; }
    std::uint64_t& count(Op o) { return ops[static_cast<int>(o)]; }

    std::uint64_t total_instructions() const {
        std::uint64_t t = 0;
        for (auto c : ops) t += c;
        return t;
    }
    std::uint64_t mem_element_accesses() const {
        return mem_elements_loaded + mem_elements_stored;
    }

    ExecStats& operator+=(const ExecStats& o) {
        for (int i = 0; i < kNumOps; ++i) ops[i] += o.ops[i];
        mem_elements_loaded += o.mem_elements_loaded;
        mem_elements_stored += o.mem_elements_stored;
        mem_lines_touched += o.mem_lines_touched;
        alias_hazards += o.alias_hazards;
        for (const auto& [name, t] : o.region_traffic) {
            region_traffic[name].elements_loaded += t.elements_loaded;
            region_traffic[name].elements_stored += t.elements_stored;
        }
        return *this;
    }
    friend ExecStats operator+(ExecStats a, const ExecStats& b) { return a += b; }

    bool counters_equal(const ExecStats& o) const {
        return ops == o.ops && mem_elements_loaded == o.mem_elements_loaded &&
               mem_elements_stored == o.mem_elements_stored;
    }
};

struct MachineConfig {
    int vl_max = 16;
    int num_vregs = 32;   // fixed by the ISA
    int line_bytes = 64;
    int element_bytes = 4;
};

/// Functional model of a decoupled vector engine: 32-entry vector register
/// file, integer scalar slots plus a separate scalar-value slot class, a flat
/// word-addressed memory with named regions, one active vector length, and
/// exact statistics counters. Single-owner mutable state; independent
/// instances are safe on separate threads.
template <typename T>
class VectorMachine {
public:
    explicit VectorMachine(const MachineConfig& cfg) : cfg_(cfg) {
        if (cfg.num_vregs != 32)
            throw UnsupportedConfig("machine: num_vregs is fixed at 32");
        if (cfg.vl_max != 4 && cfg.vl_max != 8 && cfg.vl_max != 16 && cfg.vl_max != 32)
            throw UnsupportedConfig("machine: vl_max must be one of 4, 8, 16, 32");
        if (cfg.line_bytes <= 0 || cfg.element_bytes <= 0)
            throw UnsupportedConfig("machine: line_bytes and element_bytes must be positive");
        vrf_ = DenseMatrix<T>::Zero(cfg.num_vregs, cfg.vl_max);
        srf_.fill(0);
        sval_.fill(T(0));
        vl_ = cfg.vl_max;
    }

    const MachineConfig& config() const { return cfg_; }
    int vl() const { return vl_; }

    // ---- memory regions (host-side setup, not counted) ----

    std::size_t map_region(const std::string& name, std::span<const T> data) {
        const std::size_t base = mem_.size();
        mem_.insert(mem_.end(), data.begin(), data.end());
        regions_.push_back({name, base, data.size()});
        return base;
    }

    std::size_t alloc_region(const std::string& name, std::size_t len) {
        const std::size_t base = mem_.size();
        mem_.resize(mem_.size() + len, T(0));
        regions_.push_back({name, base, len});
        return base;
    }

    std::span<const T> region(std::string_view name) const {
        for (const auto& r : regions_)
            if (r.name == name) return {mem_.data() + r.base, r.len};
        throw OutOfBounds("machine: unknown region " + std::string(name));
    }

    // ---- executors ----

    int set_vl(int requested) {
        if (requested < 1) throw UnsupportedConfig("set_vl: requested length must be >= 1");
        vl_ = std::min(requested, cfg_.vl_max);
        bump(Op::set_vl);
        trace(Op::set_vl, "req=" + std::to_string(requested));
        return vl_;
    }

    void vload(int vd, std::size_t addr) {
        check_vreg(vd);
        const auto& r = containing_region(addr, vl_);
        for (int i = 0; i < vl_; ++i) vrf_(vd, i) = mem_[addr + i];
        bump(Op::vload);
        stats_.mem_elements_loaded += vl_;
        stats_.mem_lines_touched += lines_spanned(addr, vl_);
        stats_.region_traffic[r.name].elements_loaded += vl_;
        trace(Op::vload, "vd=" + std::to_string(vd) + " addr=" + std::to_string(addr));
    }

    void vstore(int vs, std::size_t addr) {
        check_vreg(vs);
        const auto& r = containing_region(addr, vl_);
        for (int i = 0; i < vl_; ++i) mem_[addr + i] = vrf_(vs, i);
        bump(Op::vstore);
        stats_.mem_elements_stored += vl_;
        stats_.mem_lines_touched += lines_spanned(addr, vl_);
        stats_.region_traffic[r.name].elements_stored += vl_;
        trace(Op::vstore, "vs=" + std::to_string(vs) + " addr=" + std::to_string(addr));
    }

    /// Scalar load into the integer slot file (column indexes).
    void load_scalar(int rd, std::size_t addr) {
        check_sreg(rd);
        const auto& r = containing_region(addr, 1);
        srf_[rd] = static_cast<std::int64_t>(mem_[addr]);
        bump(Op::scalar_load);
        stats_.mem_elements_loaded += 1;
        stats_.mem_lines_touched += lines_spanned(addr, 1);
        stats_.region_traffic[r.name].elements_loaded += 1;
        trace(Op::scalar_load, "rd=" + std::to_string(rd) + " addr=" + std::to_string(addr));
    }

    /// Scalar load into the value slot file (matrix elements held scalar-side).
    void load_scalar_value(int rd, std::size_t addr) {
        check_sreg(rd);
        const auto& r = containing_region(addr, 1);
        sval_[rd] = mem_[addr];
        bump(Op::scalar_load);
        stats_.mem_elements_loaded += 1;
        stats_.mem_lines_touched += lines_spanned(addr, 1);
        stats_.region_traffic[r.name].elements_loaded += 1;
        trace(Op::scalar_load, "rd=" + std::to_string(rd) + " addr=" + std::to_string(addr) +
                                   " value");
    }

    /// One index-arithmetic step: srf[rd] = srf[rs] + imm.
    void salu_addi(int rd, int rs, std::int64_t imm) {
        check_sreg(rd);
        check_sreg(rs);
        srf_[rd] = srf_[rs] + imm;
        bump(Op::scalar_alu);
        trace(Op::scalar_alu, "rd=" + std::to_string(rd) + " rs=" + std::to_string(rs) +
                                  " imm=" + std::to_string(imm));
    }

    void vmacc_vx(int vd, int rs, int vs) {
        check_vreg(vd);
        check_sreg(rs);
        check_vreg(vs);
        for (int i = 0; i < vl_; ++i) vrf_(vd, i) += sval_[rs] * vrf_(vs, i);
        bump(Op::vmacc_vx);
        trace(Op::vmacc_vx, "vd=" + std::to_string(vd) + " rs=" + std::to_string(rs) +
                                " vs=" + std::to_string(vs));
    }

    void vmacc_vv(int vd, int va, int vb) {
        check_vreg(vd);
        check_vreg(va);
        check_vreg(vb);
        for (int i = 0; i < vl_; ++i) vrf_(vd, i) += vrf_(va, i) * vrf_(vb, i);
        bump(Op::vmacc_vv);
        trace(Op::vmacc_vv, "vd=" + std::to_string(vd) + " va=" + std::to_string(va) +
                                " vb=" + std::to_string(vb));
    }

    /// Broadcast of element j of vs into all active lanes of vd.
    void vrgather_vx(int vd, int vs, int j) {
        check_vreg(vd);
        check_vreg(vs);
        if (j < 0 || j >= vl_)
            throw IndexOutOfRange("vrgather_vx: element " + std::to_string(j) +
                                  " outside active vl " + std::to_string(vl_));
        const T x = vrf_(vs, j);
        for (int i = 0; i < vl_; ++i) vrf_(vd, i) = x;
        bump(Op::vrgather_vx);
        trace(Op::vrgather_vx, "vd=" + std::to_string(vd) + " vs=" + std::to_string(vs) +
                                   " j=" + std::to_string(j));
    }

    void vslide1down(int vd, int vs) {
        check_vreg(vd);
        check_vreg(vs);
        for (int i = 0; i + 1 < vl_; ++i) vrf_(vd, i) = vrf_(vs, i + 1);
        vrf_(vd, vl_ - 1) = T(0);
        bump(Op::vslide1down);
        trace(Op::vslide1down, "vd=" + std::to_string(vd) + " vs=" + std::to_string(vs));
    }

    void vmv_x_s(int rd, int vs) {
        check_sreg(rd);
        check_vreg(vs);
        sval_[rd] = vrf_(vs, 0);
        bump(Op::vmv_x_s);
        trace(Op::vmv_x_s, "rd=" + std::to_string(rd) + " vs=" + std::to_string(vs));
    }

    void vmv_zero(int vd) {
        check_vreg(vd);
        for (int i = 0; i < vl_; ++i) vrf_(vd, i) = T(0);
        bump(Op::vmv_zero);
        trace(Op::vmv_zero, "vd=" + std::to_string(vd));
    }

    /// vd[i] += vs2[0] * vrf[srf[rs] mod 32][i]. The indirect register address
    /// uses only the 5 least-significant bits of the scalar. An indirect
    /// source equal to vd is flagged as an alias hazard but still executes
    /// with sequential semantics.
    void vindexmac_vx(int vd, int vs2, int rs) {
        check_vreg(vd);
        check_vreg(vs2);
        check_sreg(rs);
        const int r = static_cast<int>(srf_[rs] & 0x1f);
        if (r == vd) ++stats_.alias_hazards;
        const T scale = vrf_(vs2, 0);
        for (int i = 0; i < vl_; ++i) vrf_(vd, i) += scale * vrf_(r, i);
        bump(Op::vindexmac);
        trace(Op::vindexmac, "vd=" + std::to_string(vd) + " vs2=" + std::to_string(vs2) +
                                 " rs=" + std::to_string(rs));
    }

    // ---- statistics ----

    ExecStats snapshot_stats() const { return stats_; }
    void reset_stats() { stats_ = ExecStats{}; }

    // ---- introspection (host-side, not counted) ----

    T vreg(int reg, int lane) const { return vrf_(reg, lane); }
    std::int64_t srf(int slot) const { return srf_[slot]; }
    T sval(int slot) const { return sval_[slot]; }
    void poke_vreg(int reg, int lane, T v) { vrf_(reg, lane) = v; }
    void poke_srf(int slot, std::int64_t v) { srf_[slot] = v; }
    void poke_sval(int slot, T v) { sval_[slot] = v; }
    T peek_mem(std::size_t addr) const { return mem_.at(addr); }

    void enable_trace(std::ostream* os) { trace_ = os; }

private:
    struct Region {
        std::string name;
        std::size_t base, len;
    };

    void bump(Op o) { ++stats_.count(o); }

    void check_vreg(int r) const {
        if (r < 0 || r >= cfg_.num_vregs)
            throw IndexOutOfRange("bad vector register id " + std::to_string(r));
    }
    void check_sreg(int r) const {
        if (r < 0 || r >= 32)
            throw IndexOutOfRange("bad scalar slot id " + std::to_string(r));
    }

    const Region& containing_region(std::size_t addr, int len) const {
        for (const auto& r : regions_)
            if (addr >= r.base && addr + len <= r.base + r.len) return r;
        throw OutOfBounds("access [" + std::to_string(addr) + ", " +
                          std::to_string(addr + len) + ") is not inside a bound region");
    }

    std::uint64_t lines_spanned(std::size_t addr, int count) const {
        const std::uint64_t first = addr * cfg_.element_bytes / cfg_.line_bytes;
        const std::uint64_t last =
            ((addr + count) * cfg_.element_bytes - 1) / cfg_.line_bytes;
        return last - first + 1;
    }

    void trace(Op o, const std::string& args) {
        if (trace_) (*trace_) << op_name(o) << '\t' << args << '\t' << vl_ << '\n';
    }

    MachineConfig cfg_;
    DenseMatrix<T> vrf_;
    std::array<std::int64_t, 32> srf_;
    std::array<T, 32> sval_;
    std::vector<T> mem_;
    std::vector<Region> regions_;
    int vl_;
    ExecStats stats_;
    std::ostream* trace_ = nullptr;
};

}  // namespace ssmm
