#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dsim/maps/kernels.hpp"

namespace dsim {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'K', 'N'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void put_vec(std::ofstream& f, const std::vector<T>& v) {
    const uint64_t n = v.size();
    put(f, n);
    f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
}
template <typename T>
void get(std::ifstream& f, T& v) {
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
}
template <typename T>
void get_vec(std::ifstream& f, std::vector<T>& v) {
    uint64_t n = 0;
    get(f, n);
    v.resize(n);
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
}

void write_sidecar(const std::string& path, const std::string& meta_json) {
    if (meta_json.empty()) return;
    std::ofstream side(path + ".json", std::ios::trunc);
    side << meta_json << "\n";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(kMagic, 4);
    put(f, kVersion);
    return f;
}

std::ifstream open_in(const std::string& path, uint32_t expect_type) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open kernel file: " + path);
    char magic[4];
    f.read(magic, 4);
    uint32_t version = 0, type = 0;
    get(f, version);
    get(f, type);
    if (std::memcmp(magic, kMagic, 4) != 0 || version != kVersion || type != expect_type)
        throw std::runtime_error("bad kernel container: " + path);
    return f;
}

}  // namespace

void save_kernels(const KernelSet2& ks, const std::string& path, const std::string& meta_json) {
    auto f = open_out(path);
    put(f, uint32_t{2});
    put(f, ks.grid.min);
    put(f, ks.grid.max);
    put(f, uint32_t(ks.grid.n));
    put(f, ks.mask_lo);
    put(f, ks.mask_hi);
    put(f, ks.lambda_kernel);
    put(f, uint8_t(ks.flags.neglect_delta_e));
    put(f, uint8_t(ks.flags.dominant_gamma_only));
    put(f, uint8_t(ks.flags.no_state_transfer));
    put(f, ks.flags.gamma_cap);
    put_vec(f, ks.gdiag12);
    put_vec(f, ks.gdiag11);
    for (const auto& h : ks.h_sum) put_vec(f, h);
    put_vec(f, ks.cap_scale);
    for (const auto& s : ks.slabs) put_vec(f, s);
    if (!f) throw std::runtime_error("write failed: " + path);
    f.close();
    write_sidecar(path, meta_json);
}

KernelSet2 load_kernels(const std::string& path) {
    auto f = open_in(path, 2);
    KernelSet2 ks;
    double gmin = 0, gmax = 0;
    uint32_t n = 0;
    get(f, gmin);
    get(f, gmax);
    get(f, n);
    ks.grid = Grid1D::make(gmin, gmax, static_cast<int>(n));
    get(f, ks.mask_lo);
    get(f, ks.mask_hi);
    get(f, ks.lambda_kernel);
    uint8_t b1 = 0, b2 = 0, b3 = 0;
    get(f, b1);
    get(f, b2);
    get(f, b3);
    ks.flags.neglect_delta_e = b1;
    ks.flags.dominant_gamma_only = b2;
    ks.flags.no_state_transfer = b3;
    get(f, ks.flags.gamma_cap);
    get_vec(f, ks.gdiag12);
    get_vec(f, ks.gdiag11);
    for (auto& h : ks.h_sum) get_vec(f, h);
    get_vec(f, ks.cap_scale);
    for (auto& s : ks.slabs) get_vec(f, s);
    if (!f) throw std::runtime_error("truncated kernel container: " + path);
    return ks;
}

void save_kernels_single(const KernelSet1& ks, const std::string& path,
                         const std::string& meta_json) {
    auto f = open_out(path);
    put(f, uint32_t{1});
    put(f, ks.grid.min);
    put(f, ks.grid.max);
    put(f, uint32_t(ks.grid.n));
    put_vec(f, ks.h_eff);
    put_vec(f, ks.v_ext);
    put_vec(f, ks.gamma);
    put_vec(f, ks.dep);
    put_vec(f, ks.depp);
    if (!f) throw std::runtime_error("write failed: " + path);
    f.close();
    write_sidecar(path, meta_json);
}

KernelSet1 load_kernels_single(const std::string& path) {
    auto f = open_in(path, 1);
    KernelSet1 ks;
    double gmin = 0, gmax = 0;
    uint32_t n = 0;
    get(f, gmin);
    get(f, gmax);
    get(f, n);
    ks.grid = Grid1D::make(gmin, gmax, static_cast<int>(n));
    get_vec(f, ks.h_eff);
    get_vec(f, ks.v_ext);
    get_vec(f, ks.gamma);
    get_vec(f, ks.dep);
    get_vec(f, ks.depp);
    if (!f) throw std::runtime_error("truncated kernel container: " + path);
    return ks;
}

}  // namespace dsim
