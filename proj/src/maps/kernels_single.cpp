#include <stdexcept>

#include "dsim/core/parallel.hpp"
#include "dsim/effective/ops.hpp"
#include "dsim/maps/kernels.hpp"
#include "dsim/simd/kernels.hpp"

namespace dsim {

KernelSet1 build_kernels_single(const BackgroundGas& gas, const Grid1D& grid,
                                const EitParams& eit, const InteractionParams& inter,
                                const std::vector<double>* v_ext) {
    if (gas.positions.empty())
        throw std::invalid_argument("build_kernels_single: empty gas");
    const int n = grid.n;
    const size_t nbg = gas.positions.size();

    // Effective amplitudes per (atom, grid point); layout [alpha][x] so the
    // cross-correlation inner loop streams contiguously.
    std::vector<cd> ltab(nbg * n);
    std::vector<double> h(n, 0.0);
    {
        std::vector<std::vector<double>> h_parts(nbg);
        parallel_for(0, nbg, 16, [&](size_t lo, size_t hi) {
            for (size_t a = lo; a < hi; ++a) {
                h_parts[a].resize(n);
                for (int i = 0; i < n; ++i) {
                    const auto eff =
                        closed_form_single_at(eit, inter, grid.x(i), gas.positions[a]);
                    ltab[a * n + i] = eff.l;
                    h_parts[a][i] = eff.h;
                }
            }
        });
        // Fixed summation order over atoms.
        for (size_t a = 0; a < nbg; ++a)
            for (int i = 0; i < n; ++i) h[i] += h_parts[a][i];
    }

    KernelSet1 ks;
    ks.grid = grid;
    ks.h_eff = h;
    ks.v_ext.assign(n, 0.0);
    if (v_ext) {
        if (static_cast<int>(v_ext->size()) != n)
            throw std::invalid_argument("build_kernels_single: v_ext size mismatch");
        ks.v_ext = *v_ext;
    }
    ks.gamma.resize(static_cast<size_t>(n) * n);
    ks.dep.resize(ks.gamma.size());
    ks.depp.resize(ks.gamma.size());

    // Cross-correlation slab C(x,x') = sum_a l_a(x) conj(l_a(x')); gamma and
    // depp both read off it, and reusing its diagonal for the |l|^2 sums
    // makes gamma(x,x) = 0 exact.
    std::vector<cd> corr(static_cast<size_t>(n) * n);
    parallel_for(0, static_cast<size_t>(n), 4, [&](size_t lo, size_t hi) {
        const auto& ops = simd::ops();
        for (size_t i = lo; i < hi; ++i) {
            cd* row = corr.data() + i * n;
            for (size_t a = 0; a < nbg; ++a)
                ops.rank1_accum(row, ltab[a * n + i], ltab.data() + a * n, n);
        }
    });

    std::vector<double> htilde(n);
    for (int i = 0; i < n; ++i) htilde[i] = h[i] + ks.v_ext[i];

    parallel_for(0, static_cast<size_t>(n), 16, [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i)
            for (int j = 0; j < n; ++j) {
                const size_t ij = i * n + j;
                const cd c = corr[ij];
                ks.gamma[ij] = corr[i * n + i].real() + corr[static_cast<size_t>(j) * n + j].real() -
                               2.0 * c.real();
                ks.dep[ij] = htilde[i] - htilde[j];
                ks.depp[ij] = c.imag();
            }
    });
    return ks;
}

}  // namespace dsim
