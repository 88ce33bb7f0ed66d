#include "dsim/prop/propagator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dsim/core/parallel.hpp"
#include "dsim/fft/fft.hpp"
#include "dsim/simd/kernels.hpp"

namespace dsim {

namespace {

double ramp01(double u) {  // 0 -> 0, 1 -> 1, smooth
    const double s = std::sin(0.5 * std::numbers::pi * u);
    return s * s;
}

double diag_trace(const std::vector<cd>& rho, int n, double dx) {
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = rho[static_cast<size_t>(i) * n + i].real();
    return pairwise_sum(d) * dx;
}

// In-place 2D spectral pass: forward both axes, caller transforms rows,
// inverse both axes. Normalization is folded by the row transform.
void fft2(std::vector<cd>& a, int n, FftDir dir) {
    const auto& plan = FftPlan::get(n);
    if (dir == FftDir::forward) {
        fft_cols(a.data(), n, plan, FftDir::forward);
        fft_rows(a.data(), n, plan, FftDir::forward);
    } else {
        fft_rows(a.data(), n, plan, FftDir::inverse);
        fft_cols(a.data(), n, plan, FftDir::inverse);
    }
}

}  // namespace

std::vector<double> make_edge_mask(const Grid1D& grid, double lo_end, double hi_start) {
    std::vector<double> m(grid.n, 1.0);
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        if (x < lo_end && lo_end > grid.min)
            m[i] = ramp01((x - grid.min) / (lo_end - grid.min));
        else if (x > hi_start && hi_start < grid.max)
            m[i] = ramp01((grid.max - x) / (grid.max - hi_start));
    }
    return m;
}

double absorbing_boundary(std::vector<cd>& rho, const Grid1D& grid,
                          const std::vector<double>& mask) {
    const int n = grid.n;
    const double before = diag_trace(rho, n, grid.dx());
    const auto& ops = simd::ops();
    parallel_for(0, static_cast<size_t>(n), 32, [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i)
            ops.mul_real_row(rho.data() + i * n, mask[i], mask.data(), n);
    });
    return before - diag_trace(rho, n, grid.dx());
}

SinglePropagator::SinglePropagator(const Grid1D& grid, double hbar_over_mass,
                                   const KernelSet1* kernels, std::vector<double> mask,
                                   const StepControl& ctl)
    : grid_(grid), hbar_over_mass_(hbar_over_mass), kernels_(kernels), mask_(std::move(mask)),
      ctl_(ctl) {
    const auto kv = grid_.k_values();
    k2_.resize(grid_.n);
    for (int i = 0; i < grid_.n; ++i) k2_[i] = kv[i] * kv[i];
    const size_t sz = static_cast<size_t>(grid_.n) * grid_.n;
    rho_.assign(sz, cd{});
    work_.resize(sz);
    k_.resize(sz);
    stage_.resize(sz);
    acc_.resize(sz);

    dt_ = ctl_.dt;
    if (dt_ <= 0) {
        const double lam_kin = 0.5 * hbar_over_mass_ * grid_.kmax() * grid_.kmax();
        double lam_kernel = 0;
        if (kernels_) {
            for (size_t i = 0; i < sz; ++i)
                lam_kernel = std::max(lam_kernel, 0.5 * kernels_->gamma[i] +
                                                      std::abs(kernels_->dep[i]) +
                                                      std::abs(kernels_->depp[i]));
        }
        dt_ = ctl_.dt_safety * 2.828 / (lam_kin + lam_kernel);
    }
}

void SinglePropagator::set_gaussian(double center, double sigma) {
    const auto psi = gaussian_packet(grid_, center, sigma);
    const int n = grid_.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            rho_[static_cast<size_t>(i) * n + j] = psi[i] * std::conj(psi[j]);
    t_ = 0;
    absorbed_ = 0;
    istep_ = 0;
}

void SinglePropagator::set_state(std::vector<cd> rho, double t) {
    if (rho.size() != static_cast<size_t>(grid_.n) * grid_.n)
        throw std::invalid_argument("SinglePropagator::set_state: size mismatch");
    rho_ = std::move(rho);
    t_ = t;
}

void SinglePropagator::rhs(const std::vector<cd>& in, std::vector<cd>& out) {
    const int n = grid_.n;
    out = in;
    fft2(out, n, FftDir::forward);
    const double coef = 0.5 * hbar_over_mass_ / (static_cast<double>(n) * n);
    parallel_for(0, static_cast<size_t>(n), 32, [&](size_t lo, size_t hi) {
        const auto& ops = simd::ops();
        for (size_t i = lo; i < hi; ++i)
            ops.kin_mul_row(out.data() + i * n, k2_.data(), k2_[i], coef, n);
    });
    fft2(out, n, FftDir::inverse);
    if (kernels_) {
        parallel_for(0, static_cast<size_t>(n), 32, [&](size_t lo, size_t hi) {
            const auto& ops = simd::ops();
            for (size_t i = lo; i < hi; ++i)
                ops.apply_k1_row(out.data() + i * n, in.data() + i * n,
                                 kernels_->gamma.data() + i * n, kernels_->dep.data() + i * n,
                                 kernels_->depp.data() + i * n, n);
        });
    }
}

void SinglePropagator::step(double dt) {
    const auto& ops = simd::ops();
    const size_t sz = rho_.size();
    rhs(rho_, k_);
    acc_ = k_;
    ops.assign_axpy(stage_.data(), rho_.data(), 0.5 * dt, k_.data(), sz);
    rhs(stage_, k_);
    ops.axpy_re(acc_.data(), 2.0, k_.data(), sz);
    ops.assign_axpy(stage_.data(), rho_.data(), 0.5 * dt, k_.data(), sz);
    rhs(stage_, k_);
    ops.axpy_re(acc_.data(), 2.0, k_.data(), sz);
    ops.assign_axpy(stage_.data(), rho_.data(), dt, k_.data(), sz);
    rhs(stage_, k_);
    ops.axpy_re(acc_.data(), 1.0, k_.data(), sz);
    ops.axpy_re(rho_.data(), dt / 6.0, acc_.data(), sz);
    if (!mask_.empty()) absorbed_ += absorbing_boundary(rho_, grid_, mask_);
    t_ += dt;
    ++istep_;
    if (ctl_.check_every > 0 && istep_ % ctl_.check_every == 0) {
        const cd probe = rho_[sz / 2];
        if (!std::isfinite(probe.real()) || !std::isfinite(probe.imag()))
            throw std::runtime_error("SinglePropagator: NaN at step " + std::to_string(istep_));
    }
}

void SinglePropagator::run(double t_final, double output_every,
                           const std::function<void(const Observation1&)>& on_output) {
    if (on_output) on_output(observe());
    double next_out = output_every;
    while (t_ < t_final - 1e-12) {
        step(std::min(dt_, t_final - t_));
        if (on_output && (t_ >= next_out - 1e-9 || t_ >= t_final - 1e-12)) {
            on_output(observe());
            next_out += output_every;
        }
    }
}

Observation1 SinglePropagator::observe() const {
    const int n = grid_.n;
    const double dx = grid_.dx();
    Observation1 ob;
    ob.t = t_;
    ob.absorbed = absorbed_;
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = rho_[static_cast<size_t>(i) * n + i].real();
    ob.trace = pairwise_sum(diag) * dx;
    for (int i = 0; i < n; ++i) ob.peak_density = std::max(ob.peak_density, diag[i]);
    double m1 = 0;
    for (int i = 0; i < n; ++i) m1 += grid_.x(i) * diag[i] * dx;
    m1 /= ob.trace;
    double m2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = grid_.x(i) - m1;
        m2 += u * u * diag[i] * dx;
    }
    m2 /= ob.trace;
    ob.mean_x = m1;
    // |psi|^2 of the stated Gaussian has variance sigma^2/2.
    ob.width = std::sqrt(2.0 * m2);

    // <T> from the momentum diagonal <k|rho|k>: forward on x, inverse-phase
    // transform on x'.
    std::vector<cd> g = rho_;
    const auto& plan = FftPlan::get(n);
    fft_cols(g.data(), n, plan, FftDir::forward);
    fft_rows(g.data(), n, plan, FftDir::inverse);
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
        const double p = g[static_cast<size_t>(i) * n + i].real();
        num += 0.5 * hbar_over_mass_ * k2_[i] * p;
        den += p;
    }
    ob.kinetic_energy = den != 0 ? num / den : 0.0;

    double defect = 0;
    for (int i = 0; i < n; i += 3)
        for (int j = i; j < n; j += 3)
            defect = std::max(defect, std::abs(rho_[static_cast<size_t>(i) * n + j] -
                                               std::conj(rho_[static_cast<size_t>(j) * n + i])));
    ob.herm_defect = defect;
    return ob;
}

DimerPropagator::DimerPropagator(const KernelSet2& kernels, double hbar_over_mass, double c3,
                                 double w_cap_radius, DimerMasks masks, const StepControl& ctl)
    : grid_(kernels.grid), kernels_(kernels), hbar_over_mass_(hbar_over_mass),
      masks_(std::move(masks)), ctl_(ctl) {
    const int n = grid_.n;
    const auto kv = grid_.k_values();
    k2_.resize(n);
    for (int i = 0; i < n; ++i) k2_[i] = kv[i] * kv[i];
    w_.resize(n);
    for (int i = 0; i < n; ++i) {
        const double r = std::max(grid_.x(i), w_cap_radius);
        w_[i] = c3 / (r * r * r);
    }
    const size_t sz = static_cast<size_t>(n) * n;
    for (int c = 0; c < 4; ++c) {
        rho_[c].assign(sz, cd{});
        k_[c].resize(sz);
        stage_[c].resize(sz);
        acc_[c].resize(sz);
    }
    work_.resize(sz);

    if (ctl_.filter_every > 0) {
        filter_.resize(n);
        const double kmax = grid_.kmax();
        for (int i = 0; i < n; ++i) {
            const double frac = std::sqrt(k2_[i]) / kmax;
            filter_[i] = frac <= ctl_.filter_frac
                             ? 1.0
                             : ramp01((1.0 - frac) / (1.0 - ctl_.filter_frac));
        }
    }

    dt_ = ctl_.dt;
    if (dt_ <= 0) {
        const double lam_kin = 0.5 * hbar_over_mass_ * grid_.kmax() * grid_.kmax();
        double wmax = 0;
        for (double v : w_) wmax = std::max(wmax, std::abs(v));
        const double lam = lam_kin + 2.0 * wmax + kernels_.lambda_kernel;
        dt_ = ctl_.dt_safety * 2.828 / lam;
    }
}

void DimerPropagator::set_gaussian(double center, double sigma, DimerSurface surface) {
    const auto phi = gaussian_packet(grid_, center, sigma);
    const int n = grid_.n;
    // rho_el in {pi_1, pi_2}: repulsive/attractive = (|1> +/- |2>)/sqrt(2).
    std::array<cd, 4> el{};
    switch (surface) {
        case DimerSurface::repulsive: el = {0.5, 0.5, 0.5, 0.5}; break;
        case DimerSurface::attractive: el = {0.5, -0.5, -0.5, 0.5}; break;
        case DimerSurface::bare_state: el = {1.0, 0.0, 0.0, 0.0}; break;
    }
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                rho_[c][static_cast<size_t>(i) * n + j] = el[c] * phi[i] * std::conj(phi[j]);
    t_ = 0;
    absorbed_rep_ = absorbed_att_ = absorbed_filter_ = 0;
    istep_ = 0;
}

void DimerPropagator::rhs(const std::array<std::vector<cd>, 4>& in,
                          std::array<std::vector<cd>, 4>& out) {
    const int n = grid_.n;
    const double coef = 0.5 * hbar_over_mass_ / (static_cast<double>(n) * n);
    for (int c = 0; c < 4; ++c) {
        out[c] = in[c];
        fft2(out[c], n, FftDir::forward);
        parallel_for(0, static_cast<size_t>(n), 32, [&](size_t lo, size_t hi) {
            const auto& ops = simd::ops();
            for (size_t i = lo; i < hi; ++i)
                ops.kin_mul_row(out[c].data() + i * n, k2_.data(), k2_[i], coef, n);
        });
        fft2(out[c], n, FftDir::inverse);
    }
    parallel_for(0, static_cast<size_t>(n), 8, [&](size_t lo, size_t hi) {
        const auto& ops = simd::ops();
        for (size_t i = lo; i < hi; ++i) {
            const size_t off = i * n;
            for (int nn = 0; nn < 2; ++nn)
                for (int mm = 0; mm < 2; ++mm) {
                    const int c = nn * 2 + mm;
                    // dipole-dipole exchange: W(r) rho_{flip(n),m} - W(r') rho_{n,flip(m)}
                    ops.w_couple_row(out[c].data() + off, in[(1 - nn) * 2 + mm].data() + off,
                                     in[nn * 2 + (1 - mm)].data() + off, w_[i], w_.data(), n);
                    for (int kl = 0; kl < 4; ++kl)
                        ops.apply_k2_row(out[c].data() + off,
                                         kernels_.slabs[c * 4 + kl].data() + off,
                                         in[kl].data() + off, n);
                }
        }
    });
}

void DimerPropagator::step(double dt) {
    const auto& ops = simd::ops();
    const size_t sz = rho_[0].size();
    rhs(rho_, k_);
    for (int c = 0; c < 4; ++c) {
        acc_[c] = k_[c];
        ops.assign_axpy(stage_[c].data(), rho_[c].data(), 0.5 * dt, k_[c].data(), sz);
    }
    rhs(stage_, k_);
    for (int c = 0; c < 4; ++c) {
        ops.axpy_re(acc_[c].data(), 2.0, k_[c].data(), sz);
        ops.assign_axpy(stage_[c].data(), rho_[c].data(), 0.5 * dt, k_[c].data(), sz);
    }
    rhs(stage_, k_);
    for (int c = 0; c < 4; ++c) {
        ops.axpy_re(acc_[c].data(), 2.0, k_[c].data(), sz);
        ops.assign_axpy(stage_[c].data(), rho_[c].data(), dt, k_[c].data(), sz);
    }
    rhs(stage_, k_);
    for (int c = 0; c < 4; ++c) {
        ops.axpy_re(acc_[c].data(), 1.0, k_[c].data(), sz);
        ops.axpy_re(rho_[c].data(), dt / 6.0, acc_[c].data(), sz);
    }
    apply_masks();
    t_ += dt;
    ++istep_;
    if (ctl_.filter_every > 0 && istep_ % ctl_.filter_every == 0) apply_filter();
    if (ctl_.check_every > 0 && istep_ % ctl_.check_every == 0) {
        const cd probe = rho_[0][sz / 2];
        if (!std::isfinite(probe.real()) || !std::isfinite(probe.imag()))
            throw std::runtime_error("DimerPropagator: NaN at step " + std::to_string(istep_));
    }
}

void DimerPropagator::apply_masks() {
    if (masks_.rep.empty()) return;
    const int n = grid_.n;
    const double dx = grid_.dx();
    auto channel_sums = [&](double& rep, double& att) {
        std::vector<double> drep(n), datt(n);
        for (int i = 0; i < n; ++i) {
            const size_t ii = static_cast<size_t>(i) * n + i;
            const double s = rho_[0][ii].real() + rho_[3][ii].real();
            const double x = rho_[1][ii].real() + rho_[2][ii].real();
            drep[i] = 0.5 * (s + x);
            datt[i] = 0.5 * (s - x);
        }
        rep = pairwise_sum(drep) * dx;
        att = pairwise_sum(datt) * dx;
    };
    double rep0 = 0, att0 = 0;
    channel_sums(rep0, att0);
    parallel_for(0, static_cast<size_t>(n), 32, [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) {
            const double ai = 0.5 * (masks_.rep[i] + masks_.att[i]);
            const double bi = 0.5 * (masks_.rep[i] - masks_.att[i]);
            const size_t off = i * n;
            for (int j = 0; j < n; ++j) {
                const double aj = 0.5 * (masks_.rep[j] + masks_.att[j]);
                const double bj = 0.5 * (masks_.rep[j] - masks_.att[j]);
                const cd r11 = rho_[0][off + j], r12 = rho_[1][off + j];
                const cd r21 = rho_[2][off + j], r22 = rho_[3][off + j];
                const cd p11 = ai * r11 + bi * r21, p12 = ai * r12 + bi * r22;
                const cd p21 = bi * r11 + ai * r21, p22 = bi * r12 + ai * r22;
                rho_[0][off + j] = p11 * aj + p12 * bj;
                rho_[1][off + j] = p11 * bj + p12 * aj;
                rho_[2][off + j] = p21 * aj + p22 * bj;
                rho_[3][off + j] = p21 * bj + p22 * aj;
            }
        }
    });
    double rep1 = 0, att1 = 0;
    channel_sums(rep1, att1);
    absorbed_rep_ += rep0 - rep1;
    absorbed_att_ += att0 - att1;
}

void DimerPropagator::apply_filter() {
    const int n = grid_.n;
    const double dx = grid_.dx();
    std::vector<double> diag0(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const size_t ii = static_cast<size_t>(i) * n + i;
        diag0[i] = rho_[0][ii].real() + rho_[3][ii].real();
    }
    const double tr0 = pairwise_sum(diag0) * dx;
    const double inv_n2 = 1.0 / (static_cast<double>(n) * n);
    for (int c = 0; c < 4; ++c) {
        fft2(rho_[c], n, FftDir::forward);
        parallel_for(0, static_cast<size_t>(n), 32, [&](size_t lo, size_t hi) {
            const auto& ops = simd::ops();
            for (size_t i = lo; i < hi; ++i)
                ops.mul_real_row(rho_[c].data() + i * n, filter_[i] * inv_n2, filter_.data(), n);
        });
        fft2(rho_[c], n, FftDir::inverse);
    }
    for (int i = 0; i < n; ++i) {
        const size_t ii = static_cast<size_t>(i) * n + i;
        diag0[i] = rho_[0][ii].real() + rho_[3][ii].real();
    }
    absorbed_filter_ += tr0 - pairwise_sum(diag0) * dx;
}

void DimerPropagator::run(
    double t_final, double output_every,
    const std::function<void(const Observation2&, const SurfaceDensities&)>& on_output) {
    if (on_output) on_output(observe(), surface_densities());
    double next_out = output_every;
    while (t_ < t_final - 1e-12) {
        step(std::min(dt_, t_final - t_));
        if (on_output && (t_ >= next_out - 1e-9 || t_ >= t_final - 1e-12)) {
            on_output(observe(), surface_densities());
            next_out += output_every;
        }
    }
}

SurfaceDensities DimerPropagator::surface_densities() const {
    const int n = grid_.n;
    const double dx = grid_.dx();
    SurfaceDensities sd;
    sd.n_rep.resize(n);
    sd.n_att.resize(n);
    sd.n_rep_integral.resize(n);
    for (int i = 0; i < n; ++i) {
        const size_t ii = static_cast<size_t>(i) * n + i;
        const double s = rho_[0][ii].real() + rho_[3][ii].real();
        const double x = rho_[1][ii].real() + rho_[2][ii].real();
        sd.n_rep[i] = 0.5 * (s + x);
        sd.n_att[i] = 0.5 * (s - x);
    }
    sd.p_rep = pairwise_sum(sd.n_rep) * dx;
    sd.p_att = pairwise_sum(sd.n_att) * dx;
    // Literal SI form: n_rep(r) = 1/2 integral dr' [rho11+rho22+rho12+rho21].
    for (int i = 0; i < n; ++i) {
        cd s{};
        const size_t off = static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j)
            s += rho_[0][off + j] + rho_[1][off + j] + rho_[2][off + j] + rho_[3][off + j];
        s *= 0.5 * dx;
        sd.n_rep_integral[i] = s.real();
        sd.max_imag_integral = std::max(sd.max_imag_integral, std::abs(s.imag()));
    }
    return sd;
}

Observation2 DimerPropagator::observe() const {
    const int n = grid_.n;
    const double dx = grid_.dx();
    Observation2 ob;
    ob.t = t_;
    ob.absorbed_rep = absorbed_rep_;
    ob.absorbed_att = absorbed_att_;
    ob.absorbed_filter = absorbed_filter_;
    const SurfaceDensities sd = surface_densities();
    ob.p_rep = sd.p_rep;
    ob.p_att = sd.p_att;
    ob.trace = sd.p_rep + sd.p_att;
    double num = 0;
    for (int i = 0; i < n; ++i) {
        if (sd.n_rep[i] > ob.peak_n_rep) ob.peak_n_rep = sd.n_rep[i];
        num += grid_.x(i) * sd.n_rep[i] * dx;
    }
    ob.mean_r_rep = sd.p_rep > 1e-12 ? num / sd.p_rep : 0.0;
    double defect = 0;
    for (int i = 0; i < n; i += 5)
        for (int j = i; j < n; j += 5) {
            const size_t ij = static_cast<size_t>(i) * n + j;
            const size_t ji = static_cast<size_t>(j) * n + i;
            defect = std::max(defect, std::abs(rho_[0][ij] - std::conj(rho_[0][ji])));
            defect = std::max(defect, std::abs(rho_[1][ij] - std::conj(rho_[2][ji])));
            defect = std::max(defect, std::abs(rho_[3][ij] - std::conj(rho_[3][ji])));
        }
    ob.herm_defect = defect;
    return ob;
}

ReflectionResult reflection_probability(const std::vector<double>& times,
                                        const std::vector<std::vector<double>>& n_rep_profiles,
                                        const Grid1D& grid, double r_boundary) {
    if (times.size() < 3 || times.size() != n_rep_profiles.size())
        throw std::invalid_argument("reflection_probability: trajectory too short");
    const int n = grid.n;
    const double dx = grid.dx();
    std::vector<double> mean_r(times.size());
    for (size_t s = 0; s < times.size(); ++s) {
        double m = 0, p = 0;
        for (int i = 0; i < n; ++i) {
            m += grid.x(i) * n_rep_profiles[s][i] * dx;
            p += n_rep_profiles[s][i] * dx;
        }
        mean_r[s] = p > 1e-12 ? m / p : 0.0;
    }
    // Wall encounter: global max of <r>; analysis time: first inward-to-
    // outward velocity sign change after it (inner turning point of the
    // reflected packet), else the final sample.
    size_t peak = 0;
    for (size_t s = 1; s < times.size(); ++s)
        if (mean_r[s] > mean_r[peak]) peak = s;
    size_t analysis = times.size() - 1;
    for (size_t s = peak + 1; s + 1 < times.size(); ++s) {
        if (mean_r[s + 1] > mean_r[s] && mean_r[s] < mean_r[s - 1]) {
            analysis = s;
            break;
        }
    }
    ReflectionResult out;
    out.analysis_time = times[analysis];
    out.r_boundary = r_boundary;
    double p = 0;
    for (int i = 0; i < n; ++i)
        if (grid.x(i) < r_boundary) p += n_rep_profiles[analysis][i] * dx;
    out.probability = p;
    return out;
}

}  // namespace dsim
