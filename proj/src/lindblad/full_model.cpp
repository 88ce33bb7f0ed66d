#include "dsim/lindblad/full_model.hpp"

#include <cmath>
#include <stdexcept>

#include "dsim/core/parallel.hpp"
#include "dsim/effective/ops.hpp"

namespace dsim {

namespace {
constexpr int kG = 0, kE = 1, kU = 2;

double powi(double x, int n) {
    double r = 1;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}
}  // namespace

int FullModel::bg_dim() const {
    if (bg_positions.size() > 4)
        throw std::invalid_argument("FullModel: dense-solver guard, N_bg must be <= 4");
    int d = 1;
    for (size_t i = 0; i < bg_positions.size(); ++i) d *= 3;
    return d;
}

int FullModel::index(int n, const std::vector<int>& bg_levels) const {
    int idx = n;
    for (int b : bg_levels) idx = idx * 3 + b;
    return idx;
}

CMatrix FullModel::hamiltonian() const {
    if (n_ryd != 1 && n_ryd != 2)
        throw std::invalid_argument("FullModel: n_ryd must be 1 or 2");
    if (static_cast<int>(ryd_positions.size()) != n_ryd)
        throw std::invalid_argument("FullModel: ryd_positions size mismatch");
    const int nbg = static_cast<int>(bg_positions.size());
    const int nd = dimer_dim();
    const int d = dim();
    CMatrix h(d);

    // Per background atom: EIT ladder + interaction shift on |u> that
    // depends on the dimer state.
    const int bdim = bg_dim();
    for (int alpha = 0; alpha < nbg; ++alpha) {
        // Interaction shift for dimer state n: atom in p at eta=4, the rest
        // in s at eta=6; pi_n means Rydberg atom n is the p one.
        std::vector<double> shift(nd, 0.0);
        for (int n = 0; n < nd; ++n) {
            double v = 0;
            for (int a = 0; a < n_ryd; ++a) {
                const double dist = distance(ryd_positions[a], bg_positions[alpha]);
                if (!(dist > 0.0))
                    throw std::domain_error("FullModel: coincident Rydberg/background atoms");
                const bool in_p = (n_ryd == 2 && a == n);
                v += in_p ? inter.c4_up / powi(dist, 4) : inter.c6_us / powi(dist, 6);
            }
            shift[n] = v;
        }
        const int stride = bdim / static_cast<int>(powi(3, alpha + 1));
        for (int n = 0; n < nd; ++n)
            for (int rest = 0; rest < bdim / 3; ++rest) {
                // Decompose: indices with atom alpha's level set to each value.
                const int hi = rest / stride, lo = rest % stride;
                auto idx = [&](int level) { return (n * bdim) + (hi * 3 + level) * stride + lo; };
                const int ig = idx(kG), ie = idx(kE), iu = idx(kU);
                h(ie, ig) += 0.5 * eit.omega_p;
                h(ig, ie) += 0.5 * eit.omega_p;
                h(iu, ie) += 0.5 * eit.omega_c;
                h(ie, iu) += 0.5 * eit.omega_c;
                h(ie, ie) += -eit.delta_p;
                h(iu, iu) += -(eit.delta_p + eit.delta_c) + shift[n];
            }
    }

    // Dipole-dipole exchange between the dimer states.
    if (n_ryd == 2) {
        const double r12 = distance(ryd_positions[0], ryd_positions[1]);
        if (!(r12 > 0.0)) throw std::domain_error("FullModel: coincident Rydberg atoms");
        const double w = inter.c3_dd / powi(r12, 3);
        for (int b = 0; b < bdim; ++b) {
            h(0 * bdim + b, 1 * bdim + b) += w;
            h(1 * bdim + b, 0 * bdim + b) += w;
        }
    }
    return h;
}

std::vector<CMatrix> FullModel::decay_ops() const {
    const int nbg = static_cast<int>(bg_positions.size());
    const int nd = dimer_dim();
    const int bdim = bg_dim();
    std::vector<CMatrix> ls;
    const double amp = std::sqrt(eit.gamma_p);
    for (int alpha = 0; alpha < nbg; ++alpha) {
        CMatrix l(dim());
        const int stride = bdim / static_cast<int>(powi(3, alpha + 1));
        for (int n = 0; n < nd; ++n)
            for (int rest = 0; rest < bdim / 3; ++rest) {
                const int hi = rest / stride, lo = rest % stride;
                auto idx = [&](int level) { return (n * bdim) + (hi * 3 + level) * stride + lo; };
                l(idx(kG), idx(kE)) = amp;
            }
        ls.push_back(std::move(l));
    }
    return ls;
}

double spectral_estimate(const CMatrix& h, double gamma_p) {
    double best = 0;
    for (int i = 0; i < h.dim(); ++i) {
        double s = 0;
        for (int j = 0; j < h.dim(); ++j) s += std::abs(h(i, j));
        best = std::max(best, s);
    }
    return std::max(best, gamma_p);
}

namespace {

struct LindbladRhs {
    const CMatrix& h;
    const std::vector<CMatrix>& ls;
    std::vector<CMatrix> ldag;
    CMatrix lsum;  // sum L^dag L
    mutable CMatrix tmp;

    LindbladRhs(const CMatrix& h_, const std::vector<CMatrix>& ls_)
        : h(h_), ls(ls_), lsum(h_.dim()), tmp(h_.dim()) {
        for (const auto& l : ls) {
            ldag.push_back(l.adjoint());
            lsum.add_product(ldag.back(), l);
        }
    }

    void operator()(const CMatrix& rho, CMatrix& out) const {
        out = CMatrix(rho.dim());
        out.add_product(h, rho, {0.0, -1.0});
        out.add_product(rho, h, {0.0, 1.0});
        for (size_t a = 0; a < ls.size(); ++a) {
            tmp = CMatrix(rho.dim());
            tmp.add_product(ls[a], rho);
            out.add_product(tmp, ldag[a]);
        }
        out.add_product(lsum, rho, {-0.5, 0.0});
        out.add_product(rho, lsum, {-0.5, 0.0});
    }
};

}  // namespace

namespace {
void add_scaled(CMatrix& y, double a, const CMatrix& x) {
    const size_t n = static_cast<size_t>(y.dim()) * y.dim();
    cd* yd = y.data();
    const cd* xd = x.data();
    for (size_t i = 0; i < n; ++i) yd[i] += a * xd[i];
}
void assign_scaled(CMatrix& dst, const CMatrix& x, double a, const CMatrix& k) {
    dst = x;
    add_scaled(dst, a, k);
}
}  // namespace

void evolve_full(FullState& state, const CMatrix& h, const std::vector<CMatrix>& ls,
                 const EvolveOptions& opts,
                 const std::function<void(const FullState&)>& on_output) {
    const LindbladRhs rhs(h, ls);
    double dt = opts.dt;
    if (dt <= 0) {
        const double lambda = spectral_estimate(h, 0.0) + rhs.lsum.max_abs();
        dt = opts.dt_factor / std::max(lambda, 1e-12);
    }
    const double tr0 = state.rho.trace().real();

    CMatrix k1, k2, k3, k4, stage;
    if (on_output) on_output(state);
    double next_output = opts.output_every;
    while (state.t < opts.t_final - 1e-12) {
        const double step_dt = std::min(dt, opts.t_final - state.t);
        rhs(state.rho, k1);
        assign_scaled(stage, state.rho, 0.5 * step_dt, k1);
        rhs(stage, k2);
        assign_scaled(stage, state.rho, 0.5 * step_dt, k2);
        rhs(stage, k3);
        assign_scaled(stage, state.rho, step_dt, k3);
        rhs(stage, k4);
        add_scaled(state.rho, step_dt / 6.0, k1);
        add_scaled(state.rho, step_dt / 3.0, k2);
        add_scaled(state.rho, step_dt / 3.0, k3);
        add_scaled(state.rho, step_dt / 6.0, k4);
        state.t += step_dt;

        if (state.t >= next_output - 1e-12 || state.t >= opts.t_final - 1e-12) {
            const double drift = std::abs(state.rho.trace().real() - tr0);
            if (drift > opts.trace_tol * std::max(state.t, 1.0))
                throw std::runtime_error(
                    "evolve_full: trace drift " + std::to_string(drift) + " at t = " +
                    std::to_string(state.t) + "; reduce dt (suggested " +
                    std::to_string(0.25 * dt) + ")");
            if (on_output) on_output(state);
            next_output += opts.output_every;
        }
    }
}

CMatrix trace_out_background(const CMatrix& rho, const FullModel& m) {
    const int nd = m.dimer_dim(), bdim = m.bg_dim();
    CMatrix out(nd);
    for (int n = 0; n < nd; ++n)
        for (int mm = 0; mm < nd; ++mm) {
            cd s = 0;
            for (int b = 0; b < bdim; ++b) s += rho(n * bdim + b, mm * bdim + b);
            out(n, mm) = s;
        }
    return out;
}

CMatrix trace_to_background_atom(const CMatrix& rho, const FullModel& m, int alpha) {
    const int nd = m.dimer_dim(), bdim = m.bg_dim();
    const int nbg = static_cast<int>(m.bg_positions.size());
    if (alpha < 0 || alpha >= nbg)
        throw std::invalid_argument("trace_to_background_atom: bad atom index");
    const int stride = bdim / static_cast<int>(std::pow(3, alpha + 1));
    CMatrix out(3);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            cd s = 0;
            for (int n = 0; n < nd; ++n)
                for (int hi = 0; hi < bdim / (3 * stride); ++hi)
                    for (int lo = 0; lo < stride; ++lo)
                        s += rho(n * bdim + (hi * 3 + a) * stride + lo,
                                 n * bdim + (hi * 3 + b) * stride + lo);
            out(a, b) = s;
        }
    return out;
}

double susceptibility(const CMatrix& rho, const FullModel& m, int alpha) {
    if (m.eit.omega_p == 0.0)
        throw std::domain_error("susceptibility: omega_p = 0");
    const CMatrix r = trace_to_background_atom(rho, m, alpha);
    return m.eit.gamma_p / m.eit.omega_p * r(kG, kE).imag();
}

CMatrix steady_state(const CMatrix& h, const std::vector<CMatrix>& ls) {
    const int d = h.dim();
    const int d2 = d * d;
    CMatrix lsum(d);
    std::vector<CMatrix> ldag;
    for (const auto& l : ls) {
        ldag.push_back(l.adjoint());
        lsum.add_product(ldag.back(), l);
    }
    CMatrix m(d2);
    auto vec = [d](int i, int j) { return i * d + j; };
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
                m(vec(i, j), vec(k, j)) += cd(0, -1) * h(i, k) - 0.5 * lsum(i, k);
                m(vec(i, j), vec(i, k)) += cd(0, 1) * h(k, j) - 0.5 * lsum(k, j);
            }
            for (const auto& l : ls)
                for (int k = 0; k < d; ++k)
                    for (int q = 0; q < d; ++q)
                        m(vec(i, j), vec(k, q)) += l(i, k) * std::conj(l(j, q));
        }
    // Replace the first row with the trace constraint.
    for (int c = 0; c < d2; ++c) m(0, c) = 0;
    for (int k = 0; k < d; ++k) m(0, vec(k, k)) = 1;
    std::vector<cd> b(d2, 0.0);
    b[0] = 1.0;
    lu_solve(std::move(m), b);
    CMatrix rho(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) rho(i, j) = b[vec(i, j)];
    return rho;
}

namespace {

DephasingFit loglinear_fit(const std::vector<double>& t, const std::vector<double>& c) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const size_t n = t.size();
    for (size_t i = 0; i < n; ++i) {
        const double x = t[i], y = std::log(c[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    DephasingFit fit;
    if (denom == 0) {
        fit.warning = "degenerate time axis";
        return fit;
    }
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    fit.gamma = -slope;
    double ssr = 0, sst = 0;
    const double ymean = sy / n;
    for (size_t i = 0; i < n; ++i) {
        const double y = std::log(c[i]);
        const double yfit = intercept + slope * t[i];
        ssr += (y - yfit) * (y - yfit);
        sst += (y - ymean) * (y - ymean);
    }
    fit.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
    return fit;
}

}  // namespace

DephasingFit fit_dephasing_rate(const std::vector<double>& t, const std::vector<double>& c,
                                double head_discard, double floor_abs) {
    if (t.size() != c.size() || t.size() < 10)
        throw std::invalid_argument("fit_dephasing_rate: need >= 10 samples");
    for (double v : c)
        if (!(v > 1e-12))
            throw std::invalid_argument("fit_dephasing_rate: coherence modulus below 1e-12");

    const size_t first = static_cast<size_t>(std::floor(head_discard * t.size()));
    size_t last = t.size();
    for (size_t i = first; i < t.size(); ++i)
        if (c[i] < floor_abs) { last = i; break; }
    if (last - first < 2) last = std::min(t.size(), first + 2);

    std::vector<double> tw(t.begin() + first, t.begin() + last);
    std::vector<double> cw(c.begin() + first, c.begin() + last);
    DephasingFit fit = loglinear_fit(tw, cw);

    // Detect a dressed-state beat: if the modulus rebounds substantially
    // after its running minimum, the plain fit chases the oscillation.
    // Refit through the upper envelope (running local maxima) instead; the
    // window selection is what "configurable window" buys us.
    double cmin = cw.front(), rebound = 0, drop = 0;
    for (double v : cw) {
        cmin = std::min(cmin, v);
        rebound = std::max(rebound, v - cmin);
        drop = std::max(drop, cw.front() - cmin);
    }
    if (drop > 0 && rebound > 0.2 * drop) {
        std::vector<double> te, ce;
        te.push_back(tw.front());
        ce.push_back(cw.front());
        for (size_t i = 1; i + 1 < tw.size(); ++i)
            if (cw[i] >= cw[i - 1] && cw[i] >= cw[i + 1]) {
                te.push_back(tw[i]);
                ce.push_back(cw[i]);
            }
        if (te.size() >= 3) {
            fit = loglinear_fit(te, ce);
            fit.warning = "oscillatory series, fitted the envelope";
        } else {
            fit.warning = "non-monotone series beyond noise";
        }
    } else if (fit.r2 < 0.9) {
        fit.warning = "low R^2, series not cleanly exponential";
    }
    return fit;
}

Vec3 benchmark_bg_position(double r, double d) { return Vec3{-0.5 * r, d, 0.0}; }

namespace {

// One full-model benchmark cell: dimer at separation r, one background atom.
double cell_gamma_full(double r, double d, const EitParams& eit,
                       const InteractionParams& inter, const GammaMapOptions& opts,
                       double* r2_out) {
    FullModel m;
    m.n_ryd = 2;
    m.ryd_positions = {{-0.5 * r, 0, 0}, {0.5 * r, 0, 0}};
    m.bg_positions = {benchmark_bg_position(r, d)};
    m.eit = eit;
    m.inter = inter;
    const CMatrix h = m.hamiltonian();
    const auto ls = m.decay_ops();

    const int bdim = m.bg_dim();
    FullState st{CMatrix(m.dim()), 0.0};
    // (|pi1> + |pi2>)/sqrt(2) (x) |g...g>
    const int i1 = 0 * bdim + 0, i2 = 1 * bdim + 0;
    st.rho(i1, i1) = 0.5;
    st.rho(i1, i2) = 0.5;
    st.rho(i2, i1) = 0.5;
    st.rho(i2, i2) = 0.5;

    std::vector<double> ts, cs;
    EvolveOptions eopts;
    eopts.dt_factor = opts.dt_factor;
    eopts.output_every = opts.sample_every;
    // Segmented evolution: once the coherence is below the fit floor the
    // remaining samples cannot enter the fit window.
    for (double seg_end = 1.0; st.t < opts.t_final - 1e-9; seg_end += 1.0) {
        eopts.t_final = std::min(seg_end, opts.t_final);
        evolve_full(st, h, ls, eopts, [&](const FullState& s) {
            if (!ts.empty() && s.t <= ts.back() + 1e-9) return;
            const CMatrix rd = trace_out_background(s.rho, m);
            ts.push_back(s.t);
            cs.push_back(std::max(std::abs(rd(0, 1)), 1e-11));
        });
        if (cs.back() < 5e-4) break;
    }
    const DephasingFit fit = fit_dephasing_rate(ts, cs);
    if (r2_out) *r2_out = fit.r2;
    return fit.gamma;
}

double cell_gamma_effective(double r, double d, const EitParams& eit,
                            const InteractionParams& inter, const GammaMapOptions& opts,
                            double* r2_out) {
    const auto eff = effective_operators_dimer(eit, inter, r, benchmark_bg_position(r, d));
    const double w = inter.c3_dd / (r * r * r);
    CMatrix h(2), l(2);
    h(0, 1) = w;
    h(1, 0) = w;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            h(i, j) += eff.h[i * 2 + j];
            l(i, j) = eff.l[i * 2 + j];
        }
    FullState st{CMatrix(2), 0.0};
    st.rho(0, 0) = st.rho(0, 1) = st.rho(1, 0) = st.rho(1, 1) = 0.5;
    std::vector<double> ts, cs;
    EvolveOptions eopts;
    eopts.t_final = opts.t_final;
    eopts.dt_factor = std::min(opts.dt_factor, 0.1);
    eopts.output_every = opts.sample_every;
    evolve_full(st, h, {l}, eopts, [&](const FullState& s) {
        ts.push_back(s.t);
        cs.push_back(std::max(std::abs(s.rho(0, 1)), 1e-11));
    });
    const DephasingFit fit = fit_dephasing_rate(ts, cs);
    if (r2_out) *r2_out = fit.r2;
    return fit.gamma;
}

GammaMapResult run_map(const std::vector<double>& r_list, const std::vector<double>& d_list,
                       const std::function<double(double, double, double*)>& cell) {
    GammaMapResult out;
    out.r = r_list;
    out.d = d_list;
    out.gamma.assign(r_list.size() * d_list.size(), 0.0);
    out.r2.assign(out.gamma.size(), 0.0);
    parallel_for_each(0, out.gamma.size(), [&](size_t idx) {
        const size_t ir = idx / d_list.size(), id = idx % d_list.size();
        out.gamma[idx] = cell(r_list[ir], d_list[id], &out.r2[idx]);
    });
    return out;
}

}  // namespace

GammaMapResult gamma_map_full(const std::vector<double>& r_list,
                              const std::vector<double>& d_list, const EitParams& eit,
                              const InteractionParams& inter, const GammaMapOptions& opts) {
    return run_map(r_list, d_list, [&](double r, double d, double* r2) {
        return cell_gamma_full(r, d, eit, inter, opts, r2);
    });
}

GammaMapResult gamma_map_effective(const std::vector<double>& r_list,
                                   const std::vector<double>& d_list, const EitParams& eit,
                                   const InteractionParams& inter,
                                   const GammaMapOptions& opts) {
    return run_map(r_list, d_list, [&](double r, double d, double* r2) {
        return cell_gamma_effective(r, d, eit, inter, opts, r2);
    });
}

}  // namespace dsim
