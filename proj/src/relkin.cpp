#include "eeqt/relkin.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>

#include "eeqt/fourier.hpp"

namespace eeqt {

Mat4 gamma(int index) {
    Mat4 g{};
    const cplx i1(0.0, 1.0);
    switch (index) {
        case 0:
            g[0] = 1.0; g[5] = 1.0; g[10] = -1.0; g[15] = -1.0;
            break;
        case 1:
            g[3] = 1.0; g[6] = 1.0; g[9] = -1.0; g[12] = -1.0;
            break;
        case 2:
            g[3] = -i1; g[6] = i1; g[9] = i1; g[12] = -i1;
            break;
        case 3:
            g[2] = 1.0; g[7] = -1.0; g[8] = -1.0; g[13] = 1.0;
            break;
        default:
            throw std::invalid_argument("gamma: index must be 0..3");
    }
    return g;
}

double bump_profile(double k, double delta_k) {
    if (!(delta_k > 0.0)) throw std::invalid_argument("bump_profile: delta_k must be > 0");
    const double u = k / delta_k;
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-u * u / (1.0 - u * u));
}

namespace {

// One momentum-integral term: spinor weights w0(k), w3(k) on components 0 and 3
// with phase exp(i*sign*(k*(x-x0) - E(k)*t)).
struct SpectralTerm {
    double k_lo, k_hi;
    int sign;
    double prefactor;
    // envelope as a function of k
    double (*envelope)(double k, double center, double width);
    double center, width;
    bool positive_branch;  // (E+m,0,0,k) vs (E-m,0,0,k)
};

double bump_env(double k, double center, double width) {
    return bump_profile(k - center, width);
}
double gauss_env(double k, double center, double width) {
    const double d = (k - center) * width;
    return std::exp(-d * d);
}

void accumulate_term(SpinorSlice& out, const SpectralTerm& t, const ModelParams& par,
                     double x0, double eval_time, int nk) {
    const Grid& g = out.grid;
    const double dk = (t.k_hi - t.k_lo) / (nk - 1);
    for (int j = 0; j < nk; ++j) {
        const double k = t.k_lo + dk * j;
        double w = t.envelope(k, t.center, t.width) * dk;
        if (j == 0 || j == nk - 1) w *= 0.5;
        if (w == 0.0) continue;
        const double e = par.energy(k);
        const double a0 = t.prefactor * w * (t.positive_branch ? e + par.mhat : e - par.mhat) / (2.0 * e);
        const double a3 = t.prefactor * w * k / (2.0 * e);
        const double s = static_cast<double>(t.sign);
        const cplx base = std::polar(1.0, s * (k * (g.x_min - x0) - e * eval_time));
        const cplx mult = std::polar(1.0, s * k * g.dx);
        cplx ph = base;
        cplx* p = out.values.data();
        for (int i = 0; i < g.n; ++i, p += 4) {
            p[0] += a0 * ph;
            p[3] += a3 * ph;
            ph *= mult;
        }
    }
}

SpinorSlice build_raw(const InitialStateSpec& spec, const ModelParams& par, const Grid& grid,
                      double eval_time, int nk) {
    SpinorSlice out(grid, eval_time);
    const double p0k = spec.p0 * par.mhat;  // mean wavenumber in 1/Angstrom
    std::vector<SpectralTerm> terms;
    if (spec.kind == StateKind::PositiveEnergy) {
        terms.push_back({p0k - spec.delta_k, p0k + spec.delta_k, +1, 1.0, bump_env,
                         p0k, spec.delta_k, true});
    } else if (spec.kind == StateKind::NegativeEnergy) {
        terms.push_back({p0k - spec.delta_k, p0k + spec.delta_k, -1, 1.0, bump_env,
                         p0k, spec.delta_k, false});
    } else {
        const double pref = std::sqrt(2.0 * spec.eta) / std::pow(2.0 * std::numbers::pi, 0.75);
        const double span = 6.0 / spec.eta;
        terms.push_back({p0k - span, p0k + span, +1, pref, gauss_env, p0k, spec.eta, true});
        terms.push_back({-p0k - span, -p0k + span, -1, pref, gauss_env, -p0k, spec.eta, false});
    }
    for (const auto& t : terms) accumulate_term(out, t, par, spec.x0, eval_time, nk);
    return out;
}

}  // namespace

SpinorSlice build_initial_state(const InitialStateSpec& spec, const ModelParams& params,
                                const Grid& grid, double eval_time) {
    if (!(spec.delta_k > 0.0) || !(spec.eta > 0.0))
        throw std::invalid_argument("build_initial_state: delta_k and eta must be > 0");

    // Refine the momentum quadrature until norm2 is stable to 1e-10.
    int nk = 1537;
    SpinorSlice slice = build_raw(spec, params, grid, eval_time, nk);
    double n2 = slice.norm2();
    for (int iter = 0; iter < 7; ++iter) {
        const int nk2 = 2 * nk - 1;
        SpinorSlice finer = build_raw(spec, params, grid, eval_time, nk2);
        const double n2f = finer.norm2();
        const bool converged = std::abs(n2f - n2) < 1e-10 * std::max(n2f, 1e-30);
        slice = std::move(finer);
        n2 = n2f;
        nk = nk2;
        if (converged) break;
    }

    double peak = 0.0;
    for (int i = 0; i < grid.n; ++i) peak = std::max(peak, slice.node_density(i));
    const double wall = std::max(slice.node_density(0), slice.node_density(grid.n - 1));
    const double leak_amp = std::sqrt(wall / std::max(peak, 1e-300));
    if (leak_amp > 1e-3)
        throw std::runtime_error("build_initial_state: packet touches grid wall, relative amplitude " +
                                 std::to_string(leak_amp));

    if (spec.kind != StateKind::Mixed) slice.scale(1.0 / std::sqrt(n2));
    return slice;
}

SpinorSlice charge_conjugate(const SpinorSlice& psi) {
    SpinorSlice out(psi.grid, psi.label);
    for (int i = 0; i < psi.grid.n; ++i) {
        out.at(i, 0) = std::conj(psi.at(i, 3));
        out.at(i, 1) = -std::conj(psi.at(i, 2));
        out.at(i, 2) = -std::conj(psi.at(i, 1));
        out.at(i, 3) = std::conj(psi.at(i, 0));
    }
    return out;
}

SpinorSlice free_propagate(const SpinorSlice& psi, const ModelParams& params, double dt) {
    SpinorSlice out = psi;
    spectral_propagate(out.values, out.grid.n, out.grid.dx, params.mhat, dt);
    out.label += dt;
    return out;
}

namespace {

cplx current_density(const SpinorSlice& a, const SpinorSlice& b, int i, double alpha) {
    // j^0 - alpha*j^1 at node i; gamma^0 gamma^1 is the antidiagonal permutation.
    cplx j0 = 0.0, j1 = 0.0;
    for (int c = 0; c < 4; ++c) j0 += std::conj(a.at(i, c)) * b.at(i, c);
    j1 += std::conj(a.at(i, 0)) * b.at(i, 3);
    j1 += std::conj(a.at(i, 1)) * b.at(i, 2);
    j1 += std::conj(a.at(i, 2)) * b.at(i, 1);
    j1 += std::conj(a.at(i, 3)) * b.at(i, 0);
    return j0 - alpha * j1;
}

}  // namespace

cplx scalar_product(const SpinorSlice& a, const SpinorSlice& b, const ModelParams& params,
                    const Hyperplane& plane) {
    if (!a.grid.same_as(b.grid))
        throw std::invalid_argument("scalar_product: slices must share a grid");
    if (!(std::abs(plane.alpha) < 1.0))
        throw std::domain_error("scalar_product: |alpha| must be < 1");

    const Grid& g = a.grid;
    if (plane.alpha == 0.0) {
        SpinorSlice pa = (a.label == plane.y0) ? a : free_propagate(a, params, plane.y0 - a.label);
        SpinorSlice pb = (b.label == plane.y0) ? b : free_propagate(b, params, plane.y0 - b.label);
        cplx s = 0.0;
        for (int i = 0; i < g.n; ++i) s += current_density(pa, pb, i, 0.0);
        return g.dx * s;
    }

    // Walk the plane in order of increasing time, resampling incrementally.
    const bool ascending = plane.alpha > 0.0;
    const int first = ascending ? 0 : g.n - 1;
    const double t_first = plane.y0 + plane.alpha * (g.x(first) - plane.y1);
    SpinorSlice pa = free_propagate(a, params, t_first - a.label);
    SpinorSlice pb = free_propagate(b, params, t_first - b.label);
    const double dt = std::abs(plane.alpha) * g.dx;
    cplx s = 0.0;
    for (int step = 0; step < g.n; ++step) {
        const int i = ascending ? step : g.n - 1 - step;
        if (step > 0) {
            pa = free_propagate(pa, params, dt);
            pb = free_propagate(pb, params, dt);
        }
        s += current_density(pa, pb, i, plane.alpha);
    }
    return g.dx * s;
}

}  // namespace eeqt
