#include "eeqt/traversal.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace eeqt {

PhaseARun run_phase_a(const InitialStateSpec& initial, const DetectorSpec& d1,
                      const DetectorSpec& d2, const GridSpec& gridspec,
                      const ModelParams& params, int tau1_stride) {
    if (!(initial.x0 < d1.x_pos && d1.x_pos < d2.x_pos))
        throw std::invalid_argument("traversal: need x0 < x1 < x2");
    if (d1.destructive) throw std::invalid_argument("traversal: D1 must be non-destructive");
    if (!d2.destructive) throw std::invalid_argument("traversal: D2 must be destructive");
    if (tau1_stride < 1) throw std::invalid_argument("traversal: stride must be >= 1");

    PhaseARun a;
    a.gridspec = gridspec;
    a.params = params;
    a.initial = initial;
    a.d1 = d1;
    a.d2 = d2;
    a.stride = tau1_stride;
    a.separation = d2.x_pos - d1.x_pos;

    const Grid grid = gridspec.make_grid();
    a.w1 = make_window(d1, grid, params);
    a.w2 = make_window(d2, grid, params);
    a.w2.frame_shift = a.separation;

    SpinorSlice omega = build_initial_state(initial, params, grid, initial.x0 - d1.x_pos);

    std::array<CouplingWindow, 2> windows{a.w1, a.w2};
    EvolveOptions opts;
    opts.observer = [&a](int step, const SpinorSlice& s) {
        const int boundary = step + 1;
        if (boundary % a.stride != 0) return;
        std::vector<cplx> m(4 * static_cast<size_t>(a.w1.hi - a.w1.lo));
        for (int i = a.w1.lo; i < a.w1.hi; ++i)
            for (int c = 0; c < 4; ++c)
                m[4 * static_cast<size_t>(i - a.w1.lo) + c] = a.w1.g[i] * s.at(i, c);
        a.masked.emplace(boundary, std::move(m));
    };
    a.rec = evolve(omega, windows, gridspec, params, opts);
    return a;
}

SpinorSlice collapsed_state(const PhaseARun& a, int boundary_step) {
    const auto it = a.masked.find(boundary_step);
    if (it == a.masked.end())
        throw std::invalid_argument("collapsed_state: no snapshot at this boundary");
    const Grid grid = a.gridspec.make_grid();
    SpinorSlice phi(grid, a.rec.tau_start + a.rec.dtau * boundary_step);
    double n2 = 0.0;
    for (size_t q = 0; q < it->second.size(); ++q) n2 += std::norm(it->second[q]);
    n2 *= grid.dx;
    if (!(n2 > 0.0))
        throw std::runtime_error("collapsed_state: vanishing D1 overlap at this boundary");
    const double inv = 1.0 / std::sqrt(n2);
    for (int i = a.w1.lo; i < a.w1.hi; ++i)
        for (int c = 0; c < 4; ++c)
            phi.at(i, c) = inv * it->second[4 * static_cast<size_t>(i - a.w1.lo) + c];
    // re-anchor to the D2 frame
    return translation_T(phi, a.params, -a.separation);
}

BranchRun launch_branch(const PhaseARun& a, int boundary_step) {
    BranchRun b;
    b.boundary_step = boundary_step;
    b.tau1 = a.rec.dtau * boundary_step;

    SpinorSlice phi = collapsed_state(a, boundary_step);
    CouplingWindow w2 = a.w2;
    w2.frame_shift = 0.0;  // phase B is co-moving with D2

    EvolveOptions opts;
    opts.conditional = true;
    opts.tau_start = b.tau1;
    b.rec = evolve(phi, std::span(&w2, 1), a.gridspec, a.params, opts);
    b.P_inf = b.rec.window_loss(0);
    b.final_norm2 = phi.norm2();
    b.wall_loss = b.rec.wall_loss();
    return b;
}

namespace {

// Deposits (t, w) into the histogram splitting linearly between the two
// neighboring bins; preserves total mass and first moment exactly.
void deposit(std::vector<double>& hist, double t_lo, double bin, double t, double w) {
    const double f = (t - t_lo) / bin - 0.5;
    const auto q0 = static_cast<long>(std::floor(f));
    const double frac = f - static_cast<double>(q0);
    if (q0 >= 0 && q0 + 1 < static_cast<long>(hist.size())) {
        hist[q0] += w * (1.0 - frac);
        hist[q0 + 1] += w * frac;
    } else if (q0 == -1 && !hist.empty()) {
        hist[0] += w;  // safety net; the histogram range makes this unreachable
    } else if (q0 + 1 == static_cast<long>(hist.size())) {
        hist[q0] += w;
    }
}

}  // namespace

TraversalResult run_traversal(const InitialStateSpec& initial, const DetectorSpec& d1,
                              const DetectorSpec& d2, const GridSpec& gridspec,
                              const ModelParams& params, int tau1_stride, int n_threads) {
    PhaseARun a = run_phase_a(initial, d1, d2, gridspec, params, tau1_stride);
    const double dtau = a.rec.dtau;
    const double sep = a.separation;
    const int n_steps = a.rec.n_steps();

    TraversalResult res;
    res.initial = initial;
    res.d1 = d1;
    res.d2 = d2;
    res.grid = gridspec;
    res.params = params;
    res.tau1_stride = tau1_stride;
    res.P_inf_1 = a.rec.window_loss(0);
    res.P_inf_2_first = a.rec.window_loss(1);
    res.wall_loss = a.rec.wall_loss();
    res.leakage_warning = a.rec.leakage_warning;

    // support of p1 above 1e-6 of its peak
    const std::vector<double>& u1 = a.p1_raw();
    double peak = 0.0;
    for (double u : u1) peak = std::max(peak, u);
    int first = n_steps, last = -1;
    for (int m = 0; m < n_steps; ++m) {
        if (u1[m] > 1e-6 * peak) {
            first = std::min(first, m);
            last = m;
        }
    }
    std::vector<int> boundaries;
    for (int b = tau1_stride; b <= n_steps; b += tau1_stride)
        if (b > first && b <= last + 1 && a.masked.count(b)) boundaries.push_back(b);
    if (static_cast<int>(boundaries.size()) < 8)
        throw std::invalid_argument("run_traversal: stride too coarse, p1 support has < 8 branches");

    // branch evolutions, parallel over boundaries
    std::vector<BranchRun> branches(boundaries.size());
    int workers = n_threads > 0 ? n_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, static_cast<int>(boundaries.size()));
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < boundaries.size(); i = next.fetch_add(1)) {
                try {
                    branches[i] = launch_branch(a, boundaries[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    // deterministic reduction ordered by tau1
    res.joint.dtau = dtau;
    res.joint.stride = tau1_stride;
    const double bin = tau1_stride * dtau;
    // pad one bin below the light cone so the linear deposit never clips and
    // the histogram first moment matches T_t0 to round-off
    const double t_lo = -sep - bin;
    const auto n_bins = static_cast<size_t>(std::ceil((gridspec.tau_cut - t_lo) / bin)) + 2;
    std::vector<double> hist(n_bins, 0.0);
    double p12 = 0.0, t_num = 0.0;
    for (size_t i = 0; i < branches.size(); ++i) {
        const BranchRun& b = branches[i];
        const int bd = b.boundary_step;
        const double f1 = 0.5 * (u1[bd - 1] + u1[std::min(bd, n_steps - 1)]);
        const double w = f1 * tau1_stride * dtau;
        res.joint.tau1.push_back(b.tau1);
        res.joint.weight.push_back(w);
        res.joint.branch_P_inf.push_back(b.P_inf);
        res.joint.conditional.push_back(b.rec.rate[0]);
        p12 += w * b.P_inf;
        for (int s = 0; s < b.rec.n_steps(); ++s) {
            const double t = b.rec.tau_mid(s) - b.tau1 - sep;
            const double mass = w * b.rec.rate[0][s] * dtau;
            t_num += mass * t;
            deposit(hist, t_lo, bin, t, mass);
        }
    }
    res.P_inf_12 = p12;
    if (res.P_inf_12 < 1e-10)
        throw std::runtime_error("run_traversal: no double detection (P_inf_12 < 1e-10)");
    res.T_t0 = t_num / p12;

    res.rest_density.spacing = bin;
    res.rest_density.total_mass = p12;
    for (size_t q = 0; q < hist.size(); ++q) {
        res.rest_density.abscissa.push_back(t_lo + bin * (q + 0.5));
        res.rest_density.density.push_back(hist[q] / (p12 * bin));
    }
    return res;
}

std::pair<DensityCurve, double> boost_traversal(const TraversalResult& result, double v_over_c) {
    if (!(std::abs(v_over_c) < 1.0))
        throw std::domain_error("boost_traversal: |v/c| must be < 1");
    const double root = std::sqrt(1.0 - v_over_c * v_over_c);
    const double sep = result.d2.x_pos - result.d1.x_pos;

    DensityCurve rho;
    rho.spacing = result.rest_density.spacing / root;
    rho.frame_velocity = v_over_c;
    rho.total_mass = result.rest_density.total_mass;
    for (size_t i = 0; i < result.rest_density.density.size(); ++i) {
        rho.abscissa.push_back((result.rest_density.abscissa[i] - v_over_c * sep) / root);
        rho.density.push_back(root * result.rest_density.density[i]);
    }
    const double mean = (result.T_t0 - v_over_c * sep) / root;
    return {std::move(rho), mean};
}

std::pair<double, double> traversal_error_bars(const TraversalResult& run_b,
                                               const TraversalResult& run_a) {
    const auto same = [](double x, double y) { return std::abs(x - y) < 1e-12; };
    if (!same(run_b.initial.p0, run_a.initial.p0) || !same(run_b.d1.x_pos, run_a.d1.x_pos) ||
        !same(run_b.d2.x_pos, run_a.d2.x_pos) || !same(run_b.d1.width, run_a.d1.width) ||
        !same(run_b.d2.width, run_a.d2.width) || run_b.initial.kind != run_a.initial.kind)
        throw std::invalid_argument("traversal_error_bars: runs differ in more than the step size");
    const double dxb = run_b.grid.dx, dxa = run_a.grid.dx;
    return {richardson_error(run_b.T_t0, run_a.T_t0, dxb, dxa),
            richardson_error(run_b.P_inf_12, run_a.P_inf_12, dxb, dxa)};
}

}  // namespace eeqt
