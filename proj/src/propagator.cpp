#include "eeqt/propagator.hpp"

#include <numeric>
#include <stdexcept>

#include "eeqt/fourier.hpp"

namespace eeqt {

double EvolutionRecord::window_loss(int j) const {
    return dtau * std::accumulate(rate[j].begin(), rate[j].end(), 0.0);
}

double EvolutionRecord::wall_loss() const {
    return dtau * std::accumulate(wall_rate.begin(), wall_rate.end(), 0.0);
}

std::vector<double> EvolutionRecord::cumulative_loss() const {
    std::vector<double> c(wall_rate.size() + 1, 0.0);
    for (size_t m = 0; m < wall_rate.size(); ++m) {
        double step = 0.0;
        for (const auto& r : rate) step += r[m];
        c[m + 1] = c[m] + dtau * step;
    }
    return c;
}

namespace {

struct Op {
    enum Kind { Spectral, Damp } kind;
    double dt = 0.0;   // Spectral: propagation time
    int window = -1;   // Damp: window index
};

// Symmetric per-step operator sequence. Shifted windows are damped inside a
// T^-1 ... T conjugation; adjacent spectral factors are merged.
std::vector<Op> build_sequence(std::span<const CouplingWindow> windows, double dtau) {
    // One unit per window: a bare half-damp, or T^-1..T conjugated for shifted
    // windows. The mirror half reverses the unit order but keeps each
    // conjugation sandwich intact.
    std::vector<std::vector<Op>> units;
    for (int j = 0; j < static_cast<int>(windows.size()); ++j) {
        if (windows[j].frame_shift == 0.0) units.push_back({{Op::Damp, 0.0, j}});
    }
    for (int j = 0; j < static_cast<int>(windows.size()); ++j) {
        const double s = windows[j].frame_shift;
        if (s != 0.0)
            units.push_back({{Op::Spectral, -s, -1}, {Op::Damp, 0.0, j}, {Op::Spectral, s, -1}});
    }
    std::vector<Op> ops;
    for (const auto& u : units) ops.insert(ops.end(), u.begin(), u.end());
    ops.push_back({Op::Spectral, dtau, -1});
    for (auto it = units.rbegin(); it != units.rend(); ++it)
        ops.insert(ops.end(), it->begin(), it->end());

    std::vector<Op> merged;
    for (const Op& op : ops) {
        if (op.kind == Op::Spectral && !merged.empty() && merged.back().kind == Op::Spectral)
            merged.back().dt += op.dt;
        else
            merged.push_back(op);
    }
    std::erase_if(merged, [](const Op& op) { return op.kind == Op::Spectral && op.dt == 0.0; });
    return merged;
}

struct PreparedDamp {
    int lo = 0, hi = 0;
    std::vector<double> amp;       // exp(-h g^2 / 2) over the support
    std::vector<double> absorbed;  // 1 - amp^2
};

PreparedDamp prepare_damp(const CouplingWindow& w, double h) {
    PreparedDamp d;
    d.lo = w.lo;
    d.hi = w.hi;
    d.amp.resize(w.hi - w.lo);
    d.absorbed.resize(w.hi - w.lo);
    for (int i = w.lo; i < w.hi; ++i) {
        const double a = std::exp(-h * w.g[i] * w.g[i] / 2.0);
        d.amp[i - w.lo] = a;
        d.absorbed[i - w.lo] = 1.0 - a * a;
    }
    return d;
}

// Applies the damp and returns the norm^2 removed (exact pointwise algebra).
double apply_damp(SpinorSlice& omega, const PreparedDamp& d) {
    double loss = 0.0;
    for (int i = d.lo; i < d.hi; ++i) {
        loss += d.absorbed[i - d.lo] * omega.node_density(i);
        cplx* p = omega.values.data() + 4 * static_cast<size_t>(i);
        const double a = d.amp[i - d.lo];
        p[0] *= a; p[1] *= a; p[2] *= a; p[3] *= a;
    }
    return omega.grid.dx * loss;
}

struct Stepper {
    std::vector<Op> ops;
    std::vector<PreparedDamp> damps;  // indexed by window
    double mhat;

    Stepper(std::span<const CouplingWindow> windows, const ModelParams& params, double dtau)
        : ops(build_sequence(windows, dtau)), mhat(params.mhat) {
        for (const auto& w : windows) damps.push_back(prepare_damp(w, dtau / 2.0));
    }

    // losses: per-window norm^2 removed in this step (accumulated in place)
    void step(SpinorSlice& omega, double* losses) {
        for (const Op& op : ops) {
            if (op.kind == Op::Spectral) {
                spectral_propagate(omega.values, omega.grid.n, omega.grid.dx, mhat, op.dt);
            } else {
                const double l = apply_damp(omega, damps[op.window]);
                if (losses) losses[op.window] += l;
            }
        }
    }
};

double zero_walls(SpinorSlice& omega) {
    const int n = omega.grid.n;
    double loss = omega.grid.dx * (omega.node_density(0) + omega.node_density(n - 1));
    for (int c = 0; c < 4; ++c) {
        omega.at(0, c) = 0.0;
        omega.at(n - 1, c) = 0.0;
    }
    return loss;
}

}  // namespace

SpinorSlice damped_step(const SpinorSlice& omega, std::span<const CouplingWindow> windows,
                        const ModelParams& params, double dtau) {
    SpinorSlice out = omega;
    Stepper stepper(windows, params, dtau);
    stepper.step(out, nullptr);
    out.label += dtau;
    return out;
}

SpinorSlice translation_T(const SpinorSlice& omega, const ModelParams& params, double distance) {
    return free_propagate(omega, params, distance);
}

EvolutionRecord evolve(SpinorSlice& omega, std::span<const CouplingWindow> windows,
                       const GridSpec& spec, const ModelParams& params, const EvolveOptions& opts) {
    const double dtau = spec.step();
    const int n_steps = static_cast<int>(std::lround((spec.tau_cut - opts.tau_start) / dtau));
    if (n_steps < 0) throw std::invalid_argument("evolve: tau_start beyond tau_cut");

    double n2 = omega.norm2();
    if (!opts.conditional && std::abs(n2 - 1.0) > 1e-8)
        throw std::invalid_argument("evolve: initial state not normalized");

    EvolutionRecord rec;
    rec.dtau = dtau;
    rec.tau_start = opts.tau_start;
    rec.tau.reserve(n_steps + 1);
    rec.norm2.reserve(n_steps + 1);
    rec.rate.assign(windows.size(), std::vector<double>(n_steps, 0.0));
    rec.wall_rate.assign(n_steps, 0.0);
    rec.tau.push_back(opts.tau_start);
    rec.norm2.push_back(n2);

    Stepper stepper(windows, params, dtau);
    std::vector<double> losses(windows.size());
    double wall_total = 0.0;
    for (int m = 0; m < n_steps; ++m) {
        std::fill(losses.begin(), losses.end(), 0.0);
        stepper.step(omega, losses.data());
        const double wall = zero_walls(omega);
        omega.label += dtau;
        wall_total += wall;

        const double n2_new = omega.norm2();
        if (n2_new > n2 + 1e-10)
            throw std::runtime_error("evolve: norm increased, numerical instability");
        n2 = n2_new;

        rec.tau.push_back(opts.tau_start + dtau * (m + 1));
        rec.norm2.push_back(n2);
        for (size_t j = 0; j < windows.size(); ++j) rec.rate[j][m] = losses[j] / dtau;
        rec.wall_rate[m] = wall / dtau;
        if (opts.observer) opts.observer(m, omega);
    }
    rec.leakage_warning = wall_total > 1e-4;
    return rec;
}

}  // namespace eeqt
