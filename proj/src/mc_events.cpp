#include "eeqt/mc_events.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eeqt {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Inverts a cumulative loss curve at level r in [0, cum.back()); returns the
// step index and the fraction through it.
std::pair<int, double> invert_cumulative(const std::vector<double>& cum, double r) {
    const auto it = std::upper_bound(cum.begin(), cum.end(), r);
    int m = static_cast<int>(it - cum.begin()) - 1;
    m = std::clamp(m, 0, static_cast<int>(cum.size()) - 2);
    const double span = cum[m + 1] - cum[m];
    const double frac = span > 0.0 ? std::clamp((r - cum[m]) / span, 0.0, 1.0) : 0.5;
    return {m, frac};
}

void assert_forward_cone(const EventRecord& ev, double x0) {
    const double dt = ev.t, dxx = ev.x - x0;
    if (dt < 0.0 && dt * dt > dxx * dxx)
        throw std::logic_error("event lies in the backward light cone of the preparation");
}

}  // namespace

double RngStream::uniform() {
    const std::uint64_t v = splitmix64(splitmix64(seed) ^ splitmix64(counter++));
    return static_cast<double>(v >> 11) * 0x1.0p-53;
}

EventSampler::EventSampler(const InitialStateSpec& initial, std::vector<DetectorSpec> detectors,
                           const GridSpec& gridspec, const ModelParams& params,
                           int snapshot_stride)
    : initial_(initial),
      detectors_(std::move(detectors)),
      gridspec_(gridspec),
      params_(params),
      snapshot_stride_(snapshot_stride) {
    const Grid grid = gridspec_.make_grid();
    init(build_initial_state(initial_, params_, grid, initial_.x0 - detectors_[0].x_pos));
}

EventSampler::EventSampler(const SpinorSlice& omega0, std::vector<DetectorSpec> detectors,
                           const GridSpec& gridspec, const ModelParams& params, double x0,
                           int snapshot_stride)
    : detectors_(std::move(detectors)),
      gridspec_(gridspec),
      params_(params),
      snapshot_stride_(snapshot_stride) {
    initial_.x0 = x0;
    init(omega0);
}

void EventSampler::init(SpinorSlice omega) {
    if (detectors_.empty()) throw std::invalid_argument("EventSampler: no detectors");
    if (snapshot_stride_ < 1) throw std::invalid_argument("EventSampler: stride must be >= 1");

    const Grid grid = gridspec_.make_grid();
    const double anchor = detectors_[0].x_pos;
    for (const DetectorSpec& d : detectors_) {
        CouplingWindow w = make_window(d, grid, params_);
        w.frame_shift = d.x_pos - anchor;
        windows_.push_back(std::move(w));
    }

    masked_.resize(windows_.size());
    EvolveOptions opts;
    opts.observer = [this](int step, const SpinorSlice& s) {
        const int boundary = step + 1;
        if (boundary % snapshot_stride_ != 0) return;
        for (size_t j = 0; j < windows_.size(); ++j) {
            const CouplingWindow& w = windows_[j];
            if (w.frame_shift != 0.0) continue;  // damping acts in a translated frame
            std::vector<cplx> m(4 * static_cast<size_t>(w.hi - w.lo));
            for (int i = w.lo; i < w.hi; ++i)
                for (int c = 0; c < 4; ++c)
                    m[4 * static_cast<size_t>(i - w.lo) + c] = w.g[i] * s.at(i, c);
            masked_[j].emplace(boundary, std::move(m));
        }
    };
    rec_ = evolve(omega, windows_, gridspec_, params_, opts);
    cum_total_ = rec_.cumulative_loss();
}

EventSampler::Sample EventSampler::sample(RngStream& rng, bool conditional) const {
    Sample out;
    const double total = cum_total_.back();
    double r = rng.uniform();
    if (conditional) {
        r *= total;
    } else if (r >= total) {
        return out;  // no event up to tau_cut
    }

    const auto [m, frac] = invert_cumulative(cum_total_, r);
    const double tau = rec_.tau_start + rec_.dtau * (m + frac);

    double rate_sum = 0.0;
    for (const auto& rj : rec_.rate) rate_sum += rj[m];
    double r2 = rng.uniform() * rate_sum;
    size_t j = 0;
    while (j + 1 < rec_.rate.size() && r2 >= rec_.rate[j][m]) r2 -= rec_.rate[j++][m];

    out.event.detector = static_cast<int>(j);
    out.event.tau = tau;
    std::tie(out.event.t, out.event.x) = detectors_[j].trajectory(tau, initial_.x0);
    out.event.terminal = detectors_[j].destructive;
    assert_forward_cone(out.event, initial_.x0);

    // collapse at the stored boundary nearest the event
    const int n = rec_.n_steps();
    int boundary = static_cast<int>(std::llround(tau / (rec_.dtau * snapshot_stride_))) *
                   snapshot_stride_;
    boundary = std::clamp(boundary, snapshot_stride_, (n / snapshot_stride_) * snapshot_stride_);
    const auto it = masked_[j].find(boundary);
    if (it != masked_[j].end()) {
        const Grid grid = gridspec_.make_grid();
        const CouplingWindow& w = windows_[j];
        SpinorSlice phi(grid, rec_.tau_start + rec_.dtau * boundary);
        double n2 = 0.0;
        for (const cplx& z : it->second) n2 += std::norm(z);
        n2 *= grid.dx;
        if (n2 > 0.0) {
            const double inv = 1.0 / std::sqrt(n2);
            for (int i = w.lo; i < w.hi; ++i)
                for (int c = 0; c < 4; ++c)
                    phi.at(i, c) = inv * it->second[4 * static_cast<size_t>(i - w.lo) + c];
            out.collapsed = std::move(phi);
        }
    }
    return out;
}

TraversalSampler::TraversalSampler(const InitialStateSpec& initial, const DetectorSpec& d1,
                                   const DetectorSpec& d2, const GridSpec& gridspec,
                                   const ModelParams& params, int tau1_stride)
    : a_(run_phase_a(initial, d1, d2, gridspec, params, tau1_stride)) {
    cum_total_ = a_.rec.cumulative_loss();
}

const std::vector<double>& TraversalSampler::branch_curve(int boundary) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = branch_cum_.find(boundary);
    if (it == branch_cum_.end()) {
        BranchRun b = launch_branch(a_, boundary);
        it = branch_cum_.emplace(boundary, b.rec.cumulative_loss()).first;
    }
    return it->second;
}

TraversalSampler::Chain TraversalSampler::sample_chain(RngStream& rng) const {
    Chain chain;
    const EvolutionRecord& rec = a_.rec;
    const double r1 = rng.uniform();
    if (r1 >= cum_total_.back()) return chain;  // no detection at all

    const auto [m, frac] = invert_cumulative(cum_total_, r1);
    const double tau1 = rec.dtau * (m + frac);
    const double rate_sum = rec.rate[0][m] + rec.rate[1][m];
    const bool d1_first = rng.uniform() * rate_sum < rec.rate[0][m];

    if (!d1_first) {
        EventRecord ev;
        ev.detector = 1;
        ev.tau = tau1;
        std::tie(ev.t, ev.x) = a_.d2.trajectory(tau1, a_.initial.x0);
        ev.terminal = true;
        assert_forward_cone(ev, a_.initial.x0);
        chain.events.push_back(ev);
        chain.bucket = Bucket::D2First;
        return chain;
    }

    EventRecord ev1;
    ev1.detector = 0;
    ev1.tau = tau1;
    std::tie(ev1.t, ev1.x) = a_.d1.trajectory(tau1, a_.initial.x0);
    ev1.terminal = false;
    assert_forward_cone(ev1, a_.initial.x0);
    chain.events.push_back(ev1);
    chain.bucket = Bucket::OnlyD1;

    const int n = rec.n_steps();
    int boundary =
        static_cast<int>(std::llround(tau1 / (rec.dtau * a_.stride))) * a_.stride;
    boundary = std::clamp(boundary, a_.stride, (n / a_.stride) * a_.stride);
    const std::vector<double>& cum2 = branch_curve(boundary);
    const double r2 = rng.uniform();
    if (r2 >= cum2.back()) return chain;

    const auto [m2, frac2] = invert_cumulative(cum2, r2);
    const double tau2 = rec.dtau * boundary + rec.dtau * (m2 + frac2);
    EventRecord ev2;
    ev2.detector = 1;
    ev2.tau = tau2;
    std::tie(ev2.t, ev2.x) = a_.d2.trajectory(tau2, a_.initial.x0);
    ev2.terminal = true;
    assert_forward_cone(ev2, a_.initial.x0);
    chain.events.push_back(ev2);
    chain.bucket = Bucket::Traversed;
    chain.traversal_t = tau2 - tau1 - a_.separation;
    return chain;
}

EventSampler::Sample sample_event(const InitialStateSpec& initial,
                                  const std::vector<DetectorSpec>& detectors,
                                  const GridSpec& gridspec, const ModelParams& params,
                                  RngStream& rng) {
    return EventSampler(initial, detectors, gridspec, params).sample(rng);
}

TraversalSampler::Chain sample_traversal_chain(const InitialStateSpec& initial,
                                               const DetectorSpec& d1, const DetectorSpec& d2,
                                               const GridSpec& gridspec, const ModelParams& params,
                                               int tau1_stride, RngStream& rng) {
    return TraversalSampler(initial, d1, d2, gridspec, params, tau1_stride).sample_chain(rng);
}

}  // namespace eeqt
