#ifndef EEQT_MC_EVENTS_HPP
#define EEQT_MC_EVENTS_HPP

#include <cstdint>
#include <mutex>
#include <optional>

#include "eeqt/traversal.hpp"

namespace eeqt {

// Counter-based uniform generator (splitmix64 over seed and counter); the
// same (seed, counter) pair yields the same variate on every platform.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    double uniform();
};

struct EventRecord {
    int detector = -1;   // classical state after the event; -1 = no event
    double tau = 0.0;    // proper time of the event, Angstrom/c
    double t = 0.0;      // spacetime point z_l(tau)
    double x = 0.0;
    bool terminal = false;

    bool no_event() const { return detector < 0; }
};

// Samples single detection events by norm-loss inversion. The damped evolution
// is deterministic, so it is computed once at construction; each sample only
// draws uniforms and inverts the cumulative loss curve.
class EventSampler {
  public:
    EventSampler(const InitialStateSpec& initial, std::vector<DetectorSpec> detectors,
                 const GridSpec& gridspec, const ModelParams& params, int snapshot_stride = 1);
    // Same sampler from a caller-prepared normalized slice (x0 locates the
    // preparation event for the trajectory time coordinates).
    EventSampler(const SpinorSlice& omega0, std::vector<DetectorSpec> detectors,
                 const GridSpec& gridspec, const ModelParams& params, double x0,
                 int snapshot_stride = 1);

    struct Sample {
        EventRecord event;
        // post-collapse normalized state; absent for no-event samples and for
        // detectors whose damping acts in a translated frame
        std::optional<SpinorSlice> collapsed;
    };

    // conditional = true samples given that some detection occurs.
    Sample sample(RngStream& rng, bool conditional = false) const;

    const EvolutionRecord& record() const { return rec_; }
    double total_loss() const { return cum_total_.back(); }

  private:
    InitialStateSpec initial_;
    std::vector<DetectorSpec> detectors_;
    GridSpec gridspec_;
    ModelParams params_;
    int snapshot_stride_;
    std::vector<CouplingWindow> windows_;
    EvolutionRecord rec_;
    std::vector<double> cum_total_;                        // boundaries
    std::vector<std::map<int, std::vector<cplx>>> masked_; // per detector (aligned only)

    void init(SpinorSlice omega);
};

// Samples D1-then-D2 chains. Phase A is computed once; phase B branches are
// keyed by the strided collapse boundary and cached lazily, so chains sharing
// a first-detection bin reuse one conditional evolution.
class TraversalSampler {
  public:
    TraversalSampler(const InitialStateSpec& initial, const DetectorSpec& d1,
                     const DetectorSpec& d2, const GridSpec& gridspec,
                     const ModelParams& params, int tau1_stride);

    enum class Bucket { NoEvent, OnlyD1, D2First, Traversed };

    struct Chain {
        std::vector<EventRecord> events;
        Bucket bucket = Bucket::NoEvent;
        double traversal_t = 0.0;  // valid when bucket == Traversed
    };

    Chain sample_chain(RngStream& rng) const;

    const PhaseARun& phase_a() const { return a_; }

  private:
    PhaseARun a_;
    std::vector<double> cum_total_;
    mutable std::map<int, std::vector<double>> branch_cum_;  // boundary -> cumulative D2 loss
    mutable std::mutex cache_mutex_;

    const std::vector<double>& branch_curve(int boundary) const;
};

// Convenience one-shot wrappers matching the algorithm steps; they rebuild the
// evolution per call, so use the sampler classes for large sample counts.
EventSampler::Sample sample_event(const InitialStateSpec& initial,
                                  const std::vector<DetectorSpec>& detectors,
                                  const GridSpec& gridspec, const ModelParams& params,
                                  RngStream& rng);
TraversalSampler::Chain sample_traversal_chain(const InitialStateSpec& initial,
                                               const DetectorSpec& d1, const DetectorSpec& d2,
                                               const GridSpec& gridspec, const ModelParams& params,
                                               int tau1_stride, RngStream& rng);

}  // namespace eeqt

#endif
