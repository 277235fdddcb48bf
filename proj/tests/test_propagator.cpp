#include "doctest.h"

#include <cmath>

#include "eeqt/propagator.hpp"
#include "eeqt/relkin.hpp"
#include "test_util.hpp"

using namespace eeqt;
namespace tu = eeqt::testutil;

namespace {

// Small strong-detector configuration that runs in well under a second.
const GridSpec kGrid{-5.5, 2.5, 0.004, 0.0, 3.0};
const InitialStateSpec kInitial{StateKind::PositiveEnergy, 1.0, -1.0};
const DetectorSpec kDetector{0.0, 0.05, 0.01, true};

SpinorSlice initial_omega(const ModelParams& par) {
    return build_initial_state(kInitial, par, kGrid.make_grid(), kInitial.x0 - kDetector.x_pos);
}

void check_bookkeeping(const EvolutionRecord& rec, double tol) {
    double acc = 0.0;
    for (int m = 0; m < rec.n_steps(); ++m) {
        for (const auto& rj : rec.rate) acc += rj[m] * rec.dtau;
        acc += rec.wall_rate[m] * rec.dtau;
        const double lhs = 1.0 - rec.norm2[m + 1];
        CHECK(std::abs(lhs - acc) / std::max(lhs, 1e-12) < tol);
    }
}

}  // namespace

TEST_CASE("damped step with no windows equals the free step") {
    const ModelParams par;
    const SpinorSlice psi = initial_omega(par);
    const SpinorSlice stepped = damped_step(psi, {}, par, 0.004);
    const SpinorSlice free_step = free_propagate(psi, par, 0.004);
    CHECK(tu::max_abs_diff(stepped, free_step) < 1e-14);
    CHECK(std::abs(stepped.norm2() - psi.norm2()) < 1e-12);
}

TEST_CASE("packet far from every window loses only tail-level norm") {
    const ModelParams par;
    SpinorSlice psi = initial_omega(par);  // packet near -1.7, detector window at +2
    const CouplingWindow far = make_window({2.0, 0.05, 0.01, true}, kGrid.make_grid(), par);
    for (int s = 0; s < 100; ++s) psi = damped_step(psi, std::span(&far, 1), par, 0.004);
    CHECK(std::abs(psi.norm2() - 1.0) < 1e-6);
}

TEST_CASE("translation operator: identity, inverse, kinetic-step composition") {
    const ModelParams par;
    const SpinorSlice psi = initial_omega(par);

    CHECK(tu::max_abs_diff(psi, translation_T(psi, par, 0.0)) == 0.0);

    const SpinorSlice round = translation_T(translation_T(psi, par, 1.26), par, -1.26);
    CHECK(tu::max_abs_diff(psi, round) < 1e-12);

    SpinorSlice stepped = psi;
    for (int s = 0; s < 2100; ++s) stepped = free_propagate(stepped, par, 0.0006);
    const SpinorSlice direct = translation_T(psi, par, 1.26);
    CHECK(tu::max_abs_diff(stepped, direct) < 1e-8);
}

TEST_CASE("evolve without windows loses norm only through the walls") {
    const ModelParams par;
    SpinorSlice psi = initial_omega(par);
    const EvolutionRecord rec = evolve(psi, {}, kGrid, par);
    // all loss is accounted for by the hard-wall channel, and it stays tiny
    CHECK(std::abs((1.0 - psi.norm2()) - rec.wall_loss()) < 1e-10);
    CHECK(rec.wall_loss() < 1e-4);
    CHECK(rec.n_steps() == 750);
    CHECK_FALSE(rec.leakage_warning);
}

TEST_CASE("evolve rejects unnormalized non-conditional input") {
    const ModelParams par;
    SpinorSlice psi = initial_omega(par);
    psi.scale(0.7);
    CHECK_THROWS_AS(evolve(psi, {}, kGrid, par), std::invalid_argument);

    SpinorSlice cond = initial_omega(par);
    cond.scale(0.7);
    EvolveOptions opts;
    opts.conditional = true;
    CHECK_NOTHROW(evolve(cond, {}, kGrid, par, opts));
}

TEST_CASE("norm bookkeeping holds at every recorded time") {
    const ModelParams par;
    const CouplingWindow w = make_window(kDetector, kGrid.make_grid(), par);
    SpinorSlice psi = initial_omega(par);
    const EvolutionRecord rec = evolve(psi, std::span(&w, 1), kGrid, par);
    CHECK(rec.window_loss(0) > 0.01);  // strong detector actually absorbs
    check_bookkeeping(rec, 1e-6);
    // norm never increases
    for (int m = 0; m < rec.n_steps(); ++m) CHECK(rec.norm2[m + 1] <= rec.norm2[m] + 1e-12);
    // boundary nodes are kept at zero by the hard walls
    CHECK(psi.node_density(0) == 0.0);
    CHECK(psi.node_density(psi.grid.n - 1) == 0.0);
}

TEST_CASE("doubling the detector height strictly increases the detection probability") {
    const ModelParams par;
    double last = 0.0;
    for (const double height : {1e-3, 2e-3, 4e-3}) {
        const CouplingWindow w = make_window({0.0, 0.05, height, true}, kGrid.make_grid(), par);
        SpinorSlice psi = initial_omega(par);
        const EvolutionRecord rec = evolve(psi, std::span(&w, 1), kGrid, par);
        CHECK(rec.window_loss(0) > last);
        last = rec.window_loss(0);
    }
}

TEST_CASE("evolution is deterministic within one build") {
    const ModelParams par;
    const CouplingWindow w = make_window(kDetector, kGrid.make_grid(), par);
    SpinorSlice a = initial_omega(par);
    SpinorSlice b = initial_omega(par);
    const EvolutionRecord ra = evolve(a, std::span(&w, 1), kGrid, par);
    const EvolutionRecord rb = evolve(b, std::span(&w, 1), kGrid, par);
    CHECK(ra.rate[0] == rb.rate[0]);
    CHECK(ra.norm2 == rb.norm2);
    CHECK(tu::max_abs_diff(a, b) == 0.0);
}

TEST_CASE("conjugated state with (identical real) windows reproduces the rate series") {
    const ModelParams par;
    const CouplingWindow w = make_window(kDetector, kGrid.make_grid(), par);
    SpinorSlice psi = initial_omega(par);
    SpinorSlice conj = charge_conjugate(psi);
    const EvolutionRecord r1 = evolve(psi, std::span(&w, 1), kGrid, par);
    const EvolutionRecord r2 = evolve(conj, std::span(&w, 1), kGrid, par);
    for (int m = 0; m < r1.n_steps(); ++m) {
        CHECK(std::abs(r1.rate[0][m] - r2.rate[0][m]) <=
              1e-10 * std::max(1.0, std::abs(r1.rate[0][m])));
        CHECK(std::abs(r1.norm2[m + 1] - r2.norm2[m + 1]) < 1e-10);
    }
}

TEST_CASE("observer sees every step boundary") {
    const ModelParams par;
    SpinorSlice psi = initial_omega(par);
    int calls = 0;
    EvolveOptions opts;
    opts.observer = [&calls](int step, const SpinorSlice& s) {
        CHECK(step == calls);
        CHECK(s.grid.n == 2001);
        ++calls;
    };
    evolve(psi, {}, kGrid, par, opts);
    CHECK(calls == 750);
}
