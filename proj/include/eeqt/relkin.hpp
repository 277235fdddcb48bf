#ifndef EEQT_RELKIN_HPP
#define EEQT_RELKIN_HPP

#include <array>

#include "eeqt/grid.hpp"

namespace eeqt {

// Units: hbar = c = 1, lengths in Angstrom, times in Angstrom/c.
// Momenta are quoted as multiples of m*c, energies as multiples of m*c^2.
struct ModelParams {
    // mhat = m*c/hbar in 1/Angstrom. Default is the electron value
    // (inverse reduced Compton wavelength, 1/0.0038616 A).
    double mhat = 258.97;

    double energy(double k) const { return std::sqrt(k * k + mhat * mhat); }
};

using Mat4 = std::array<cplx, 16>;  // row-major 4x4

// Standard (Dirac) representation gamma matrices, index 0..3.
Mat4 gamma(int index);

// Compactly supported spectral bump: exp(-k^2/(dk^2-k^2)) for |k| < dk, else 0.
double bump_profile(double k, double delta_k);

enum class StateKind { PositiveEnergy, NegativeEnergy, Mixed };

struct InitialStateSpec {
    StateKind kind = StateKind::PositiveEnergy;
    double p0 = 1.0;       // mean momentum, units of m*c
    double x0 = 0.0;       // preparation position, Angstrom
    double delta_k = 10.0; // spectral cutoff, 1/Angstrom (P and N kinds)
    double eta = 0.1;      // Gaussian width, Angstrom (Mixed kind)
};

// Spacelike hyperplane (y0 + alpha*u, y1 + u), |alpha| < 1.
struct Hyperplane {
    double y0 = 0.0;
    double y1 = 0.0;
    double alpha = 0.0;
};

// Evaluates the free-Dirac wavepacket of the given family on the grid at frame
// time eval_time, by momentum-space quadrature. P and N states are normalized
// to norm2 == 1; the Mixed state keeps its analytic prefactors.
// Throws if the packet amplitude at the walls exceeds 1e-3 of its peak.
SpinorSlice build_initial_state(const InitialStateSpec& spec, const ModelParams& params,
                                const Grid& grid, double eval_time);

// Covariant scalar product over the hyperplane: integral of j^0 - alpha*j^1 du
// with j^mu = Psi_a^+ gamma^0 gamma^mu Psi_b. For alpha != 0 each integrand
// point is resampled at time y0 + alpha*u by free propagation.
cplx scalar_product(const SpinorSlice& a, const SpinorSlice& b, const ModelParams& params,
                    const Hyperplane& plane);

// Psi^C = C (gamma^0)^T Psi^*, C = i gamma^2 gamma^0. Exact involution.
SpinorSlice charge_conjugate(const SpinorSlice& psi);

// exp(-i dt H0) applied spectrally; advances the time label by dt.
SpinorSlice free_propagate(const SpinorSlice& psi, const ModelParams& params, double dt);

}  // namespace eeqt

#endif
