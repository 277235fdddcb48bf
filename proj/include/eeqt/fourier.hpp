#ifndef EEQT_FOURIER_HPP
#define EEQT_FOURIER_HPP

#include "eeqt/grid.hpp"

namespace eeqt {

// Applies exp(-i dt H0(k)) to interleaved 4-component data in place, where
// H0(k) = k gamma^0 gamma^1 + mhat gamma^0 in the standard representation.
// The transform treats the grid as periodic with period n*dx.
// Exactly unitary up to FFT round-off.
void spectral_propagate(std::vector<cplx>& values, int n, double dx, double mhat, double dt);

}  // namespace eeqt

#endif
