#ifndef EEQT_CLASSICAL_HPP
#define EEQT_CLASSICAL_HPP

#include <cmath>
#include <stdexcept>

namespace eeqt::classical {

// Point-particle baselines from relativistic mechanics; p0 in units of m*c,
// positions in Angstrom, times in Angstrom/c.

inline double arrival_time(double p0, double x0, double x_d) {
    if (!(p0 > 0.0)) throw std::domain_error("classical arrival: p0 must be > 0");
    if (!(x_d > x0)) throw std::domain_error("classical arrival: need x_d > x0");
    return (x_d - x0) * std::sqrt(1.0 + 1.0 / (p0 * p0));
}

inline double traversal_time(double p0, double x1, double x2) {
    if (!(p0 > 0.0)) throw std::domain_error("classical traversal: p0 must be > 0");
    if (!(x2 > x1)) throw std::domain_error("classical traversal: need x2 > x1");
    return (x2 - x1) * std::sqrt(1.0 + 1.0 / (p0 * p0));
}

// gamma * (time - v*anchor/c^2); the same affine map the quantum-side boosts use.
inline double boost_time(double time, double anchor_length, double v_over_c) {
    if (!(std::abs(v_over_c) < 1.0)) throw std::domain_error("classical boost: |v/c| must be < 1");
    return (time - v_over_c * anchor_length) / std::sqrt(1.0 - v_over_c * v_over_c);
}

}  // namespace eeqt::classical

#endif
