#pragma once

#include <numbers>

namespace adsmax {

inline constexpr double pi = std::numbers::pi;
inline constexpr double half_pi = std::numbers::pi / 2.0;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double quarter_pi = std::numbers::pi / 4.0;
inline constexpr double half_sqrt3 = std::numbers::sqrt3 / 2.0;

namespace tol {
// exact identities (closed-form geometry)
inline constexpr double exact = 1e-10;
// renormalization onto the quadric
inline constexpr double renorm = 1e-12;
// causal class decision for normalized tangent vectors
inline constexpr double causal = 1e-10;
// facet time-component threshold for past/future labeling
inline constexpr double vertical_facet = 1e-6;
// default spacelike margin certificate
inline constexpr double margin = 1e-3;
// default mean curvature tolerance
inline constexpr double mean_curvature = 1e-6;
// flat-vertex masks
inline constexpr double degenerate_mu = 1e-6;
inline constexpr double flat_chi = 1e-8;
}  // namespace tol

}  // namespace adsmax
