#pragma once

#include <cmath>

#include "adsmax/constants.hpp"

namespace adsmax {

// representative in [0, 2pi)
inline double wrap_2pi(double a) {
  a = std::fmod(a, two_pi);
  if (a < 0) a += two_pi;
  if (a >= two_pi) a -= two_pi;
  return a;
}

// representative in (-pi, pi]
inline double wrap_pi(double a) {
  a = wrap_2pi(a);
  return a > pi ? a - two_pi : a;
}

}  // namespace adsmax
