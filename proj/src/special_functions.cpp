#include "tlasso/special_functions.hpp"

#include <cmath>

#include "tlasso/errors.hpp"

namespace tlasso {

double digamma(double x) {
  if (!(x > 0.0)) {
    throw ParameterError("digamma: argument must be positive");
  }
  // Shift upward until the asymptotic expansion is accurate, using
  // psi(x) = psi(x + 1) - 1/x.
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series psi(x) ~ log x - 1/(2x) - sum B_{2k} / (2k x^{2k}).
  const double z = 1.0 / (x * x);
  const double series =
      z * (1.0 / 12.0 -
           z * (1.0 / 120.0 -
                z * (1.0 / 252.0 -
                     z * (1.0 / 240.0 -
                          z * (1.0 / 132.0 - z * (691.0 / 32760.0))))));
  return acc + std::log(x) - 0.5 / x - series;
}

}  // namespace tlasso
