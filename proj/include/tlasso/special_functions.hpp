#pragma once

namespace tlasso {

// Digamma (derivative of log Gamma) for x > 0. Absolute accuracy is about
// 1e-12 on (0, 1e4). Throws ParameterError for x <= 0.
double digamma(double x);

}  // namespace tlasso
