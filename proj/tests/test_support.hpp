#pragma once

#include <cstdint>

#include "aot/aot.hpp"

namespace aot::testing {

inline GaussianSpec example_mu() { return GaussianSpec(Vec::Zero(2), (Matrix(2, 2) << 1, 2, 2, 5).finished()); }
inline GaussianSpec example_nu() { return GaussianSpec(Vec::Zero(2), (Matrix(2, 2) << 1, -2, -2, 5).finished()); }

inline GaussianSpec nonunique_mu() { return GaussianSpec(Vec::Zero(2), (Matrix(2, 2) << 1, 1, 1, 2).finished()); }
inline GaussianSpec nonunique_nu() { return GaussianSpec(Vec::Zero(2), (Matrix(2, 2) << 1, -1, -1, 2).finished()); }

inline Matrix mat2(double a, double b, double c, double d) { return (Matrix(2, 2) << a, b, c, d).finished(); }

}  // namespace aot::testing
