#pragma once

#include <functional>

namespace ndde {

struct Extremum {
    double value = 0.0;
    double arg = 0.0;
};

/// Golden-section maximization of f on [a, b]. Returns the best point seen,
/// including both endpoints, so the result is never below f(a) or f(b).
Extremum golden_max(const std::function<double(double)>& f, double a, double b, int iterations = 80);

}  // namespace ndde
