#include "ndde/search.hpp"

#include <cmath>

namespace ndde {

Extremum golden_max(const std::function<double(double)>& f, double a, double b, int iterations) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    Extremum best{f(a), a};
    if (b <= a) return best;
    if (const double fb = f(b); fb > best.value) best = {fb, b};

    double lo = a, hi = b;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iterations && hi - lo > 1e-15 * (1.0 + std::fabs(lo)); ++i) {
        if (f1 > best.value) best = {f1, x1};
        if (f2 > best.value) best = {f2, x2};
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if (f1 > best.value) best = {f1, x1};
    if (f2 > best.value) best = {f2, x2};
    return best;
}

}  // namespace ndde
