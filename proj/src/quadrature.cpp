#include "ndde/quadrature.hpp"

#include "ndde/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ndde {

namespace {

constexpr std::size_t kExtendBatch = 32;

constexpr int kHalvingDepth = 20;

struct Leaf {
    double b;
    double fb;
    double value;
};

/// Simpson on [a, b] split at m; returns the Richardson-corrected estimate
/// with both halves and accepts or recurses.
template <class Emit>
void simpson_recurse(const ScalarFunction& f, double a, double fa, double m, double fm, double b, double fb,
                     double whole, double tol, double budget, int depth, int max_depth, Emit&& emit) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const bool converged = std::fabs(delta) <= 15.0 * tol || (depth >= max_depth && std::fabs(delta) <= budget) ||
                           std::fabs(delta) <= 1e-15 * (std::fabs(left) + std::fabs(right)) || !(lm > a && rm < b);
    if (converged) {
        emit(Leaf{m, fm, left + delta / 30.0});
        emit(Leaf{b, fb, right + delta / 30.0});
        return;
    }
    if (!std::isfinite(delta)) throw QuadratureError("non-finite integrand on [" + std::to_string(a) + ", " +
                                                     std::to_string(b) + "]");
    if (depth >= max_depth)
        throw QuadratureError("adaptive quadrature exceeded depth " + std::to_string(max_depth) + " near t=" +
                              std::to_string(m));
    // past kHalvingDepth the local tolerance stays fixed, so kinks and jumps terminate
    const double next = depth < kHalvingDepth ? 0.5 * tol : tol;
    simpson_recurse(f, a, fa, lm, flm, m, fm, left, next, budget, depth + 1, max_depth, emit);
    simpson_recurse(f, m, fm, rm, frm, b, fb, right, next, budget, depth + 1, max_depth, emit);
}

template <class Emit>
void simpson_leaves(const ScalarFunction& f, double a, double fa, double b, double fb, double tol, int max_depth,
                    Emit&& emit) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_recurse(f, a, fa, m, fm, b, fb, whole, tol, tol, 0, max_depth, emit);
}

/// Richardson-corrected Simpson (Boole) on [a, s] given f(a).
double boole(const ScalarFunction& f, double a, double fa, double s) {
    const double h = s - a;
    if (h == 0.0) return 0.0;
    const double f1 = f(a + 0.25 * h), f2 = f(a + 0.5 * h), f3 = f(a + 0.75 * h), f4 = f(s);
    return h / 90.0 * (7.0 * fa + 32.0 * f1 + 12.0 * f2 + 32.0 * f3 + 7.0 * f4);
}

}  // namespace

double adaptive_simpson(const ScalarFunction& f, double a, double b, double tol, int max_depth) {
    if (a == b) return 0.0;
    if (a > b) return -adaptive_simpson(f, b, a, tol, max_depth);
    double sum = 0.0;
    simpson_leaves(f, a, f(a), b, f(b), tol, max_depth, [&sum](const Leaf& leaf) { sum += leaf.value; });
    return sum;
}

double window_integral(const ScalarFunction& f, double t1, double t2, double tol) {
    if (t1 > t2) return -window_integral(f, t2, t1, tol);
    return adaptive_simpson(f, t1, t2, tol, 60);
}

namespace detail {

Panel build_panel(const ScalarFunction& f, double a, double b, double tol_per_unit, int max_depth) {
    Panel panel;
    panel.start = a;
    panel.end = b;
    const double fa = f(a);
    panel.x.push_back(a);
    panel.fx.push_back(fa);
    panel.cum.push_back(0.0);
    if (b > a) {
        simpson_leaves(f, a, fa, b, f(b), tol_per_unit * (b - a), max_depth, [&panel](const Leaf& leaf) {
            panel.x.push_back(leaf.b);
            panel.fx.push_back(leaf.fb);
            panel.cum.push_back(panel.cum.back() + leaf.value);
        });
    }
    panel.x.back() = b;
    return panel;
}

double panel_partial(const Panel& panel, const ScalarFunction& f, double s) {
    s = std::clamp(s, panel.start, panel.end);
    auto it = std::upper_bound(panel.x.begin(), panel.x.end(), s);
    const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - panel.x.begin()) - 1));
    if (panel.x[i] == s) return panel.cum[i];
    return panel.cum[i] + boole(f, panel.x[i], panel.fx[i], s);
}

void PanelDirectory::push_back(Panel panel) {
    const std::size_t n = count_.load(std::memory_order_relaxed);
    const std::size_t chunk = n >> kChunkBits;
    if (chunk >= kMaxChunks) throw QuadratureError("checkpoint table exhausted; increase the checkpoint spacing");
    if (!chunks_[chunk]) chunks_[chunk] = std::make_unique<Panel[]>(kChunk);
    chunks_[chunk][n & (kChunk - 1)] = std::move(panel);
    count_.store(n + 1, std::memory_order_release);
}

}  // namespace detail

CumulativeIntegral::CumulativeIntegral(ScalarFunction f, double base, double lo, QuadratureOptions options)
    : f_(std::move(f)), base_(base), lo_(std::min(lo, base)), options_(options) {
    if (!(options_.spacing > 0.0)) throw QuadratureError("checkpoint spacing must be positive");
}

void CumulativeIntegral::extend_forward(std::size_t count) const {
    std::lock_guard<std::mutex> lock(writer_);
    const std::size_t have = forward_.size();
    if (have >= count) return;
    const std::size_t want = std::max(count, have + kExtendBatch);
    std::vector<detail::Panel> fresh(want - have);
    const double h = options_.spacing;
    for_each_index(fresh.size(), options_.execution, [&](std::size_t i) {
        const std::size_t k = have + i;
        fresh[i] = detail::build_panel(f_, base_ + h * static_cast<double>(k), base_ + h * static_cast<double>(k + 1),
                                       options_.tol_per_unit, options_.max_depth);
    });
    double offset = have == 0 ? 0.0 : forward_.back().offset + forward_.back().total();
    for (auto& panel : fresh) {
        panel.offset = offset;
        offset += panel.total();
        forward_.push_back(std::move(panel));
    }
}

void CumulativeIntegral::extend_backward(std::size_t count) const {
    std::lock_guard<std::mutex> lock(writer_);
    const std::size_t have = backward_.size();
    if (have >= count) return;
    const double h = options_.spacing;
    const std::size_t total = static_cast<std::size_t>(std::ceil((base_ - lo_) / h - 1e-12));
    const std::size_t want = std::min(std::max(count, have + kExtendBatch), std::max<std::size_t>(total, count));
    std::vector<detail::Panel> fresh(want - have);
    for_each_index(fresh.size(), options_.execution, [&](std::size_t i) {
        const std::size_t k = have + i;
        const double hi = base_ - h * static_cast<double>(k);
        const double lo = std::max(lo_, base_ - h * static_cast<double>(k + 1));
        fresh[i] = detail::build_panel(f_, lo, hi, options_.tol_per_unit, options_.max_depth);
    });
    double offset = have == 0 ? 0.0 : backward_.back().offset;
    for (auto& panel : fresh) {
        offset -= panel.total();
        panel.offset = offset;
        backward_.push_back(std::move(panel));
    }
}

void CumulativeIntegral::extend_to(double t) const {
    if (t >= base_) {
        const auto k = static_cast<std::size_t>(std::floor((t - base_) / options_.spacing));
        if (k >= forward_.size()) extend_forward(k + 1);
    } else {
        value(t);
    }
}

double CumulativeIntegral::value(double t) const {
    if (!std::isfinite(t)) throw QuadratureError("cumulative integral queried at a non-finite point");
    if (t == base_) return 0.0;
    const double h = options_.spacing;
    if (t > base_) {
        const auto k = static_cast<std::size_t>(std::floor((t - base_) / h));
        if (k >= forward_.size()) extend_forward(k + 1);
        const detail::Panel& panel = forward_[k];
        return panel.offset + detail::panel_partial(panel, f_, t);
    }
    if (t < lo_ - 1e-12 * (1.0 + std::fabs(lo_)))
        throw QuadratureError("cumulative integral queried at t=" + std::to_string(t) + " below its lower limit " +
                              std::to_string(lo_));
    t = std::max(t, lo_);
    auto k = static_cast<std::size_t>(std::floor((base_ - t) / h));
    if (k >= backward_.size()) extend_backward(k + 1);
    k = std::min(k, backward_.size() - 1);
    const detail::Panel& panel = backward_[k];
    return panel.offset + detail::panel_partial(panel, f_, t);
}

CumulativeExponent::CumulativeExponent(ScalarFunction g, double t0, double lo, QuadratureOptions options)
    : table_(std::move(g), t0, lo, options) {}

double CumulativeExponent::damping_weight(double s, double t) const {
    if (s == t) return 1.0;
    return std::exp(cumulative(s) - cumulative(t));
}

WeightedIntegral::WeightedIntegral(std::shared_ptr<const CumulativeExponent> exponent, ScalarFunction f)
    : exponent_(std::move(exponent)), f_(std::move(f)) {}

void WeightedIntegral::extend(std::size_t count) const {
    std::lock_guard<std::mutex> lock(writer_);
    const std::size_t have = panels_.size();
    if (have >= count) return;
    const std::size_t want = std::max(count, have + kExtendBatch);
    const CumulativeExponent& G = *exponent_;
    const QuadratureOptions& opt = G.options();
    const double h = opt.spacing;
    const double t0 = G.t0();
    G.extend_to(t0 + h * static_cast<double>(want));

    std::vector<detail::Panel> fresh(want - have);
    std::vector<double> decay(fresh.size());
    for_each_index(fresh.size(), opt.execution, [&](std::size_t i) {
        const std::size_t k = have + i;
        const double a = t0 + h * static_cast<double>(k);
        const double b = t0 + h * static_cast<double>(k + 1);
        const double Ga = G.cumulative(a);
        const double rise = G.cumulative(b) - Ga;
        if (rise > 600.0)
            throw QuadratureError("damping exponent grows by " + std::to_string(rise) +
                                  " over one checkpoint panel; reduce the checkpoint spacing");
        auto local = [&, Ga](double s) { return std::exp(G.cumulative(s) - Ga) * f_(s); };
        fresh[i] = detail::build_panel(local, a, b, opt.tol_per_unit, opt.max_depth);
        decay[i] = std::exp(-rise);
    });
    double carry = 0.0;
    if (have > 0) {
        const detail::Panel& last = panels_.back();
        carry = std::exp(G.cumulative(last.start) - G.cumulative(last.end)) * (last.offset + last.total());
    }
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        fresh[i].offset = carry;
        carry = decay[i] * (carry + fresh[i].total());
        panels_.push_back(std::move(fresh[i]));
    }
}

void WeightedIntegral::extend_to(double t) const {
    const CumulativeExponent& G = *exponent_;
    if (t <= G.t0()) return;
    const auto k = static_cast<std::size_t>(std::floor((t - G.t0()) / G.options().spacing));
    if (k >= panels_.size()) extend(k + 1);
}

double WeightedIntegral::value(double t) const {
    const CumulativeExponent& G = *exponent_;
    if (t <= G.t0()) return 0.0;
    const auto k = static_cast<std::size_t>(std::floor((t - G.t0()) / G.options().spacing));
    if (k >= panels_.size()) extend(k + 1);
    const detail::Panel& panel = panels_[k];
    const double Ga = G.cumulative(panel.start);
    auto local = [&](double s) { return std::exp(G.cumulative(s) - Ga) * f_(s); };
    return std::exp(Ga - G.cumulative(t)) * (panel.offset + detail::panel_partial(panel, local, t));
}

double weighted_integral_direct(const CumulativeExponent& exponent, const ScalarFunction& f, double t, double tol) {
    const double t0 = exponent.t0();
    if (t <= t0) return 0.0;
    const double Gt = exponent.cumulative(t);
    auto integrand = [&](double s) { return std::exp(exponent.cumulative(s) - Gt) * f(s); };
    return adaptive_simpson(integrand, t0, t, tol, 60);
}

double weighted_integral(const CumulativeExponent& exponent, const ScalarFunction& f, double t) {
    std::shared_ptr<const CumulativeExponent> view(std::shared_ptr<void>(), &exponent);
    WeightedIntegral table(view, f);
    return table.value(t);
}

std::vector<double> sample(const ScalarFunction& h, const std::vector<double>& ts, Execution exec) {
    std::vector<double> out(ts.size());
    for_each_index(ts.size(), exec, [&](std::size_t i) { out[i] = h(ts[i]); });
    return out;
}

SupResult sup_scan(const ScalarFunction& h, double t0, double tmax, std::size_t n_coarse, Execution exec) {
    if (!(tmax > t0)) throw QuadratureError("sup_scan: tmax must exceed t0");
    n_coarse = std::max<std::size_t>(n_coarse, 11);
    std::vector<double> ts(n_coarse);
    for (std::size_t i = 0; i < n_coarse; ++i)
        ts[i] = t0 + (tmax - t0) * static_cast<double>(i) / static_cast<double>(n_coarse - 1);
    ts.back() = tmax;
    const std::vector<double> hs = sample(h, ts, exec);
    for (std::size_t i = 0; i < hs.size(); ++i)
        if (!std::isfinite(hs[i])) throw QuadratureError("sup_scan: non-finite value at t=" + std::to_string(ts[i]));

    std::vector<std::size_t> order(n_coarse);
    for (std::size_t i = 0; i < n_coarse; ++i) order[i] = i;
    const std::size_t best = std::min<std::size_t>(3, n_coarse);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best), order.end(),
                      [&](std::size_t a, std::size_t b) { return hs[a] > hs[b]; });

    std::vector<Extremum> refined(best);
    for_each_index(best, exec, [&](std::size_t j) {
        const std::size_t i = order[j];
        const double a = ts[i == 0 ? 0 : i - 1];
        const double b = ts[std::min(i + 1, n_coarse - 1)];
        refined[j] = golden_max(h, a, b, 60);
    });
    SupResult r;
    r.sup = hs[order[0]];
    r.argsup = ts[order[0]];
    for (const Extremum& e : refined) {
        if (e.value > r.sup) {
            r.sup = e.value;
            r.argsup = e.arg;
        }
    }

    const double span = 0.1 * (tmax - t0);
    const double back = tmax - span;
    r.tail_slope = (hs.back() - h(back)) / span;
    const auto cut = static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(n_coarse - 1)));
    const double env_back = *std::max_element(hs.begin(), hs.begin() + static_cast<std::ptrdiff_t>(cut) + 1);
    const double env_end = *std::max_element(hs.begin(), hs.end());
    r.envelope_slope = std::max(0.0, (env_end - env_back) / (tmax - ts[cut]));
    return r;
}

}  // namespace ndde
