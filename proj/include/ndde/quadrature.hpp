#pragma once

#include "ndde/parallel.hpp"

#include <array>
#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace ndde {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using ScalarFunction = std::function<double(double)>;

struct QuadratureOptions {
    double tol_per_unit = 1e-10;  // absolute tolerance per unit of integration length
    int max_depth = 40;           // bisection depth below one checkpoint panel
    double spacing = 1.0;         // checkpoint spacing
    Execution execution = Execution::parallel;
};

/// Adaptive Simpson with Richardson correction on [a, b], absolute tolerance `tol`.
/// Throws QuadratureError if the bisection depth exceeds `max_depth`.
double adaptive_simpson(const ScalarFunction& f, double a, double b, double tol, int max_depth = 40);

/// Signed ∫_{t1}^{t2} f; window_integral(f, t2, t1) == -window_integral(f, t1, t2).
double window_integral(const ScalarFunction& f, double t1, double t2, double tol = 1e-10);

namespace detail {

/// One checkpoint panel with the accepted leaves of its adaptive subdivision.
/// Leaves serve as fine checkpoints: a query inside a leaf costs one
/// 5-point Richardson-Simpson evaluation instead of a fresh adaptive pass.
struct Panel {
    double start = 0.0;
    double end = 0.0;
    double offset = 0.0;       // running value at `start`, filled by the prefix pass
    std::vector<double> x;     // breakpoints, x.front() == start, x.back() == end
    std::vector<double> fx;    // integrand at breakpoints
    std::vector<double> cum;   // ∫_start^{x[i]}

    double total() const { return cum.back(); }
};

Panel build_panel(const ScalarFunction& f, double a, double b, double tol_per_unit, int max_depth);

/// ∫_{panel.start}^{s} f using the stored leaves; s is clamped to the panel.
double panel_partial(const Panel& panel, const ScalarFunction& f, double s);

/// Append-only panel storage. Readers never lock: the element count is
/// published with release semantics after the panel is fully written, and
/// chunks never move once allocated.
class PanelDirectory {
public:
    static constexpr std::size_t kChunkBits = 10;
    static constexpr std::size_t kChunk = std::size_t{1} << kChunkBits;
    static constexpr std::size_t kMaxChunks = 4096;

    std::size_t size() const { return count_.load(std::memory_order_acquire); }
    const Panel& operator[](std::size_t i) const { return chunks_[i >> kChunkBits][i & (kChunk - 1)]; }
    const Panel& back() const { return (*this)[size() - 1]; }
    /// Writer only (caller holds the owner's writer mutex).
    void push_back(Panel panel);

private:
    std::array<std::unique_ptr<Panel[]>, kMaxChunks> chunks_{};
    std::atomic<std::size_t> count_{0};
};

}  // namespace detail

/// Memoized C(t) = ∫_{base}^{t} f(u) du for t >= lo, with checkpoints at
/// base + kΔ. Concurrent readers, single-writer extension.
class CumulativeIntegral {
public:
    CumulativeIntegral(ScalarFunction f, double base, double lo, QuadratureOptions options = {});
    CumulativeIntegral(const CumulativeIntegral&) = delete;
    CumulativeIntegral& operator=(const CumulativeIntegral&) = delete;

    double value(double t) const;
    double between(double a, double b) const { return value(b) - value(a); }

    /// Precompute panels so that queries up to `t` never extend.
    void extend_to(double t) const;

    double base() const { return base_; }
    double lo() const { return lo_; }
    double spacing() const { return options_.spacing; }
    const QuadratureOptions& options() const { return options_; }
    const ScalarFunction& integrand() const { return f_; }

private:
    void extend_forward(std::size_t count) const;
    void extend_backward(std::size_t count) const;

    ScalarFunction f_;
    double base_;
    double lo_;
    QuadratureOptions options_;
    mutable std::mutex writer_;
    mutable detail::PanelDirectory forward_;
    mutable detail::PanelDirectory backward_;
};

/// G(t) = ∫_{t0}^{t} g(u) du and the damping weight exp(-(G(t) - G(s))).
class CumulativeExponent {
public:
    CumulativeExponent(ScalarFunction g, double t0, double lo, QuadratureOptions options = {});
    CumulativeExponent(ScalarFunction g, double t0, QuadratureOptions options = {})
        : CumulativeExponent(std::move(g), t0, t0, options) {}

    double cumulative(double t) const { return table_.value(t); }
    /// exp(G(s) - G(t)); equals 1 exactly for s == t.
    double damping_weight(double s, double t) const;

    void extend_to(double t) const { table_.extend_to(t); }
    double t0() const { return table_.base(); }
    double lo() const { return table_.lo(); }
    const QuadratureOptions& options() const { return table_.options(); }
    const ScalarFunction& g() const { return table_.integrand(); }

private:
    CumulativeIntegral table_;
};

/// I(t) = ∫_{t0}^{t} exp(-(G(t) - G(s))) f(s) ds, evaluated through the
/// checkpoint recurrence I(c_{k+1}) = e^{-(G(c_{k+1}) - G(c_k))} I(c_k) + panel_k.
class WeightedIntegral {
public:
    WeightedIntegral(std::shared_ptr<const CumulativeExponent> exponent, ScalarFunction f);
    WeightedIntegral(const WeightedIntegral&) = delete;
    WeightedIntegral& operator=(const WeightedIntegral&) = delete;

    double value(double t) const;
    void extend_to(double t) const;

    const CumulativeExponent& exponent() const { return *exponent_; }

private:
    void extend(std::size_t count) const;

    std::shared_ptr<const CumulativeExponent> exponent_;
    ScalarFunction f_;
    mutable std::mutex writer_;
    mutable detail::PanelDirectory panels_;
};

/// Non-incremental reference: one adaptive pass over [t0, t].
double weighted_integral_direct(const CumulativeExponent& exponent, const ScalarFunction& f, double t,
                                double tol = 1e-11);

/// Convenience wrapper building a throwaway WeightedIntegral.
double weighted_integral(const CumulativeExponent& exponent, const ScalarFunction& f, double t);

struct SupResult {
    double sup = 0.0;
    double argsup = 0.0;
    /// (h(Tmax) - h(Tmax - 0.1 L)) / (0.1 L), L = Tmax - t0.
    double tail_slope = 0.0;
    /// Same quotient for the running maximum of the coarse samples; never negative.
    double envelope_slope = 0.0;
};

/// Coarse scan of h on n_coarse points over [t0, tmax], then golden-section
/// refinement around the three best coarse cells.
SupResult sup_scan(const ScalarFunction& h, double t0, double tmax, std::size_t n_coarse,
                   Execution exec = Execution::parallel);

/// Coarse-grid samples of h (the parallel kernel behind sup_scan).
std::vector<double> sample(const ScalarFunction& h, const std::vector<double>& ts, Execution exec);

}  // namespace ndde
