#pragma once

#include "ndde/model.hpp"
#include "ndde/parallel.hpp"
#include "ndde/quadrature.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace ndde {

/// Piecewise-uniform mesh: a history segment on [lo, t0] and a solution
/// segment on [t0, T]. The node t0 belongs to both segments.
struct Mesh {
    double lo = 0.0;
    double t0 = 0.0;
    double T = 1.0;
    std::size_t history_cells = 0;  // 0 when lo == t0
    std::size_t cells = 1;          // solution cells

    double history_step() const { return history_cells ? (t0 - lo) / static_cast<double>(history_cells) : 0.0; }
    double step() const { return (T - t0) / static_cast<double>(cells); }
    double history_node(std::size_t i) const;
    double node(std::size_t i) const;

    /// Solution cells of width ≤ step; the history segment gets a comparable width.
    static Mesh uniform(double lo, double t0, double T, double step);
};

/// Node values and slopes on a Mesh with cubic Hermite interpolation. The
/// history and solution segments keep separate values at t0, so a jump of p
/// at t0 is representable.
class GridFunction {
public:
    explicit GridFunction(Mesh mesh = {});

    const Mesh& mesh() const { return mesh_; }

    std::vector<double>& history_values() { return hv_; }
    std::vector<double>& history_slopes() { return hd_; }
    std::vector<double>& values() { return v_; }
    std::vector<double>& slopes() { return d_; }
    const std::vector<double>& history_values() const { return hv_; }
    const std::vector<double>& history_slopes() const { return hd_; }
    const std::vector<double>& values() const { return v_; }
    const std::vector<double>& slopes() const { return d_; }

    /// t < t0 reads the history segment, t ≥ t0 the solution segment.
    double operator()(double t) const;
    double derivative(double t) const;

    /// max |value| over all nodes of both segments.
    double sup_norm() const;
    /// max |value| over solution nodes.
    double solution_sup() const;

    /// Five-point finite-difference slopes on the solution segment (and on the
    /// history segment if `history` is set).
    void estimate_slopes(bool history = false);

    /// Two columns `t,value`; '#' lines carry mesh metadata.
    void write_csv(std::ostream& os, const std::string& label = "z") const;
    static GridFunction read_csv(std::istream& is);

private:
    Mesh mesh_;
    std::vector<double> hv_, hd_, v_, d_;
};

/// Sup over solution nodes of |a - b| (meshes must match).
double sup_distance(const GridFunction& a, const GridFunction& b);

/// Decomposition z = A z + B z of the transformed integral equation for
/// x = p z. Coefficients at every quadrature probe are precomputed once per
/// mesh; each application is O(nodes).
class SplitOperator {
public:
    SplitOperator(const ProblemSpec& problem, const AuxiliarySpec& aux, const HistoryFunction& psi, double T,
                  double step, Execution exec = Execution::parallel);
    ~SplitOperator();
    SplitOperator(const SplitOperator&) = delete;
    SplitOperator& operator=(const SplitOperator&) = delete;

    const Mesh& mesh() const;
    const ProblemSpec& problem() const;
    const AuxiliarySpec& aux() const;
    const HistoryFunction& history() const;

    /// ψ on the history segment, ψ(t0)/p(t0) continued as a constant.
    GridFunction initial_guess() const;
    /// Same history; `f` on the solution segment (slopes from `df` or by finite differences).
    GridFunction candidate(const std::function<double(double)>& f,
                           const std::function<double(double)>& df = nullptr) const;
    /// Interpolate z onto this operator's mesh.
    GridFunction resample(const GridFunction& z) const;

    GridFunction apply_A(const GridFunction& z) const;
    GridFunction apply_B(const GridFunction& z) const;
    GridFunction apply(const GridFunction& z) const;

    /// Constant of the damped head term of B.
    double head() const;
    Execution execution() const;

    struct Plan;  // precomputed probe tables (defined in operator.cpp)

private:
    std::unique_ptr<Plan> plan_;
};

enum class PicardStatus {
    converged,          // step < tol with every iterate inside |z| ≤ 1
    converged_outside,  // step < tol, but iterates left |z| ≤ 1: no fixed point in the candidate ball
    not_converged,      // max_iter reached
    failed              // non-finite iterate or evaluation error
};
const char* to_string(PicardStatus s);

struct PicardResult {
    GridFunction z;
    int iterations = 0;
    bool converged = false;  // step < tol reached (regardless of the ball)
    PicardStatus status = PicardStatus::not_converged;
    std::vector<double> steps;   // sup |z_{n+1} - z_n|
    std::vector<double> ratios;  // steps[n] / steps[n-1]
    bool cap_exceeded = false;   // some iterate left |z| ≤ 1
    double max_abs = 0.0;
    double residual = 0.0;
    std::string message;
};

/// z_{n+1} = A z_n + B z_n from the initial guess, until the sup-norm step is
/// below `tol` or `max_iter` is reached. Non-convergence is reported, not thrown.
PicardResult picard_solve(const SplitOperator& op, double tol = 1e-10, int max_iter = 200);

/// max over solution nodes of |z - (A z + B z)| with z resampled onto op's mesh.
double residual(const SplitOperator& op, const GridFunction& z);

/// sup|B z1 - B z2| / sup|z1 - z2| over solution nodes (both resampled onto op's mesh).
double contraction_ratio(const SplitOperator& op, const GridFunction& z1, const GridFunction& z2);

/// x = p z on the same mesh; p ≡ 1 on the history segment.
GridFunction reconstruct_x(const GridFunction& z, const AuxiliarySpec& aux);

}  // namespace ndde
