#include "ndde/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ndde {

using ordered_json = nlohmann::ordered_json;

void Summary::add(const std::string& key, double v) { fields.emplace_back(key, ordered_json(v).dump()); }
void Summary::add(const std::string& key, long long v) { fields.emplace_back(key, ordered_json(v).dump()); }
void Summary::add(const std::string& key, bool v) { fields.emplace_back(key, ordered_json(v).dump()); }
void Summary::add(const std::string& key, const std::string& v) { fields.emplace_back(key, ordered_json(v).dump()); }

std::string Summary::text() const {
    std::string out;
    for (const auto& [k, v] : fields) {
        const ordered_json j = ordered_json::parse(v);
        out += k + " = " + (j.is_string() ? j.get<std::string>() : v) + "\n";
    }
    return out;
}

std::string Summary::json() const {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : fields) j[k] = ordered_json::parse(v);
    return j.dump(2) + "\n";
}

namespace {

CriteriaOptions criteria_options(const RunConfig& cfg, double tmax) {
    CriteriaOptions o;
    o.tmax = tmax;
    o.n_coarse = cfg.run.n_coarse;
    o.epsilon = cfg.run.epsilon;
    o.quadrature.spacing = cfg.run.spacing;
    return o;
}

}  // namespace

CheckOutcome run_check(const RunConfig& cfg, std::optional<double> tmax) {
    CheckOutcome out;
    out.report = check_criteria(cfg.problem, cfg.aux, criteria_options(cfg, tmax.value_or(cfg.run.tmax)));
    out.exit_code = exit_code(out.report);
    return out;
}

SimulateOutcome run_simulate(const RunConfig& cfg, std::optional<double> T, std::optional<double> step) {
    const double end = T.value_or(cfg.run.T);
    IntegrateOptions opt;
    opt.step = step.value_or(cfg.run.step);
    SimulateOutcome out;
    out.x = integrate(x_equation(cfg.problem, cfg.history), end, opt);
    const Trajectory z = integrate(z_equation(cfg.problem, cfg.aux, cfg.history), end, opt);
    double gap = 0.0;
    for (std::size_t i = 0; i < out.x.times().size(); ++i) {
        const double t = out.x.times()[i];
        gap = std::max(gap, std::fabs(cfg.aux.p(t) * z.value(t) - out.x.values()[i]));
    }
    const double t0 = cfg.problem.t0;
    Summary& s = out.summary;
    s.add("command", std::string("simulate"));
    s.add("T", end);
    s.add("step", opt.step);
    s.add("nodes", static_cast<long long>(out.x.times().size()));
    s.add("halvings", static_cast<long long>(out.x.halvings()));
    s.add("max_abs_x", out.x.max_abs(t0, end));
    s.add("end_abs_x", std::fabs(out.x.values().back()));
    s.add("transform_gap", gap);
    return out;
}

PicardOutcome run_picard(const RunConfig& cfg, std::optional<double> T, std::optional<double> tol,
                         std::optional<double> step, std::optional<int> max_iter) {
    const double end = T.value_or(cfg.run.picard_T);
    const SplitOperator op(cfg.problem, cfg.aux, cfg.history, end, step.value_or(cfg.run.picard_step));
    PicardOutcome out;
    out.result = picard_solve(op, tol.value_or(cfg.run.tol), max_iter.value_or(cfg.run.max_iter));
    out.x = reconstruct_x(out.result.z, cfg.aux);

    Summary& s = out.summary;
    s.add("command", std::string("picard"));
    s.add("T", end);
    s.add("mesh_step", op.mesh().step());
    s.add("status", std::string(to_string(out.result.status)));
    s.add("iterations", static_cast<long long>(out.result.iterations));
    s.add("residual", out.result.residual);
    s.add("max_abs_z", out.result.max_abs);
    s.add("left_unit_ball", out.result.cap_exceeded);
    s.add("max_ratio", out.result.ratios.empty() ? 0.0
                                                  : *std::max_element(out.result.ratios.begin(), out.result.ratios.end()));
    s.add("last_step", out.result.steps.empty() ? 0.0 : out.result.steps.back());

    double gap = std::numeric_limits<double>::quiet_NaN();
    std::string direct_error;
    if (out.result.status != PicardStatus::failed) {
        try {
            IntegrateOptions opt;
            opt.step = cfg.run.step;
            const Trajectory xd = integrate(x_equation(cfg.problem, cfg.history), end, opt);
            gap = 0.0;
            const Mesh& M = out.x.mesh();
            for (std::size_t i = 0; i <= M.cells; ++i)
                gap = std::max(gap, std::fabs(out.x.values()[i] - xd.value(M.node(i))));
        } catch (const IntegrationError& e) {
            direct_error = e.what();
        }
    }
    s.add("direct_gap", gap);
    if (!direct_error.empty()) s.add("direct_error", direct_error);
    if (!out.result.message.empty()) s.add("message", out.result.message);
    return out;
}

StabilityOutcome run_stability(const RunConfig& cfg, std::optional<double> T, std::optional<double> delta,
                               std::optional<double> epsilon) {
    const double eps = epsilon.value_or(cfg.run.epsilon);
    const double end = T.value_or(cfg.run.stability_T);
    double d = 0.0;
    if (delta) {
        d = *delta;
    } else {
        RunConfig c = cfg;
        c.run.epsilon = eps;
        const CheckOutcome chk = run_check(c);
        if (!chk.report.delta_defined)
            throw std::domain_error("criterion not satisfied (alpha >= 1); pass delta explicitly");
        d = chk.report.delta.uniform;
    }
    if (!(d > 0.0)) throw std::invalid_argument("delta must be positive");
    IntegrateOptions opt;
    opt.step = cfg.run.stability_step;
    StabilityOutcome out;
    out.report = stability_experiment(cfg.problem, eps, d,
                                      default_history_family(d, cfg.history.lo(), cfg.problem.t0), end, opt);
    Summary& s = out.summary;
    s.add("command", std::string("stability"));
    s.add("T", end);
    s.add("step", opt.step);
    s.add("epsilon", eps);
    s.add("delta", d);
    s.add("bounded", out.report.bounded);
    s.add("asymptotic", out.report.asymptotic);
    for (const auto& r : out.report.runs) {
        s.add(r.label + ".max_abs", r.max_abs);
        s.add(r.label + ".end_abs", r.end_abs);
        if (!r.failure.empty()) s.add(r.label + ".failure", r.failure);
    }
    return out;
}

}  // namespace ndde
