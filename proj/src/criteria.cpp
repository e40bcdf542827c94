#include "ndde/criteria.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ndde {

namespace {

const std::vector<std::string> kGeneralNames = {"neutral",   "window",  "drift",      "window_damped",
                                                "neutral_damped", "coupling", "decay"};
const std::vector<std::string> kLinearNames = {"neutral", "window", "drift", "window_damped", "decay"};

enum GeneralTerm { kT1, kT2, kT3, kT4, kT5, kT6a, kT6b };
enum LinearTerm { kL1, kL2, kL3, kL4, kL5 };

}  // namespace

CriterionModel::CriterionModel(ProblemSpec problem, AuxiliarySpec aux, double tmax, QuadratureOptions options)
    : problem_(std::move(problem)), aux_(std::move(aux)), tmax_(tmax) {
    if (!(tmax_ > problem_.t0)) throw ValidationError("Tmax must exceed t0");
    m_ = std::min(ndde::horizon(problem_, tmax_).m, problem_.t0);
    if (problem_.form == Form::linear_neutral) {
        q_ = neutral_quotient(problem_);
        dq_ = differentiate(q_);
    }

    const double t0 = problem_.t0;
    const AuxiliarySpec* aux_ptr = &aux_;
    const ProblemSpec* pr = &problem_;
    G_ = std::make_shared<CumulativeExponent>([aux_ptr](double s) { return aux_ptr->g(s); }, t0, m_, options);
    H_ = std::make_unique<CumulativeIntegral>([aux_ptr](double s) { return std::fabs(aux_ptr->kernel(s)); }, t0, m_,
                                              options);

    auto make = [this](ScalarFunction f) { return std::make_unique<WeightedIntegral>(G_, std::move(f)); };
    auto window_damped = [this, aux_ptr](double s) { return std::fabs(aux_ptr->g(s)) * window_kernel(s); };
    auto decay = [pr, aux_ptr](double s) {
        const double p2 = aux_ptr->p(pr->r2.tau(s));
        return std::fabs(pr->c(s) / aux_ptr->p(s)) * signed_power(p2, pr->gamma);
    };

    weighted_.resize(term_count());
    if (problem_.form == Form::general) {
        weighted_[kT3] = make([pr, aux_ptr](double s) {
            const double tau = pr->r1.tau(s);
            const double p1 = aux_ptr->p(tau);
            return std::fabs(aux_ptr->kernel(tau) * (1.0 - pr->r1.rate(s)) - pr->a(s) * p1 / aux_ptr->p(s));
        });
        weighted_[kT4] = make(window_damped);
        weighted_[kT5] = make([pr, aux_ptr](double s) {
            const double p = aux_ptr->p(s);
            const double p1 = aux_ptr->p(pr->r1.tau(s));
            return std::fabs((aux_ptr->g(s) * p - aux_ptr->dp(s)) / (p * p)) * p1 * pr->bQ(s);
        });
        weighted_[kT6a] = make([pr, aux_ptr](double s) {
            const double p1 = aux_ptr->p(pr->r1.tau(s));
            const double p2 = aux_ptr->p(pr->r2.tau(s));
            return std::fabs(pr->d(s) / aux_ptr->p(s)) * (pr->k2 * p1 + pr->k3 * p2);
        });
        weighted_[kT6b] = make(decay);
    } else {
        weighted_[kL3] = make([this](double s) {
            const NeutralCoefficients nc = neutral_coefficients(*this, s);
            const double tau = problem_.r1.tau(s);
            return std::fabs(-nc.mu + aux_.kernel(tau) * (1.0 - problem_.r1.rate(s)) - nc.beta);
        });
        weighted_[kL4] = make(window_damped);
        weighted_[kL5] = make(decay);
    }
}

const std::vector<std::string>& CriterionModel::term_names() const {
    return problem_.form == Form::general ? kGeneralNames : kLinearNames;
}

void CriterionModel::extend_to(double t) const {
    G_->extend_to(t);
    H_->extend_to(t);
    H_->value(m_);
    for (const auto& w : weighted_)
        if (w) w->extend_to(t);
}

double CriterionModel::term(std::size_t index, double t) const {
    if (index >= term_count()) throw std::out_of_range("criterion term index");
    if (index == 1) return window_kernel(t);
    if (index == 0) {
        if (problem_.form == Form::general) {
            const double p1 = aux_.p(problem_.r1.tau(t));
            return std::fabs(p1 / aux_.p(t) * problem_.bQ(t));
        }
        return std::fabs(neutral_coefficients(*this, t).cbar);
    }
    const double v = weighted(index).value(t);
    const bool decay = (problem_.form == Form::general && index == kT6b) ||
                       (problem_.form == Form::linear_neutral && index == kL5);
    return decay ? problem_.k4 * v : v;
}

std::vector<double> term_values_general(const CriterionModel& model, double t) {
    if (model.problem().form != Form::general)
        throw std::invalid_argument("term_values_general needs a general-form problem");
    std::vector<double> v(model.term_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = model.term(i, t);
    return v;
}

std::vector<double> term_values_linear(const CriterionModel& model, double t) {
    if (model.problem().form != Form::linear_neutral)
        throw std::invalid_argument("term_values_linear needs a linear-neutral problem");
    std::vector<double> v(model.term_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = model.term(i, t);
    return v;
}

NeutralCoefficients neutral_coefficients(const CriterionModel& model, double s) {
    const ProblemSpec& pr = model.problem();
    const AuxiliarySpec& aux = model.aux();
    const double rate = pr.r1.rate(s);
    const double tau = pr.r1.tau(s);
    const double p = aux.p(s);
    const double dp = aux.dp(s);
    const double p1 = aux.p(tau);
    const double p1d = aux.dp(tau);
    const double dp1 = p1d * (1.0 - rate);
    const double q = model.neutral(s);
    const double dq = model.neutral_rate(s);

    NeutralCoefficients nc;
    nc.cbar = p1 * q / p;
    const double dcbar = dp1 * q / p + p1 * dq / p - p1 * q * dp / (p * p);
    nc.mu = (pr.a(s) * p1 - pr.b(s) * p1d) / p;
    nc.beta = aux.g(s) * nc.cbar + dcbar;
    return nc;
}

NeutralCoefficients neutral_coefficients(const ProblemSpec& linear, const AuxiliarySpec& aux, double s) {
    const CriterionModel model(linear, aux, std::max(s, linear.t0) + 1.0);
    return neutral_coefficients(model, s);
}

AlphaEstimate alpha_estimate(const CriterionModel& model, std::size_t n_coarse, Execution exec) {
    model.extend_to(model.tmax());
    AlphaEstimate out;
    out.names = model.term_names();
    const std::size_t n = model.term_count();
    auto sum = [&model, n](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += model.term(i, t);
        return s;
    };
    const SupResult total = sup_scan(sum, model.t0(), model.tmax(), n_coarse, exec);
    out.alpha = total.sup;
    out.argsup = total.argsup;
    out.tail_slope = total.tail_slope;
    out.envelope_slope = total.envelope_slope;
    for (std::size_t i = 0; i < n; ++i) {
        out.terms.push_back(
            sup_scan([&model, i](double t) { return model.term(i, t); }, model.t0(), model.tmax(), n_coarse, exec));
        out.sum_of_sups += out.terms.back().sup;
    }
    return out;
}

WindowConstant window_lipschitz(const CriterionModel& model, WindowKind kind, std::size_t n_coarse,
                                Execution exec) {
    const ProblemSpec& pr = model.problem();
    const AuxiliarySpec& aux = model.aux();
    ScalarFunction f;
    if (kind == WindowKind::damping_rate) {
        f = [&aux](double s) { return aux.g(s); };
    } else {
        f = [&pr, &aux](double s) {
            return std::fabs(pr.c(s) / aux.p(s)) * signed_power(aux.p(pr.r2.tau(s)), pr.gamma);
        };
    }
    const double t0 = model.t0();
    const double tmax = model.tmax();
    CumulativeIntegral F(f, t0, t0, model.exponent().options());
    F.extend_to(tmax);

    WindowConstant out;
    out.pointwise = sup_scan([&f](double s) { return std::fabs(f(s)); }, t0, tmax, n_coarse, exec).sup;

    constexpr double widths[] = {1.0, 0.25, 1.0 / 16, 1.0 / 64, 1.0 / 256};
    const double last = std::max(t0, tmax - 1.0);
    std::vector<double> ts(n_coarse);
    for (std::size_t i = 0; i < n_coarse; ++i)
        ts[i] = t0 + (last - t0) * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, n_coarse - 1));
    const std::vector<double> ratios = sample(
        [&](double t) {
            double best = 0.0;
            for (double w : widths) best = std::max(best, std::fabs(F.between(t, t + w)) / w);
            return best;
        },
        ts, exec);
    out.window = *std::max_element(ratios.begin(), ratios.end());
    return out;
}

double K_estimate(const CumulativeExponent& exponent, double tmax, std::size_t n) {
    const double t0 = exponent.t0();
    if (!(tmax > t0)) return 1.0;
    n = std::max<std::size_t>(n, 2);
    exponent.extend_to(tmax);
    double running = -std::numeric_limits<double>::infinity();
    double drawdown = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + (tmax - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double G = exponent.cumulative(t);
        running = std::max(running, G);
        drawdown = std::max(drawdown, running - G);
    }
    return std::exp(drawdown);
}

AsymptoticCheck asymptotic_check(const CriterionModel& model) {
    AsymptoticCheck out;
    const double t0 = model.t0();
    const double tmax = model.tmax();
    const double span = tmax - t0;
    const double decade = t0 + 0.1 * span;
    out.decay_tail = model.decay_term(tmax);
    out.decay_slope = (out.decay_tail - model.decay_term(decade)) / (tmax - decade);
    out.decaying = out.decay_slope < 0.0 || out.decay_tail < 1e-3;

    const CumulativeExponent& G = model.exponent();
    out.exponent_end = G.cumulative(tmax);
    const double mid = G.cumulative(t0 + 0.5 * span);
    const double quarter = G.cumulative(t0 + 0.25 * span);
    out.exponent_last = out.exponent_end - mid;
    out.exponent_previous = mid - quarter;
    out.divergent = out.exponent_last > 1e-8 && out.exponent_last >= 0.75 * out.exponent_previous;
    return out;
}

DeltaBounds delta_bounds(double alpha, double K, double epsilon, const CriterionModel& model) {
    if (!(alpha < 1.0)) throw std::domain_error("delta bounds need alpha < 1");
    if (!(K >= 1.0)) throw std::domain_error("K must be at least 1");
    if (!(epsilon > 0.0)) throw std::domain_error("epsilon must be positive");
    DeltaBounds out;
    const double t0 = model.t0();
    out.head = 1.0 + model.window_kernel(t0) + model.term(0, t0);
    out.existence = (1.0 - alpha) / out.head;
    out.uniform = std::min(epsilon, (1.0 - alpha) * epsilon / (2.0 * K)) * (1.0 - 1e-9);
    return out;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::satisfied: return "satisfied";
        case Verdict::violated: return "violated";
        default: return "inconclusive";
    }
}

CriteriaReport check_criteria(const ProblemSpec& problem, const AuxiliarySpec& aux, const CriteriaOptions& options,
                              Execution exec) {
    CriteriaReport r;
    r.warnings = validate(problem, aux, options.tmax).warnings;
    QuadratureOptions q = options.quadrature;
    q.execution = exec;
    const CriterionModel model(problem, aux, options.tmax, q);
    r.form = to_string(problem.form);
    r.t0 = problem.t0;
    r.tmax = options.tmax;
    r.horizon = model.horizon();
    r.n_coarse = options.n_coarse;
    r.epsilon = options.epsilon;

    r.alpha = alpha_estimate(model, options.n_coarse, exec);
    r.L1 = window_lipschitz(model, WindowKind::decay_coefficient, options.n_coarse, exec);
    r.L2 = window_lipschitz(model, WindowKind::damping_rate, options.n_coarse, exec);
    r.K = K_estimate(model.exponent(), options.tmax);
    r.asymptotic = asymptotic_check(model);

    const double alpha = r.alpha.alpha;
    const double span = options.tmax - problem.t0;
    if (alpha >= 1.0) {
        r.bounded = Verdict::violated;
    } else if (r.alpha.envelope_slope <= 1e-9 || alpha + r.alpha.envelope_slope * span < 1.0) {
        r.bounded = Verdict::satisfied;
    } else {
        r.bounded = Verdict::inconclusive;
        r.warnings.push_back("supremum still growing at Tmax; extrapolated sum reaches 1");
    }
    if (alpha < 1.0) {
        r.delta = delta_bounds(alpha, r.K, options.epsilon, model);
        r.delta_defined = true;
    }

    const bool K_finite = std::isfinite(r.K) && r.K < 1e12;
    if (r.bounded == Verdict::satisfied && K_finite) r.uniform = Verdict::satisfied;
    else if (r.bounded == Verdict::violated) r.uniform = Verdict::violated;
    else r.uniform = Verdict::inconclusive;

    if (r.uniform == Verdict::violated) r.asymptotically_stable = Verdict::violated;
    else if (r.uniform == Verdict::satisfied && r.asymptotic.decaying && r.asymptotic.divergent)
        r.asymptotically_stable = Verdict::satisfied;
    else r.asymptotically_stable = Verdict::inconclusive;
    return r;
}

int exit_code(const CriteriaReport& report) {
    switch (report.bounded) {
        case Verdict::satisfied: return 0;
        case Verdict::violated: return 2;
        default: return 3;
    }
}

std::string report_json(const CriteriaReport& r) {
    nlohmann::ordered_json j;
    j["form"] = r.form;
    j["t0"] = r.t0;
    j["tmax"] = r.tmax;
    j["horizon"] = r.horizon;
    j["n_coarse"] = r.n_coarse;
    j["certification"] = "grid";
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.alpha.terms.size(); ++i) {
        terms.push_back({{"name", r.alpha.names[i]},
                         {"sup", r.alpha.terms[i].sup},
                         {"argsup", r.alpha.terms[i].argsup},
                         {"tail_slope", r.alpha.terms[i].tail_slope}});
    }
    j["terms"] = terms;
    j["alpha"] = {{"sup_of_sum", r.alpha.alpha},
                  {"argsup", r.alpha.argsup},
                  {"sum_of_sups", r.alpha.sum_of_sups},
                  {"tail_slope", r.alpha.tail_slope},
                  {"envelope_slope", r.alpha.envelope_slope}};
    j["L1"] = {{"window", r.L1.window}, {"pointwise", r.L1.pointwise}};
    j["L2"] = {{"window", r.L2.window}, {"pointwise", r.L2.pointwise}};
    j["K"] = r.K;
    j["epsilon"] = r.epsilon;
    if (r.delta_defined)
        j["delta"] = {{"existence", r.delta.existence}, {"uniform", r.delta.uniform}, {"head", r.delta.head}};
    else
        j["delta"] = nullptr;
    j["asymptotic"] = {{"decay_tail", r.asymptotic.decay_tail},
                       {"decay_slope", r.asymptotic.decay_slope},
                       {"exponent_end", r.asymptotic.exponent_end},
                       {"exponent_last", r.asymptotic.exponent_last},
                       {"exponent_previous", r.asymptotic.exponent_previous},
                       {"decaying", r.asymptotic.decaying},
                       {"divergent", r.asymptotic.divergent}};
    j["verdicts"] = {{"bounded", to_string(r.bounded)},
                     {"uniform_stability", to_string(r.uniform)},
                     {"asymptotic_stability", to_string(r.asymptotically_stable)}};
    j["exit_code"] = exit_code(r);
    j["warnings"] = r.warnings;
    return j.dump(2) + "\n";
}

std::string report_text(const CriteriaReport& r) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "form = " << r.form << "\n";
    os << "t0 = " << r.t0 << "\n";
    os << "tmax = " << r.tmax << "\n";
    os << "horizon = " << r.horizon << "\n";
    os << "n_coarse = " << r.n_coarse << "\n";
    for (std::size_t i = 0; i < r.alpha.terms.size(); ++i) {
        const std::string key = "term." + r.alpha.names[i];
        os << key << ".sup = " << r.alpha.terms[i].sup << "\n";
        os << key << ".argsup = " << r.alpha.terms[i].argsup << "\n";
    }
    os << "alpha = " << r.alpha.alpha << "\n";
    os << "alpha.argsup = " << r.alpha.argsup << "\n";
    os << "alpha.sum_of_sups = " << r.alpha.sum_of_sups << "\n";
    os << "alpha.tail_slope = " << r.alpha.tail_slope << "\n";
    os << "alpha.envelope_slope = " << r.alpha.envelope_slope << "\n";
    os << "L1.window = " << r.L1.window << "\n";
    os << "L1.pointwise = " << r.L1.pointwise << "\n";
    os << "L2.window = " << r.L2.window << "\n";
    os << "L2.pointwise = " << r.L2.pointwise << "\n";
    os << "K = " << r.K << "\n";
    os << "epsilon = " << r.epsilon << "\n";
    if (r.delta_defined) {
        os << "delta.existence = " << r.delta.existence << "\n";
        os << "delta.uniform = " << r.delta.uniform << "\n";
    }
    os << "asymptotic.decay_tail = " << r.asymptotic.decay_tail << "\n";
    os << "asymptotic.decay_slope = " << r.asymptotic.decay_slope << "\n";
    os << "asymptotic.exponent_end = " << r.asymptotic.exponent_end << "\n";
    os << "asymptotic.decaying = " << (r.asymptotic.decaying ? "true" : "false") << "\n";
    os << "asymptotic.divergent = " << (r.asymptotic.divergent ? "true" : "false") << "\n";
    os << "verdict.bounded = " << to_string(r.bounded) << "\n";
    os << "verdict.uniform_stability = " << to_string(r.uniform) << "\n";
    os << "verdict.asymptotic_stability = " << to_string(r.asymptotically_stable) << "\n";
    for (const auto& w : r.warnings) os << "warning = " << w << "\n";
    return os.str();
}

Expression bracket_coefficient(const ProblemSpec& linear, const AuxiliarySpec& aux, const Expression& offset) {
    if (linear.form != Form::linear_neutral) throw std::invalid_argument("bracket_coefficient needs a linear-neutral problem");
    const Expression tau = linear.r1.tau_expression();
    const Expression& p = aux.p_expression();
    const Expression& dp = aux.dp_expression();
    const Expression p1 = p.substitute(Var::t, tau);
    const Expression p1d = dp.substitute(Var::t, tau);
    const Expression q = neutral_quotient(linear);
    const Expression cbar = p1 * q / p;
    const Expression beta = aux.g_expression() * cbar + differentiate(cbar);
    const Expression one = Expression::constant(1.0);
    const Expression kernel =
        (aux.g_expression().substitute(Var::t, tau) - p1d / p1) * (one - linear.r1.derivative());
    return (linear.b * p1d + (kernel - beta - offset) * p) / p1;
}

}  // namespace ndde
