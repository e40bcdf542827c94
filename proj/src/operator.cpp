#include "ndde/operator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ndde {

namespace {

constexpr std::array<double, 4> kGaussNode = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                              0.8611363115940526};
constexpr std::array<double, 4> kGaussWeight = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                                0.3478548451374538};

double hermite(double start, double step, const std::vector<double>& v, const std::vector<double>& d, double t) {
    const std::size_t n = v.size() - 1;
    if (n == 0) return v[0];
    double x = (t - start) / step;
    if (const double r = std::round(x); std::fabs(x - r) <= 1e-12 * (1.0 + r)) x = r;  // exact at nodes
    auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, static_cast<double>(n - 1)));
    const double u = x - static_cast<double>(i);
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * v[i] + (u3 - 2 * u2 + u) * step * d[i] + (-2 * u3 + 3 * u2) * v[i + 1] +
           (u3 - u2) * step * d[i + 1];
}

double hermite_slope(double start, double step, const std::vector<double>& v, const std::vector<double>& d,
                     double t) {
    const std::size_t n = v.size() - 1;
    if (n == 0) return d[0];
    double x = (t - start) / step;
    if (const double r = std::round(x); std::fabs(x - r) <= 1e-12 * (1.0 + r)) x = r;  // exact at nodes
    auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, static_cast<double>(n - 1)));
    const double u = x - static_cast<double>(i);
    const double u2 = u * u;
    return ((6 * u2 - 6 * u) * v[i] + (-6 * u2 + 6 * u) * v[i + 1]) / step + (3 * u2 - 4 * u + 1) * d[i] +
           (3 * u2 - 2 * u) * d[i + 1];
}

void fd_slopes(const std::vector<double>& v, double h, std::vector<double>& d) {
    const std::size_t n = v.size();
    d.assign(n, 0.0);
    if (n < 2) return;
    if (n < 5) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? i : i + 1;
            d[i] = (v[b] - v[a]) / (h * static_cast<double>(b - a));
        }
        return;
    }
    const double c = 1.0 / (12.0 * h);
    d[0] = c * (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]);
    d[1] = c * (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]);
    for (std::size_t i = 2; i + 2 < n; ++i) d[i] = c * (v[i - 2] - 8 * v[i - 1] + 8 * v[i + 1] - v[i + 2]);
    const std::size_t m = n - 1;
    d[m] = c * (25 * v[m] - 48 * v[m - 1] + 36 * v[m - 2] - 16 * v[m - 3] + 3 * v[m - 4]);
    d[m - 1] = c * (3 * v[m] + 10 * v[m - 1] - 18 * v[m - 2] + 6 * v[m - 3] - v[m - 4]);
}

}  // namespace

double Mesh::history_node(std::size_t i) const {
    return i == history_cells ? t0 : lo + history_step() * static_cast<double>(i);
}

double Mesh::node(std::size_t i) const { return i == cells ? T : t0 + step() * static_cast<double>(i); }

Mesh Mesh::uniform(double lo, double t0, double T, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("mesh step must be positive");
    if (!(T > t0)) throw std::invalid_argument("mesh end must exceed t0");
    if (lo > t0) throw std::invalid_argument("mesh history start exceeds t0");
    Mesh m;
    m.lo = lo;
    m.t0 = t0;
    m.T = T;
    m.cells = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil((T - t0) / step - 1e-9)));
    m.history_cells =
        lo < t0 ? std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil((t0 - lo) / step - 1e-9))) : 0;
    return m;
}

GridFunction::GridFunction(Mesh mesh)
    : mesh_(mesh),
      hv_(mesh.history_cells ? mesh.history_cells + 1 : 0, 0.0),
      hd_(hv_.size(), 0.0),
      v_(mesh.cells + 1, 0.0),
      d_(mesh.cells + 1, 0.0) {}

double GridFunction::operator()(double t) const {
    if (t >= mesh_.t0) {
        if (t > mesh_.T * (1.0 + 1e-14) + 1e-14) throw std::out_of_range("grid function read past its end");
        return hermite(mesh_.t0, mesh_.step(), v_, d_, t);
    }
    const double slack = 1e-12 * (1.0 + std::fabs(mesh_.t0));
    if (t < mesh_.lo - slack) throw std::out_of_range("delayed argument below the mesh start");
    if (hv_.empty()) return v_[0];
    return hermite(mesh_.lo, mesh_.history_step(), hv_, hd_, std::max(t, mesh_.lo));
}

double GridFunction::derivative(double t) const {
    if (t >= mesh_.t0) return hermite_slope(mesh_.t0, mesh_.step(), v_, d_, t);
    if (hv_.empty()) return d_[0];
    return hermite_slope(mesh_.lo, mesh_.history_step(), hv_, hd_, std::max(t, mesh_.lo));
}

double GridFunction::solution_sup() const {
    double s = 0.0;
    for (double v : v_) s = std::max(s, std::fabs(v));
    return s;
}

double GridFunction::sup_norm() const {
    double s = solution_sup();
    for (double v : hv_) s = std::max(s, std::fabs(v));
    return s;
}

void GridFunction::estimate_slopes(bool history) {
    fd_slopes(v_, mesh_.step(), d_);
    if (history && !hv_.empty()) fd_slopes(hv_, mesh_.history_step(), hd_);
}

void GridFunction::write_csv(std::ostream& os, const std::string& label) const {
    os << std::setprecision(17);
    os << "# mesh lo=" << mesh_.lo << " t0=" << mesh_.t0 << " T=" << mesh_.T
       << " history_cells=" << mesh_.history_cells << " cells=" << mesh_.cells << "\n";
    os << "t," << label << "\n";
    for (std::size_t i = 0; i < hv_.size(); ++i) os << mesh_.history_node(i) << "," << hv_[i] << "\n";
    for (std::size_t i = 0; i < v_.size(); ++i) os << mesh_.node(i) << "," << v_[i] << "\n";
}

GridFunction GridFunction::read_csv(std::istream& is) {
    std::string line;
    Mesh m;
    bool have_mesh = false;
    std::vector<double> values;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# mesh", 0) == 0) {
                std::istringstream ls(line.substr(6));
                std::string kv;
                while (ls >> kv) {
                    const auto eq = kv.find('=');
                    if (eq == std::string::npos) continue;
                    const std::string key = kv.substr(0, eq);
                    const double val = std::stod(kv.substr(eq + 1));
                    if (key == "lo") m.lo = val;
                    else if (key == "t0") m.t0 = val;
                    else if (key == "T") m.T = val;
                    else if (key == "history_cells") m.history_cells = static_cast<std::size_t>(val);
                    else if (key == "cells") m.cells = static_cast<std::size_t>(val);
                }
                have_mesh = true;
            }
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-' && line[0] != '.') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("grid CSV: expected `t,value`");
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (!have_mesh) throw std::runtime_error("grid CSV: missing `# mesh` metadata line");
    GridFunction f(m);
    const std::size_t nh = f.hv_.size();
    if (values.size() != nh + f.v_.size()) throw std::runtime_error("grid CSV: node count does not match mesh");
    std::copy(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(nh), f.hv_.begin());
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(nh), values.end(), f.v_.begin());
    f.estimate_slopes(true);
    return f;
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
    if (a.values().size() != b.values().size()) throw std::invalid_argument("sup_distance: mesh mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) s = std::max(s, std::fabs(a.values()[i] - b.values()[i]));
    return s;
}

struct SplitOperator::Plan {
    ProblemSpec linear_or_general;
    ProblemSpec problem;  // general form
    AuxiliarySpec aux;
    HistoryFunction psi;
    Mesh mesh;
    Execution exec = Execution::parallel;
    double gamma = 1.0 / 3.0;
    double z0 = 0.0;
    double head = 0.0;

    // solution-cell probes, 4 per cell, cell j covers [t_j, t_{j+1}]
    std::vector<double> s, weight, tau1, tau2, beta, g, p1, p2, qfac, dcoef, ccoef, p2gamma, kw;
    // history-cell probes for the window cumulative
    std::vector<double> hs, hkw;
    // per cell: exp(-(G(t_{j+1}) - G(t_j)))
    std::vector<double> decay;
    // per solution node
    std::vector<double> node_t, node_head, node_tau1, node_p1, node_p, node_k;
    std::vector<double> hnode_k;

    double zval(const GridFunction& z, double t) const { return t < mesh.t0 ? psi.value(t) : z(t); }
};

SplitOperator::SplitOperator(const ProblemSpec& problem, const AuxiliarySpec& aux, const HistoryFunction& psi,
                             double T, double step, Execution exec)
    : plan_(std::make_unique<Plan>()) {
    Plan& P = *plan_;
    P.linear_or_general = problem;
    P.problem = to_general(problem);
    P.aux = aux;
    P.psi = psi;
    P.exec = exec;
    P.gamma = problem.gamma.value();
    const double t0 = problem.t0;
    const double lo = std::min(horizon(problem, T).m, t0);
    if (psi.lo() > lo + 1e-12 * (1.0 + std::fabs(lo)))
        throw ValidationError("history function must cover [m(t0), t0]");
    const double pt0 = aux.p(t0);
    if (lo < t0 && std::fabs(pt0 - 1.0) > 1e-12)
        throw ValidationError("p(t0) must equal 1 when the history interval [m(t0), t0] is non-degenerate");
    P.mesh = Mesh::uniform(lo, t0, T, step);
    const Mesh& M = P.mesh;
    const ProblemSpec& pr = P.problem;

    CumulativeExponent G([&aux](double u) { return aux.g(u); }, t0, QuadratureOptions{1e-12, 50, 1.0, exec});
    G.extend_to(T);

    const std::size_t N = M.cells;
    const double h = M.step();
    const std::size_t np = 4 * N;
    for (auto* v : {&P.s, &P.weight, &P.tau1, &P.tau2, &P.beta, &P.g, &P.p1, &P.p2, &P.qfac, &P.dcoef, &P.ccoef,
                    &P.p2gamma, &P.kw})
        v->assign(np, 0.0);
    P.decay.assign(N, 0.0);
    for_each_index(N, exec, [&](std::size_t j) {
        const double a = M.node(j), b = M.node(j + 1);
        const double half = 0.5 * (b - a);
        const double Gb = G.cumulative(b);
        P.decay[j] = std::exp(G.cumulative(a) - Gb);
        for (std::size_t q = 0; q < 4; ++q) {
            const std::size_t k = 4 * j + q;
            const double s = a + half * (1.0 + kGaussNode[q]);
            const double t1 = pr.r1.tau(s), t2 = pr.r2.tau(s);
            const double p = aux.p(s), dp = aux.dp(s);
            const double ps1 = aux.p(t1), ps2 = aux.p(t2);
            P.s[k] = s;
            P.weight[k] = kGaussWeight[q] * half * std::exp(G.cumulative(s) - Gb);
            P.kw[k] = kGaussWeight[q] * half * aux.kernel(s);
            P.tau1[k] = t1;
            P.tau2[k] = t2;
            P.beta[k] = aux.kernel(t1) * (1.0 - pr.r1.rate(s)) - pr.a(s) * ps1 / p;
            P.g[k] = aux.g(s);
            P.p1[k] = ps1;
            P.p2[k] = ps2;
            P.qfac[k] = (aux.g(s) * p - dp) / (p * p);
            P.dcoef[k] = pr.d(s) / p;
            P.ccoef[k] = pr.c(s) / p;
            P.p2gamma[k] = signed_power(ps2, P.gamma);
        }
    });
    (void)h;

    P.node_t.resize(N + 1);
    P.node_head.resize(N + 1);
    P.node_tau1.resize(N + 1);
    P.node_p1.resize(N + 1);
    P.node_p.resize(N + 1);
    P.node_k.resize(N + 1);
    for_each_index(N + 1, exec, [&](std::size_t i) {
        const double t = M.node(i);
        P.node_t[i] = t;
        P.node_head[i] = std::exp(-G.cumulative(t));
        P.node_tau1[i] = pr.r1.tau(t);
        P.node_p1[i] = aux.p(P.node_tau1[i]);
        P.node_p[i] = aux.p(t);
        P.node_k[i] = aux.kernel(t);
    });

    const std::size_t H = M.history_cells;
    P.hs.assign(4 * H, 0.0);
    P.hkw.assign(4 * H, 0.0);
    P.hnode_k.assign(H ? H + 1 : 0, 0.0);
    for (std::size_t j = 0; j < H; ++j) {
        const double a = M.history_node(j), b = M.history_node(j + 1);
        const double half = 0.5 * (b - a);
        for (std::size_t q = 0; q < 4; ++q) {
            const double s = a + half * (1.0 + kGaussNode[q]);
            P.hs[4 * j + q] = s;
            P.hkw[4 * j + q] = kGaussWeight[q] * half * aux.g(s);
        }
    }
    for (std::size_t i = 0; i < P.hnode_k.size(); ++i) P.hnode_k[i] = aux.g(M.history_node(i));

    // Head constant: z(t0) - ∫_{τ1(t0)}^{t0} k ψ - Q(t0, ψ(τ1(t0)))/p(t0).
    P.z0 = psi.value(t0) / pt0;
    const double tau0 = pr.r1.tau(t0);
    double window0 = 0.0;
    if (tau0 < t0) {
        window0 = adaptive_simpson([&](double u) { return aux.g(u) * psi.value(u); }, tau0, t0, 1e-13, 50);
    }
    const double x_tau0 = tau0 < t0 ? psi.value(tau0) : psi.value(t0);
    P.head = P.z0 - window0 - pr.Q.evaluate({t0, x_tau0, 0.0}) / pt0;
}

SplitOperator::~SplitOperator() = default;

const Mesh& SplitOperator::mesh() const { return plan_->mesh; }
const ProblemSpec& SplitOperator::problem() const { return plan_->linear_or_general; }
const AuxiliarySpec& SplitOperator::aux() const { return plan_->aux; }
const HistoryFunction& SplitOperator::history() const { return plan_->psi; }
double SplitOperator::head() const { return plan_->head; }
Execution SplitOperator::execution() const { return plan_->exec; }

namespace {

void fill_history(const SplitOperator& op, GridFunction& z) {
    const Mesh& M = op.mesh();
    const HistoryFunction& psi = op.history();
    auto& hv = z.history_values();
    auto& hd = z.history_slopes();
    for (std::size_t i = 0; i < hv.size(); ++i) {
        const double t = M.history_node(i);
        hv[i] = psi.value(t);
        hd[i] = psi.has_derivative() ? psi.derivative(t) : 0.0;
    }
    if (!hv.empty() && !psi.has_derivative()) {
        std::vector<double> d;
        fd_slopes(hv, M.history_step(), d);
        hd = d;
    }
}

}  // namespace

GridFunction SplitOperator::initial_guess() const {
    const double z0 = plan_->z0;
    return candidate([z0](double) { return z0; }, [](double) { return 0.0; });
}

GridFunction SplitOperator::candidate(const std::function<double(double)>& f,
                                      const std::function<double(double)>& df) const {
    GridFunction z(plan_->mesh);
    fill_history(*this, z);
    for (std::size_t i = 0; i < z.values().size(); ++i) z.values()[i] = f(plan_->mesh.node(i));
    if (df) {
        for (std::size_t i = 0; i < z.values().size(); ++i) z.slopes()[i] = df(plan_->mesh.node(i));
    } else {
        z.estimate_slopes();
    }
    return z;
}

GridFunction SplitOperator::resample(const GridFunction& z) const {
    const Mesh& M = plan_->mesh;
    if (std::fabs(z.mesh().T - M.T) > 1e-9 * (1.0 + std::fabs(M.T)) || std::fabs(z.mesh().t0 - M.t0) > 1e-12)
        throw std::invalid_argument("resample: grid function covers a different interval");
    GridFunction out(M);
    fill_history(*this, out);
    for (std::size_t i = 0; i <= M.cells; ++i) {
        const double t = M.node(i);
        out.values()[i] = z(t);
        out.slopes()[i] = z.derivative(t);
    }
    return out;
}

namespace {

/// Window cumulative C(t) = ∫_{lo}^{t} k z on both segments.
GridFunction window_cumulative(const SplitOperator::Plan& P, const GridFunction& z) {
    const Mesh& M = P.mesh;
    GridFunction C(M);
    const std::size_t H = M.history_cells;
    double acc = 0.0;
    if (H) {
        auto& hv = C.history_values();
        auto& hd = C.history_slopes();
        hv[0] = 0.0;
        for (std::size_t j = 0; j < H; ++j) {
            double cell = 0.0;
            for (std::size_t q = 0; q < 4; ++q) cell += P.hkw[4 * j + q] * P.psi.value(P.hs[4 * j + q]);
            acc += cell;
            hv[j + 1] = acc;
        }
        for (std::size_t i = 0; i <= H; ++i) hd[i] = P.hnode_k[i] * P.psi.value(M.history_node(i));
    }
    const std::size_t N = M.cells;
    std::vector<double> cells(N);
    for_each_index(N, P.exec, [&](std::size_t j) {
        double cell = 0.0;
        for (std::size_t q = 0; q < 4; ++q) cell += P.kw[4 * j + q] * z(P.s[4 * j + q]);
        cells[j] = cell;
    });
    auto& v = C.values();
    auto& d = C.slopes();
    v[0] = acc;
    for (std::size_t j = 0; j < N; ++j) v[j + 1] = v[j] + cells[j];
    for (std::size_t i = 0; i <= N; ++i) d[i] = P.node_k[i] * z.values()[i];
    return C;
}

enum class Part { A, B, both };

GridFunction apply_parts(const SplitOperator& op, const SplitOperator::Plan& P, const GridFunction& z, Part part) {
    const Mesh& M = P.mesh;
    if (z.values().size() != M.cells + 1) throw std::invalid_argument("operator applied to a grid function on another mesh");
    const ProblemSpec& pr = P.problem;
    const bool wantA = part != Part::B, wantB = part != Part::A;
    const std::size_t N = M.cells;

    GridFunction C = wantB ? window_cumulative(P, z) : GridFunction(M);
    std::vector<double> cellA(N, 0.0), cellB(N, 0.0);
    for_each_index(N, P.exec, [&](std::size_t j) {
        double a = 0.0, b = 0.0;
        for (std::size_t q = 0; q < 4; ++q) {
            const std::size_t k = 4 * j + q;
            const double s = P.s[k];
            const double z1 = P.zval(z, P.tau1[k]);
            const double z2 = P.zval(z, P.tau2[k]);
            if (wantA) {
                const double arg = P.p2gamma[k] * signed_power(z2, P.gamma);
                a += P.weight[k] * P.ccoef[k] * pr.G.evaluate({s, arg, 0.0});
            }
            if (wantB) {
                const double u1 = P.p1[k] * z1, u2 = P.p2[k] * z2;
                const double window = C(s) - C(P.tau1[k]);
                double f = -P.g[k] * window + P.beta[k] * z1;
                if (P.qfac[k] != 0.0) f -= pr.Q.evaluate({s, u1, 0.0}) * P.qfac[k];
                if (P.dcoef[k] != 0.0) f += P.dcoef[k] * pr.F.evaluate({s, u1, u2});
                b += P.weight[k] * f;
            }
        }
        cellA[j] = a;
        cellB[j] = b;
    });

    std::vector<double> IA(N + 1, 0.0), IB(N + 1, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
        IA[j + 1] = P.decay[j] * IA[j] + cellA[j];
        IB[j + 1] = P.decay[j] * IB[j] + cellB[j];
    }

    GridFunction out(M);
    fill_history(op, out);
    auto& v = out.values();
    for_each_index(N + 1, P.exec, [&](std::size_t i) {
        double value = 0.0;
        if (wantA) value += IA[i];
        if (wantB) {
            const double t = P.node_t[i];
            const double z1 = P.zval(z, P.node_tau1[i]);
            value += P.head * P.node_head[i] + (C(t) - C(P.node_tau1[i])) +
                     pr.Q.evaluate({t, P.node_p1[i] * z1, 0.0}) / P.node_p[i] + IB[i];
        }
        v[i] = value;
    });
    if (part == Part::A) {
        for (auto& h : out.history_values()) h = 0.0;
        for (auto& h : out.history_slopes()) h = 0.0;
    }
    out.estimate_slopes();
    return out;
}

}  // namespace

GridFunction SplitOperator::apply_A(const GridFunction& z) const { return apply_parts(*this, *plan_, z, Part::A); }
GridFunction SplitOperator::apply_B(const GridFunction& z) const { return apply_parts(*this, *plan_, z, Part::B); }
GridFunction SplitOperator::apply(const GridFunction& z) const { return apply_parts(*this, *plan_, z, Part::both); }

const char* to_string(PicardStatus s) {
    switch (s) {
        case PicardStatus::converged: return "converged";
        case PicardStatus::converged_outside: return "converged-outside-ball";
        case PicardStatus::not_converged: return "not-converged";
        default: return "failed";
    }
}

PicardResult picard_solve(const SplitOperator& op, double tol, int max_iter) {
    PicardResult r;
    GridFunction z = op.initial_guess();
    r.max_abs = z.sup_norm();
    r.cap_exceeded = r.max_abs > 1.0;
    for (int n = 0; n < max_iter; ++n) {
        GridFunction next;
        try {
            next = op.apply(z);
        } catch (const std::exception& e) {
            r.status = PicardStatus::failed;
            r.message = std::string("iteration stopped: ") + e.what();
            r.z = z;
            r.iterations = n;
            return r;
        }
        const double step = sup_distance(next, z);
        r.iterations = n + 1;
        if (!std::isfinite(step) || !std::isfinite(next.solution_sup())) {
            r.steps.push_back(std::numeric_limits<double>::infinity());
            if (!r.steps.empty() && r.steps.size() > 1) r.ratios.push_back(std::numeric_limits<double>::infinity());
            r.status = PicardStatus::failed;
            r.message = "non-finite iterate after " + std::to_string(n + 1) + " iterations";
            r.z = z;
            return r;
        }
        if (!r.steps.empty()) r.ratios.push_back(r.steps.back() > 0.0 ? step / r.steps.back() : 0.0);
        r.steps.push_back(step);
        r.max_abs = std::max(r.max_abs, next.sup_norm());
        if (next.sup_norm() > 1.0) r.cap_exceeded = true;
        z = std::move(next);
        if (step < tol) {
            r.converged = true;
            break;
        }
    }
    r.z = z;
    try {
        r.residual = residual(op, r.z);
    } catch (const std::exception&) {
        r.residual = std::numeric_limits<double>::infinity();
    }
    if (r.converged && !r.cap_exceeded) {
        r.status = PicardStatus::converged;
        r.message = "converged after " + std::to_string(r.iterations) + (r.iterations == 1 ? " iteration" : " iterations");
    } else if (r.converged) {
        r.status = PicardStatus::converged_outside;
        std::ostringstream os;
        os << "step below tolerance after " << r.iterations << " iterations, but iterates reached |z| = " << r.max_abs
           << " > 1: no fixed point in the candidate ball";
        r.message = os.str();
    } else {
        r.status = PicardStatus::not_converged;
        std::ostringstream os;
        os << "no convergence after " << r.iterations << " iterations (last step " << r.steps.back() << ")";
        r.message = os.str();
    }
    return r;
}

double residual(const SplitOperator& op, const GridFunction& z) {
    const GridFunction zr = op.resample(z);
    return sup_distance(zr, op.apply(zr));
}

double contraction_ratio(const SplitOperator& op, const GridFunction& z1, const GridFunction& z2) {
    const GridFunction a = op.resample(z1), b = op.resample(z2);
    const double gap = sup_distance(a, b);
    if (!(gap > 0.0)) throw std::invalid_argument("contraction_ratio: candidates coincide");
    return sup_distance(op.apply_B(a), op.apply_B(b)) / gap;
}

GridFunction reconstruct_x(const GridFunction& z, const AuxiliarySpec& aux) {
    GridFunction x = z;
    const Mesh& M = z.mesh();
    for (std::size_t i = 0; i < x.values().size(); ++i) {
        const double t = M.node(i);
        x.values()[i] = aux.p(t) * z.values()[i];
        x.slopes()[i] = aux.dp(t) * z.values()[i] + aux.p(t) * z.slopes()[i];
    }
    return x;
}

}  // namespace ndde
