#include "ndde/config.hpp"

#include "ndde/criteria.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace ndde {

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      line_(line) {}

namespace {

struct Entry {
    std::string value;
    std::size_t line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"problem",
         {"form", "t0", "gamma", "a", "a_bracket", "b", "c", "G", "k4", "Q", "Q_t", "Q_x", "bQ", "d", "F", "k2", "k3",
          "r1", "r2"}},
        {"aux", {"p", "g"}},
        {"history", {"psi", "dpsi", "lo"}},
        {"run",
         {"tmax", "n_coarse", "epsilon", "spacing", "T", "step", "picard_T", "picard_step", "tol", "max_iter",
          "stability_T", "stability_step"}},
    };
    return keys;
}

class Reader {
public:
    Reader(std::string_view text, std::string source) : source_(std::move(source)) { scan(text); }

    [[noreturn]] void fail(std::size_t line, const std::string& what) const { throw ConfigError(source_, line, what); }

    bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
    std::size_t section_line(const std::string& s) const { return section_lines_.at(s); }

    bool has(const std::string& s, const std::string& k) const {
        auto it = sections_.find(s);
        return it != sections_.end() && it->second.count(k);
    }

    Entry& entry(const std::string& s, const std::string& k) {
        auto it = sections_.find(s);
        if (it == sections_.end() || !it->second.count(k))
            fail(has_section(s) ? section_line(s) : 0, "missing key '" + k + "' in [" + s + "]");
        Entry& e = it->second.at(k);
        e.used = true;
        return e;
    }

    Expression expression(const std::string& s, const std::string& k, std::initializer_list<Var> vars) {
        Entry& e = entry(s, k);
        try {
            return parse_expression(e.value, vars);
        } catch (const ParseError& err) {
            fail(e.line, k + ": " + err.what());
        }
    }

    std::optional<Expression> optional_expression(const std::string& s, const std::string& k,
                                                  std::initializer_list<Var> vars) {
        if (!has(s, k)) return std::nullopt;
        return expression(s, k, vars);
    }

    double number(const std::string& s, const std::string& k, double fallback) {
        if (!has(s, k)) return fallback;
        Entry& e = entry(s, k);
        double v = 0.0;
        const char* b = e.value.data();
        const char* end = b + e.value.size();
        auto [ptr, ec] = std::from_chars(b, end, v);
        if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail(e.line, k + ": expected a number, got '" + e.value + "'");
        return v;
    }

    void reject(const std::string& s, const std::string& k, const std::string& why) const {
        if (has(s, k)) fail(sections_.at(s).at(k).line, "key '" + k + "' " + why);
    }

    void check_all_used() const {
        for (const auto& [name, section] : sections_)
            for (const auto& [key, e] : section)
                if (!e.used) fail(e.line, "key '" + key + "' is not used in [" + name + "]");
    }

private:
    void scan(std::string_view text) {
        std::string current;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string_view::npos) nl = text.size();
            std::string_view raw = text.substr(pos, nl - pos);
            pos = nl + 1;
            ++line_no;
            if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

            // Strip comments outside quotes.
            bool quoted = false;
            std::size_t cut = raw.size();
            for (std::size_t i = 0; i < raw.size(); ++i) {
                if (raw[i] == '"') quoted = !quoted;
                if (!quoted && (raw[i] == '#' || raw[i] == ';')) {
                    cut = i;
                    break;
                }
            }
            if (quoted) fail(line_no, "unterminated string");
            const std::string line = trim(raw.substr(0, cut));
            if (line.empty()) continue;

            if (line.front() == '[') {
                if (line.back() != ']') fail(line_no, "malformed section header");
                current = trim(std::string_view(line).substr(1, line.size() - 2));
                if (!known_keys().count(current)) fail(line_no, "unknown section [" + current + "]");
                if (sections_.count(current)) fail(line_no, "duplicate section [" + current + "]");
                sections_[current];
                section_lines_[current] = line_no;
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) fail(line_no, "expected key = value");
            if (current.empty()) fail(line_no, "key outside any section");
            const std::string key = trim(std::string_view(line).substr(0, eq));
            std::string value = trim(std::string_view(line).substr(eq + 1));
            if (key.empty()) fail(line_no, "empty key");
            if (!known_keys().at(current).count(key)) fail(line_no, "unknown key '" + key + "' in [" + current + "]");
            if (sections_[current].count(key)) fail(line_no, "duplicate key '" + key + "'");
            if (!value.empty() && value.front() == '"') {
                if (value.size() < 2 || value.back() != '"' ||
                    std::count(value.begin(), value.end(), '"') != 2)
                    fail(line_no, "malformed quoted value");
                value = value.substr(1, value.size() - 2);
            }
            if (trim(value).empty()) fail(line_no, "empty value for '" + key + "'");
            sections_[current][key] = Entry{value, line_no, false};
        }
    }

    std::string source_;
    std::map<std::string, Section> sections_;
    std::map<std::string, std::size_t> section_lines_;
};

std::size_t count(Reader& r, const std::string& s, const std::string& k, std::size_t fallback) {
    if (!r.has(s, k)) return fallback;
    const Entry& e = r.entry(s, k);
    const double v = r.number(s, k, 0.0);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) r.fail(e.line, k + " must be a positive integer");
    return static_cast<std::size_t>(v);
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& source) {
    Reader r(text, source);
    for (const char* s : {"problem", "aux", "history"})
        if (!r.has_section(s)) r.fail(0, std::string("missing section [") + s + "]");

    RunConfig cfg;
    cfg.source = source;
    ProblemSpec& pr = cfg.problem;

    const Entry& form = r.entry("problem", "form");
    if (form.value == "linear-neutral")
        pr.form = Form::linear_neutral;
    else if (form.value == "general")
        pr.form = Form::general;
    else
        r.fail(form.line, "form must be 'linear-neutral' or 'general'");

    pr.t0 = r.number("problem", "t0", 0.0);
    if (r.has("problem", "gamma")) {
        Entry& e = r.entry("problem", "gamma");
        try {
            pr.gamma = parse_rational(e.value);
        } catch (const std::exception& err) {
            r.fail(e.line, std::string("gamma: ") + err.what());
        }
    }
    const std::initializer_list<Var> T{Var::t};
    const std::initializer_list<Var> TX{Var::t, Var::x};
    pr.c = r.expression("problem", "c", T);
    if (auto G = r.optional_expression("problem", "G", {Var::x})) pr.G = *G;
    pr.k4 = r.number("problem", "k4", 1.0);
    try {
        pr.r1 = DelaySpec(r.expression("problem", "r1", T));
        pr.r2 = DelaySpec(r.expression("problem", "r2", T));
    } catch (const DifferentiationError& err) {
        r.fail(r.section_line("problem"), std::string("delay: ") + err.what());
    }

    const std::size_t pline = r.section_line("problem");
    if (pr.form == Form::linear_neutral) {
        for (const char* k : {"Q", "Q_t", "Q_x", "bQ", "d", "F", "k2", "k3"})
            r.reject("problem", k, "belongs to the general form");
        pr.b = r.expression("problem", "b", T);
    } else {
        r.reject("problem", "b", "belongs to the linear-neutral form (use Q)");
        r.reject("problem", "a_bracket", "is only available for the linear-neutral form");
        pr.Q = r.expression("problem", "Q", TX);
        pr.bQ = r.expression("problem", "bQ", T);
        pr.d = r.optional_expression("problem", "d", T).value_or(Expression::constant(0.0));
        pr.F = r.optional_expression("problem", "F", {Var::x, Var::y}).value_or(Expression::constant(0.0));
        pr.k2 = r.number("problem", "k2", 1.0);
        pr.k3 = r.number("problem", "k3", 1.0);
        const auto qt = r.optional_expression("problem", "Q_t", TX);
        const auto qx = r.optional_expression("problem", "Q_x", TX);
        if (qt.has_value() != qx.has_value()) r.fail(pline, "Q_t and Q_x must be given together");
        if (qt) {
            pr.Q_t = *qt;
            pr.Q_x = *qx;
        } else {
            try {
                pr.derive_partials();
            } catch (const DifferentiationError& err) {
                r.fail(r.entry("problem", "Q").line, std::string("Q: ") + err.what() + "; supply Q_t and Q_x");
            }
        }
    }

    cfg.aux = AuxiliarySpec(r.expression("aux", "p", T), r.expression("aux", "g", T), pr.t0);

    if (r.has("problem", "a") == r.has("problem", "a_bracket"))
        r.fail(pline, "exactly one of 'a' and 'a_bracket' is required");
    if (r.has("problem", "a")) {
        pr.a = r.expression("problem", "a", T);
    } else {
        const Expression offset = r.expression("problem", "a_bracket", T);
        try {
            pr.a = bracket_coefficient(pr, cfg.aux, offset);
        } catch (const std::exception& err) {
            r.fail(r.entry("problem", "a_bracket").line, std::string("a_bracket: ") + err.what());
        }
    }

    RunSettings& run = cfg.run;
    run.tmax = r.number("run", "tmax", run.tmax);
    run.n_coarse = count(r, "run", "n_coarse", run.n_coarse);
    run.epsilon = r.number("run", "epsilon", run.epsilon);
    run.spacing = r.number("run", "spacing", run.spacing);
    run.T = r.number("run", "T", run.T);
    run.step = r.number("run", "step", run.step);
    run.picard_T = r.number("run", "picard_T", run.picard_T);
    run.picard_step = r.number("run", "picard_step", run.picard_step);
    run.tol = r.number("run", "tol", run.tol);
    run.max_iter = static_cast<int>(count(r, "run", "max_iter", static_cast<std::size_t>(run.max_iter)));
    run.stability_T = r.number("run", "stability_T", run.stability_T);
    run.stability_step = r.number("run", "stability_step", run.stability_step);
    for (double v : {run.epsilon, run.spacing, run.step, run.picard_step, run.tol, run.stability_step})
        if (!(v > 0.0)) r.fail(r.has_section("run") ? r.section_line("run") : 0, "[run] values must be positive");
    for (double v : {run.tmax, run.T, run.picard_T, run.stability_T})
        if (!(v > pr.t0)) r.fail(r.has_section("run") ? r.section_line("run") : 0, "[run] horizons must exceed t0");

    try {
        const ValidationReport rep = validate(pr, cfg.aux, run.tmax);
        cfg.warnings = rep.warnings;
    } catch (const ValidationError& err) {
        r.fail(pline, err.what());
    } catch (const DomainError& err) {
        r.fail(pline, err.what());
    }

    const double lo = r.has("history", "lo") ? r.number("history", "lo", 0.0)
                                               : std::min(pr.t0, horizon(pr, run.tmax).m);
    const std::size_t hline = r.section_line("history");
    if (lo > pr.t0) r.fail(r.has("history", "lo") ? r.entry("history", "lo").line : hline, "lo must not exceed t0");
    try {
        cfg.history = HistoryFunction(r.expression("history", "psi", T), lo, pr.t0,
                                      r.optional_expression("history", "dpsi", T));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& err) {
        r.fail(hline, std::string("psi: ") + err.what());
    }

    r.check_all_used();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string worked_example_config_text() {
    ProblemSpec pr;
    pr.form = Form::linear_neutral;
    pr.t0 = 0.0;
    pr.gamma = {1, 3};
    pr.b = parse_expression("sin(t)/7");
    pr.r1 = DelaySpec(parse_expression("0.2*t"));
    pr.r2 = pr.r1;
    pr.c = parse_expression("0.01*(0.8*t + 0.2)^(1/3)/((t + 0.1)*(t + 0.2))");
    const AuxiliarySpec aux(parse_expression("1/(t + 0.2)"), parse_expression("0.1/(t + 0.1)"), 0.0);
    const Expression a = bracket_coefficient(pr, aux);

    std::ostringstream os;
    os << "# Worked example: x' = -a x(0.8t) + (sin t / 7) x'(0.8t) + c sin(x^(1/3)(0.8t)), t >= 0.\n"
       << "# a(t) zeroes the bracket of the third criterion term for p = 1/(t+0.2), g = 0.1/(t+0.1).\n"
       << "\n[problem]\n"
       << "form = linear-neutral\n"
       << "t0 = 0\n"
       << "gamma = 1/3\n"
       << "a = \"" << a.to_string() << "\"\n"
       << "b = \"" << pr.b.to_string() << "\"\n"
       << "c = \"" << pr.c.to_string() << "\"\n"
       << "G = \"sin(x)\"\n"
       << "k4 = 1\n"
       << "r1 = \"0.2*t\"\n"
       << "r2 = \"0.2*t\"\n"
       << "\n[aux]\n"
       << "p = \"" << aux.p_expression().to_string() << "\"\n"
       << "g = \"" << aux.g_expression().to_string() << "\"\n"
       << "\n[history]\n"
       << "psi = \"0.001\"\n"
       << "\n[run]\n"
       << "tmax = 10000\n"
       << "n_coarse = 4096\n"
       << "epsilon = 0.1\n"
       << "T = 200\n"
       << "step = 0.001\n"
       << "picard_T = 50\n"
       << "picard_step = 0.01\n"
       << "tol = 1e-10\n"
       << "max_iter = 200\n"
       << "stability_T = 2000\n"
       << "stability_step = 0.01\n";
    return os.str();
}

}  // namespace ndde
