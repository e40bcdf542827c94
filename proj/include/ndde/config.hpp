#pragma once

#include "ndde/model.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ndde {

/// Config parse or validation failure; the message starts with `source:line:`
/// when a line is known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct RunSettings {
    // check
    double tmax = 1e4;
    std::size_t n_coarse = 4096;
    double epsilon = 0.1;
    double spacing = 1.0;  // checkpoint spacing of cumulative integrals
    // simulate
    double T = 200.0;
    double step = 1e-3;
    // picard
    double picard_T = 50.0;
    double picard_step = 0.01;
    double tol = 1e-10;
    int max_iter = 200;
    // stability
    double stability_T = 2000.0;
    double stability_step = 0.01;
};

struct RunConfig {
    std::string source;
    ProblemSpec problem;
    AuxiliarySpec aux;
    HistoryFunction history;
    RunSettings run;
    std::vector<std::string> warnings;
};

/// Sections [problem], [aux], [history], [run]; `key = "expression"` or
/// `key = number`; '#' and ';' start comments. Unknown or duplicate keys and
/// keys foreign to the declared form are rejected.
RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Text of the shipped worked-example preset, with a(t) printed in closed form.
std::string worked_example_config_text();

}  // namespace ndde
