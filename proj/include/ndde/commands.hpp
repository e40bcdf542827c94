#pragma once

#include "ndde/config.hpp"
#include "ndde/criteria.hpp"
#include "ndde/integrator.hpp"
#include "ndde/operator.hpp"

#include <optional>
#include <string>

namespace ndde {

/// A summary: ordered scalar fields, emitted both as `key = value` lines and as JSON.
struct Summary {
    std::vector<std::pair<std::string, std::string>> fields;  // value already JSON-encoded

    void add(const std::string& key, double v);
    void add(const std::string& key, long long v);
    void add(const std::string& key, bool v);
    void add(const std::string& key, const std::string& v);
    std::string text() const;
    std::string json() const;
};

struct CheckOutcome {
    CriteriaReport report;
    int exit_code = 1;
};

CheckOutcome run_check(const RunConfig& cfg, std::optional<double> tmax = std::nullopt);

struct SimulateOutcome {
    Trajectory x;
    Summary summary;
};

/// Direct integration of x, plus the z route reconstructed as p z for comparison.
SimulateOutcome run_simulate(const RunConfig& cfg, std::optional<double> T = std::nullopt,
                             std::optional<double> step = std::nullopt);

struct PicardOutcome {
    PicardResult result;
    GridFunction x;  // p z*
    Summary summary;
};

/// Picard iteration plus sup |p z* - x_direct| over the solution nodes.
PicardOutcome run_picard(const RunConfig& cfg, std::optional<double> T = std::nullopt,
                         std::optional<double> tol = std::nullopt, std::optional<double> step = std::nullopt,
                         std::optional<int> max_iter = std::nullopt);

struct StabilityOutcome {
    StabilityReport report;
    Summary summary;
};

/// Default ψ family at δ; when δ is not given, δ_uniform(ε) from the criteria.
StabilityOutcome run_stability(const RunConfig& cfg, std::optional<double> T = std::nullopt,
                               std::optional<double> delta = std::nullopt,
                               std::optional<double> epsilon = std::nullopt);

}  // namespace ndde
