// ndde: criteria checks, direct simulation and Picard solves from a config file.
//
//   ndde check <cfg> [--tmax N] [--json PATH]
//   ndde simulate <cfg> [--T N] [--step H] [--csv PATH] [--json PATH]
//   ndde picard <cfg> [--T N] [--tol E] [--step H] [--max-iter N] [--csv PATH] [--json PATH]
//   ndde stability <cfg> [--T N] [--delta D] [--epsilon E] [--json PATH]
//   ndde example section4 [--out PATH]
//
// Exit status: 0 satisfied, 2 violated, 3 inconclusive, 1 usage or runtime error.

#include "ndde/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

void write_file(const std::string& path, const std::string& body) {
    if (path == "-") {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

template <class Fn>
void write_with(const std::string& path, Fn&& fn) {
    if (path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    fn(out);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundedness and stability checks for neutral delay equations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ndde 1.0.0");

    std::string cfg_path, json_path, csv_path, out_path;
    std::optional<double> tmax, T, step, tol, delta, epsilon;
    std::optional<int> max_iter;

    auto* check = app.add_subcommand("check", "evaluate the criterion terms and verdicts");
    check->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
    check->add_option("--tmax", tmax, "end of the certification interval");
    check->add_option("--json", json_path, "write the JSON report here ('-' for stdout)");

    auto* simulate = app.add_subcommand("simulate", "integrate the equation directly");
    simulate->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--T", T, "end time");
    simulate->add_option("--step", step, "RK4 step");
    simulate->add_option("--csv", csv_path, "trajectory CSV");
    simulate->add_option("--json", json_path, "summary JSON");

    auto* picard = app.add_subcommand("picard", "fixed point of the split operator by Picard iteration");
    picard->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
    picard->add_option("--T", T, "end time");
    picard->add_option("--tol", tol, "stop when the sup-norm step is below this");
    picard->add_option("--step", step, "mesh step");
    picard->add_option("--max-iter", max_iter, "iteration cap");
    picard->add_option("--csv", csv_path, "x = p z* on the mesh, as CSV");
    picard->add_option("--json", json_path, "summary JSON");

    auto* stability = app.add_subcommand("stability", "integrate the default history family at delta");
    stability->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
    stability->add_option("--T", T, "end time");
    stability->add_option("--delta", delta, "history size (default: uniform delta from the criteria)");
    stability->add_option("--epsilon", epsilon, "bound to stay under");
    stability->add_option("--json", json_path, "summary JSON");

    auto* example = app.add_subcommand("example", "print a shipped preset");
    std::string example_name;
    example->add_option("name", example_name, "preset name")->required()->check(CLI::IsMember({"section4"}));
    example->add_option("--out", out_path, "write here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        ndde::configure_threads();

        if (*example) {
            write_file(out_path.empty() ? "-" : out_path, ndde::worked_example_config_text());
            return 0;
        }

        const ndde::RunConfig cfg = ndde::load_config(cfg_path);

        if (*check) {
            const ndde::CheckOutcome r = ndde::run_check(cfg, tmax);
            print_warnings(r.report.warnings);
            if (json_path != "-") std::cout << ndde::report_text(r.report);
            if (!json_path.empty()) write_file(json_path, ndde::report_json(r.report));
            return r.exit_code;
        }
        if (*simulate) {
            const ndde::SimulateOutcome r = ndde::run_simulate(cfg, T, step);
            print_warnings(cfg.warnings);
            if (!csv_path.empty())
                write_with(csv_path, [&](std::ostream& os) { r.x.write_csv(os, {"config " + cfg_path}); });
            if (json_path != "-") std::cout << r.summary.text();
            if (!json_path.empty()) write_file(json_path, r.summary.json());
            return 0;
        }
        if (*picard) {
            const ndde::PicardOutcome r = ndde::run_picard(cfg, T, tol, step, max_iter);
            print_warnings(cfg.warnings);
            if (!csv_path.empty()) write_with(csv_path, [&](std::ostream& os) { r.x.write_csv(os, "x"); });
            if (json_path != "-") std::cout << r.summary.text();
            if (!json_path.empty()) write_file(json_path, r.summary.json());
            switch (r.result.status) {
                case ndde::PicardStatus::converged: return 0;
                case ndde::PicardStatus::failed: return 1;
                default: return 3;
            }
        }
        if (*stability) {
            const ndde::StabilityOutcome r = ndde::run_stability(cfg, T, delta, epsilon);
            print_warnings(cfg.warnings);
            if (json_path != "-") std::cout << r.summary.text();
            if (!json_path.empty()) write_file(json_path, r.summary.json());
            if (!r.report.bounded) return 2;
            return r.report.asymptotic ? 0 : 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
