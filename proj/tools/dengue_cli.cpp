// Command-line front end: wires scenario files to the simulation and
// analysis engine. Exit status 0 on success, 2 on validation/usage errors,
// 3 on numeric failures.

#include "dengue/equilibrium.hpp"
#include "dengue/errors.hpp"
#include "dengue/integrator.hpp"
#include "dengue/model.hpp"
#include "dengue/scenario.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct CommonOptions {
    std::string scenario_path;
    std::string output = "-";
    std::vector<std::string> set_pairs;
    bool no_control = false;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_output = true)
{
    cmd->add_option("scenario", opt.scenario_path, "scenario file (key = value lines)")
        ->required();
    if (with_output) {
        cmd->add_option("-o,--output", opt.output, "output path, or '-' for standard output");
    }
    cmd->add_option("--set", opt.set_pairs, "override a scenario key, e.g. --set c=0.084")
        ->type_name("KEY=VALUE");
    cmd->add_flag("--no-control", opt.no_control, "force the control level c to zero");
}

dengue::Scenario load_scenario(const CommonOptions& opt)
{
    std::ifstream in(opt.scenario_path);
    if (!in) {
        throw dengue::domain_error("cannot read scenario file '" + opt.scenario_path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();

    std::vector<dengue::KeyValueOverride> overrides;
    for (const auto& pair : opt.set_pairs) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw dengue::domain_error("--set expects KEY=VALUE, got '" + pair + "'");
        }
        overrides.emplace_back(pair.substr(0, eq), pair.substr(eq + 1));
    }
    if (opt.no_control) {
        overrides.emplace_back("c", "0");
    }
    return dengue::parse_scenario(text.str(), overrides);
}

/// Writes through `fn` to the requested sink; '-' streams to stdout.
template <typename Fn>
void with_sink(const std::string& output, Fn&& fn)
{
    if (output == "-") {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(output);
    if (!out) {
        throw dengue::domain_error("cannot open output file '" + output + "'");
    }
    fn(out);
    if (!out) {
        throw dengue::numeric_error("write failure on '" + output + "'");
    }
}

std::vector<double> parse_grid(const std::string& spec)
{
    std::vector<double> grid;
    if (spec.find(':') != std::string::npos) {
        double start = 0.0;
        double stop = 0.0;
        int count = 0;
        char c1 = 0;
        char c2 = 0;
        std::istringstream in(spec);
        if (!(in >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' ||
            !in.eof() || count < 1) {
            throw dengue::domain_error("--grid expects START:STOP:COUNT, got '" + spec + "'");
        }
        if (count == 1) {
            grid.push_back(start);
        } else {
            for (int i = 0; i < count; ++i) {
                grid.push_back(start + (stop - start) * static_cast<double>(i) /
                                           static_cast<double>(count - 1));
            }
        }
        return grid;
    }
    std::istringstream in(spec);
    std::string token;
    while (std::getline(in, token, ',')) {
        std::size_t pos = 0;
        grid.push_back(std::stod(token, &pos));
        if (pos != token.size()) {
            throw dengue::domain_error("--grid value '" + token + "' is not a number");
        }
    }
    if (grid.empty()) {
        throw dengue::domain_error("--grid produced an empty grid");
    }
    return grid;
}

int run_simulate(const CommonOptions& opt, bool plot_data)
{
    const dengue::Scenario scenario = load_scenario(opt);
    const dengue::Trajectory traj = dengue::integrate(scenario.initial, scenario.params,
                                                      scenario.control, scenario.integration);
    with_sink(opt.output, [&](std::ostream& out) {
        if (plot_data) {
            dengue::write_plot_data(traj, out);
        } else {
            dengue::write_trajectory_csv(traj, out);
        }
    });

    const auto peak = traj.peak_infectious_humans();
    std::ostream& summary = opt.output == "-" ? std::cerr : std::cout;
    summary << "peak I_h = " << dengue::format_scientific(peak.state.I_h)
            << " at t = " << dengue::format_scientific(peak.t)
            << " d; final I_m = " << dengue::format_scientific(traj.final_state().I_m) << "\n";
    return 0;
}

int run_r0(const CommonOptions& opt)
{
    const dengue::Scenario scenario = load_scenario(opt);
    const double r0 = dengue::basic_reproduction_number(scenario.params, scenario.control);
    std::cout << "R0 = " << dengue::format_scientific(r0) << "\n";
    return 0;
}

int run_equilibria(const CommonOptions& opt)
{
    const dengue::Scenario scenario = load_scenario(opt);
    with_sink(opt.output, [&](std::ostream& out) {
        dengue::write_report(dengue::trivial_equilibrium(scenario.params, scenario.control),
                             out);
        if (dengue::mosquito_viability(scenario.params, scenario.control) > 0.0) {
            out << "\n";
            dengue::write_report(dengue::brdfe_equilibrium(scenario.params, scenario.control),
                                 out);
            out << "\n";
            try {
                dengue::write_report(
                    dengue::endemic_equilibrium(scenario.params, scenario.control), out);
            } catch (const dengue::numeric_error& e) {
                out << "# endemic: " << e.what() << "\n";
            }
        } else {
            out << "# brdfe/endemic: no mosquito population persists at this control level\n";
        }
    });
    return 0;
}

int run_stability(const CommonOptions& opt)
{
    const dengue::Scenario scenario = load_scenario(opt);
    const bool viable = dengue::mosquito_viability(scenario.params, scenario.control) > 0.0;
    const dengue::EquilibriumReport report =
        viable ? dengue::brdfe_equilibrium(scenario.params, scenario.control)
               : dengue::trivial_equilibrium(scenario.params, scenario.control);
    with_sink(opt.output, [&](std::ostream& out) {
        out << "kind = " << dengue::to_string(report.kind) << "\n";
        out << "c = " << dengue::format_scientific(report.control) << "\n";
        out << "M = " << dengue::format_scientific(report.viability) << "\n";
        out << "R0 = " << (report.r0 ? dengue::format_scientific(*report.r0) : "undefined")
            << "\n";
        out << "verdict = " << dengue::to_string(report.stability) << "\n";
    });
    return 0;
}

int run_threshold(const CommonOptions& opt, double tol)
{
    const dengue::Scenario scenario = load_scenario(opt);
    const double c_star = dengue::threshold_control(scenario.params, tol);
    std::cout << "c* = " << dengue::format_scientific(c_star)
              << " (tolerance " << dengue::format_scientific(tol) << ")\n";
    return 0;
}

int run_sweep(const CommonOptions& opt, const std::string& grid_spec)
{
    const dengue::Scenario scenario = load_scenario(opt);
    const std::vector<double> grid = parse_grid(grid_spec);
    const auto rows =
        dengue::sweep(scenario.params, grid, scenario.initial, scenario.integration);
    with_sink(opt.output, [&](std::ostream& out) { dengue::write_report(rows, out); });
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"dengue transmission dynamics engine"};
    app.require_subcommand(1);

    CommonOptions sim_opt;
    bool plot_data = false;
    CLI::App* sim = app.add_subcommand("simulate", "integrate a scenario and emit the trajectory");
    add_common(sim, sim_opt);
    sim->add_flag("--plot-data", plot_data, "emit two-column per-series plot data instead of CSV");

    CommonOptions r0_opt;
    CLI::App* r0 = app.add_subcommand("r0", "print the basic reproduction number");
    add_common(r0, r0_opt, false);

    CommonOptions eq_opt;
    CLI::App* eq = app.add_subcommand("equilibria", "report all equilibria of the scenario");
    add_common(eq, eq_opt);

    CommonOptions st_opt;
    CLI::App* st = app.add_subcommand("stability", "stability verdict for the disease-free state");
    add_common(st, st_opt);

    CommonOptions th_opt;
    double tol = 1e-5;
    CLI::App* th = app.add_subcommand("threshold", "minimal constant control keeping R0 below 1");
    add_common(th, th_opt, false);
    th->add_option("--tol", tol, "bisection half-width tolerance (default 1e-5)");

    CommonOptions sw_opt;
    std::string grid_spec = "0:0.2:21";
    CLI::App* sw = app.add_subcommand("sweep", "tabulate M, R0, verdicts and outbreak size over c");
    add_common(sw, sw_opt);
    sw->add_option("--grid", grid_spec, "control grid: START:STOP:COUNT or v1,v2,...");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (sim->parsed()) {
            return run_simulate(sim_opt, plot_data);
        }
        if (r0->parsed()) {
            return run_r0(r0_opt);
        }
        if (eq->parsed()) {
            return run_equilibria(eq_opt);
        }
        if (st->parsed()) {
            return run_stability(st_opt);
        }
        if (th->parsed()) {
            return run_threshold(th_opt, tol);
        }
        if (sw->parsed()) {
            return run_sweep(sw_opt, grid_spec);
        }
    } catch (const dengue::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const dengue::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
