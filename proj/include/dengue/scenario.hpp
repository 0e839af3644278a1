#ifndef DENGUE_SCENARIO_HPP
#define DENGUE_SCENARIO_HPP

#include "dengue/equilibrium.hpp"
#include "dengue/integrator.hpp"
#include "dengue/model.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dengue {

/// Day-period quantities as authored in scenario files. The model works
/// with their reciprocal rates; keeping the authored values makes
/// serialize/parse round trips exact.
struct PeriodInputs {
    double human_lifespan_days = 0.0;
    double viremic_period_days = 0.0;
    double mosquito_lifespan_days = 0.0;
    double extrinsic_incubation_days = 0.0;
    double intrinsic_incubation_days = 0.0;
};

/// A fully validated simulation setup: parameters, control level, initial
/// state and integration window.
struct Scenario {
    std::string name = "custom";
    ModelParameters params;
    ControlLevel control;
    SystemState initial;
    IntegrationConfig integration;
    PeriodInputs periods;
};

/// The built-in Cape Verde 2009 outbreak scenario: 480000 inhabitants,
/// outbreak seeded with 216 exposed and 434 infectious people, mosquito
/// stocks at carrying capacity, an 84-day window and no control.
Scenario cape_verde_2009();

using KeyValueOverride = std::pair<std::string, std::string>;

/// Parses the line-oriented `key = value` scenario format (`#` comments).
/// A first line `base = cape_verde_2009` fills unspecified keys from the
/// built-in scenario; without it every parameter key, t_final_days, a_m0 and
/// s_m0 must be present. Day-period keys are converted to rates here.
/// s_h0 defaults to n_h - e_h0 - i_h0 - r_h0 when omitted. `overrides`
/// (key, value-text) pairs are applied after file entries and base defaults,
/// before validation. Throws parse_error with a line number for syntax
/// problems and domain_error naming the key for validation failures.
Scenario parse_scenario(std::string_view text,
                        std::span<const KeyValueOverride> overrides = {});

/// Emits a scenario file that parses back to an identical Scenario.
std::string serialize_scenario(const Scenario& scenario);

/// Scientific notation with ten fractional digits and a compact exponent:
/// 480000 -> "4.8000000000e5", 0 -> "0.0000000000e0", 1e-3 -> "1.0000000000e-3".
std::string format_scientific(double value);

/// CSV with the exact header t,S_h,E_h,I_h,R_h,A_m,S_m,E_m,I_m, one row per
/// sample, '\n' line endings and locale-independent formatting.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

/// Reads the format produced by write_trajectory_csv (samples only; stepper
/// metadata is not part of the file format).
Trajectory read_trajectory_csv(std::istream& in);

/// Two-column (t, value) blocks per compartment, separated by blank lines,
/// for generic plotting tools.
void write_plot_data(const Trajectory& trajectory, std::ostream& out);

/// Human-readable key = value block (kind, c, M, R0 or `undefined`, residual,
/// verdict, state, eigenvalues) followed by a machine-readable CSV section.
void write_report(const EquilibriumReport& report, std::ostream& out);

/// Sweep table as CSV: c, M, R0, verdict, peak_I_h, final_I_m, note, with
/// `undefined` markers on rows lacking a mosquito population.
void write_report(const std::vector<SweepRow>& rows, std::ostream& out);

} // namespace dengue

#endif // DENGUE_SCENARIO_HPP
