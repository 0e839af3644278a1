#include "dengue/scenario.hpp"

#include "dengue/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

namespace dengue {

namespace {

constexpr const char* kTrajectoryHeader = "t,S_h,E_h,I_h,R_h,A_m,S_m,E_m,I_m";
constexpr const char* kBaseName = "cape_verde_2009";

/// Canonical key order; also the serialization order.
const std::vector<std::string>& known_keys()
{
    static const std::vector<std::string> keys = {
        "n_h",
        "b",
        "beta_mh",
        "beta_hm",
        "human_lifespan_days",
        "viremic_period_days",
        "mosquito_lifespan_days",
        "mu_b",
        "mu_a",
        "eta_a",
        "extrinsic_incubation_days",
        "intrinsic_incubation_days",
        "m",
        "k",
        "c",
        "t_final_days",
        "step",
        "rel_tol",
        "abs_tol",
        "sample_interval",
        "s_h0",
        "e_h0",
        "i_h0",
        "r_h0",
        "a_m0",
        "s_m0",
        "e_m0",
        "i_m0",
    };
    return keys;
}

bool is_known_key(const std::string& key)
{
    const auto& keys = known_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

const std::map<std::string, double>& base_defaults()
{
    // Cape Verde 2009: an island outbreak in a fully susceptible population,
    // with aedes aegypti life-cycle figures taken from field literature.
    // s_h0 is intentionally absent; it derives from n_h minus the seeded
    // human compartments.
    static const std::map<std::string, double> defaults = {
        {"n_h", 480000.0},
        {"b", 1.0},
        {"beta_mh", 0.375},
        {"beta_hm", 0.375},
        {"human_lifespan_days", 71.0 * 365.0},
        {"viremic_period_days", 3.0},
        {"mosquito_lifespan_days", 11.0},
        {"mu_b", 6.0},
        {"mu_a", 0.25},
        {"eta_a", 0.08},
        {"extrinsic_incubation_days", 11.0},
        {"intrinsic_incubation_days", 4.0},
        {"m", 6.0},
        {"k", 3.0},
        {"c", 0.0},
        {"t_final_days", 84.0},
        {"step", 0.05},
        {"rel_tol", 1e-8},
        {"abs_tol", 1e-8},
        {"sample_interval", 0.5},
        {"e_h0", 216.0},
        {"i_h0", 434.0},
        {"r_h0", 0.0},
        {"a_m0", 1440000.0},
        {"s_m0", 2880000.0},
        {"e_m0", 0.0},
        {"i_m0", 0.0},
    };
    return defaults;
}

std::string_view trim(std::string_view s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_number(std::string_view text, const std::string& key, int line)
{
    const std::string token(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        std::ostringstream msg;
        msg << "value '" << token << "' for key '" << key << "' is not a number";
        if (line > 0) {
            throw parse_error(msg.str(), line);
        }
        throw domain_error(msg.str());
    }
    return value;
}

struct RawScenario {
    std::map<std::string, double> values;
    bool has_base = false;
};

RawScenario tokenize(std::string_view text)
{
    RawScenario raw;
    int line_no = 0;
    bool seen_entry = false;
    std::string_view rest = text;
    while (!rest.empty() || line_no == 0) {
        const auto nl = rest.find('\n');
        std::string_view line = nl == std::string_view::npos ? rest : rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++line_no;

        const auto hash = line.find('#');
        if (hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            if (nl == std::string_view::npos) {
                break;
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw parse_error("expected 'key = value'", line_no);
        }
        const std::string key{trim(line.substr(0, eq))};
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw parse_error("expected 'key = value'", line_no);
        }

        if (key == "base") {
            if (seen_entry) {
                throw parse_error("the base directive must be the first entry", line_no);
            }
            if (value != kBaseName) {
                throw parse_error("unknown base '" + std::string(value) + "'; only '" +
                                      kBaseName + "' is available",
                                  line_no);
            }
            raw.has_base = true;
            seen_entry = true;
            continue;
        }
        if (!is_known_key(key)) {
            throw parse_error("unknown key '" + key + "'", line_no);
        }
        if (raw.values.count(key) != 0) {
            throw parse_error("duplicate key '" + key + "'", line_no);
        }
        raw.values[key] = parse_number(value, key, line_no);
        seen_entry = true;

        if (nl == std::string_view::npos) {
            break;
        }
    }
    return raw;
}

double get_or(const std::map<std::string, double>& values, const std::string& key,
              double fallback)
{
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

void require_key_positive(const std::map<std::string, double>& values, const std::string& key)
{
    const double v = values.at(key);
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "key '" << key << "' must be finite and > 0, got " << v;
        throw domain_error(msg.str());
    }
}

Scenario materialize(const RawScenario& raw)
{
    std::map<std::string, double> values;
    if (raw.has_base) {
        values = base_defaults();
    }
    for (const auto& [key, value] : raw.values) {
        values[key] = value;
    }

    static const std::vector<std::string> required = {
        "n_h", "b", "beta_mh", "beta_hm", "human_lifespan_days", "viremic_period_days",
        "mosquito_lifespan_days", "mu_b", "mu_a", "eta_a", "extrinsic_incubation_days",
        "intrinsic_incubation_days", "m", "k", "t_final_days", "a_m0", "s_m0",
    };
    std::string missing;
    for (const auto& key : required) {
        if (values.count(key) == 0) {
            missing += missing.empty() ? key : ", " + key;
        }
    }
    if (!missing.empty()) {
        throw domain_error("missing required key(s): " + missing);
    }

    for (const auto* key : {"n_h", "b", "human_lifespan_days", "viremic_period_days",
                            "mosquito_lifespan_days", "mu_b", "mu_a", "eta_a",
                            "extrinsic_incubation_days", "intrinsic_incubation_days", "m", "k"}) {
        require_key_positive(values, key);
    }
    for (const auto* key : {"beta_mh", "beta_hm"}) {
        const double v = values.at(key);
        if (!(v >= 0.0 && v <= 1.0)) {
            std::ostringstream msg;
            msg << "key '" << key << "' is a probability and must lie in [0, 1], got " << v;
            throw domain_error(msg.str());
        }
    }

    Scenario scenario;
    scenario.name = raw.has_base ? kBaseName : "custom";

    scenario.periods.human_lifespan_days = values.at("human_lifespan_days");
    scenario.periods.viremic_period_days = values.at("viremic_period_days");
    scenario.periods.mosquito_lifespan_days = values.at("mosquito_lifespan_days");
    scenario.periods.extrinsic_incubation_days = values.at("extrinsic_incubation_days");
    scenario.periods.intrinsic_incubation_days = values.at("intrinsic_incubation_days");

    ModelParameters& p = scenario.params;
    p.N_h = values.at("n_h");
    p.B = values.at("b");
    p.beta_mh = values.at("beta_mh");
    p.beta_hm = values.at("beta_hm");
    p.mu_h = 1.0 / scenario.periods.human_lifespan_days;
    p.eta_h = 1.0 / scenario.periods.viremic_period_days;
    p.mu_m = 1.0 / scenario.periods.mosquito_lifespan_days;
    p.mu_b = values.at("mu_b");
    p.mu_A = values.at("mu_a");
    p.eta_A = values.at("eta_a");
    p.eta_m = 1.0 / scenario.periods.extrinsic_incubation_days;
    p.nu_h = 1.0 / scenario.periods.intrinsic_incubation_days;
    p.m = values.at("m");
    p.k = values.at("k");
    p.K = p.k * p.N_h;
    p.validate();

    scenario.control.c = get_or(values, "c", 0.0);
    if (!(scenario.control.c >= 0.0) || !std::isfinite(scenario.control.c)) {
        throw domain_error("key 'c' must be finite and >= 0");
    }

    IntegrationConfig& cfg = scenario.integration;
    cfg.t0 = 0.0;
    cfg.t_final = values.at("t_final_days");
    cfg.step = get_or(values, "step", 0.05);
    cfg.rel_tol = get_or(values, "rel_tol", 1e-8);
    cfg.abs_tol = get_or(values, "abs_tol", 1e-8);
    cfg.sample_interval = get_or(values, "sample_interval", 0.5);
    cfg.method = StepperMethod::adaptive_45;
    cfg.validate();

    SystemState& init = scenario.initial;
    init.E_h = get_or(values, "e_h0", 0.0);
    init.I_h = get_or(values, "i_h0", 0.0);
    init.R_h = get_or(values, "r_h0", 0.0);
    init.S_h = values.count("s_h0") != 0
                   ? values.at("s_h0")
                   : p.N_h - init.E_h - init.I_h - init.R_h;
    init.A_m = values.at("a_m0");
    init.S_m = values.at("s_m0");
    init.E_m = get_or(values, "e_m0", 0.0);
    init.I_m = get_or(values, "i_m0", 0.0);

    for (std::size_t i = 0; i < SystemState::size; ++i) {
        const double v = init.as_array()[i];
        if (!std::isfinite(v) || v < 0.0) {
            std::ostringstream msg;
            msg << "initial compartment " << SystemState::component_name(i)
                << " must be finite and >= 0, got " << v;
            throw domain_error(msg.str());
        }
    }
    if (!in_biological_region(init, p, 1e-12)) {
        throw domain_error(
            "initial state violates the biological region: require s_h0+e_h0+i_h0 <= n_h, "
            "a_m0 <= k*n_h and s_m0+e_m0+i_m0 <= m*n_h");
    }
    return scenario;
}

std::string format_full(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void append_key(std::string& out, const char* key, double value)
{
    out += key;
    out += " = ";
    out += format_full(value);
    out += '\n';
}

std::string csv_safe(std::string text)
{
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

std::string format_optional(const std::optional<double>& value)
{
    return value ? format_scientific(*value) : "undefined";
}

std::string format_eigenvalue(const std::complex<double>& ev)
{
    const double im = ev.imag();
    return format_scientific(ev.real()) + (std::signbit(im) ? " - " : " + ") +
           format_scientific(std::abs(im)) + "i";
}

} // namespace

Scenario cape_verde_2009()
{
    return parse_scenario("base = cape_verde_2009\n");
}

Scenario parse_scenario(std::string_view text, std::span<const KeyValueOverride> overrides)
{
    RawScenario raw = tokenize(text);
    for (const auto& [key, value] : overrides) {
        if (key == "base") {
            throw domain_error("'base' cannot be overridden; put the directive in the file");
        }
        if (!is_known_key(key)) {
            throw domain_error("unknown override key '" + key + "'");
        }
        raw.values[key] = parse_number(value, key, 0);
    }
    return materialize(raw);
}

std::string serialize_scenario(const Scenario& scenario)
{
    std::string out = "# dengue scenario: " + scenario.name + "\n";
    if (scenario.name == kBaseName) {
        out += std::string("base = ") + kBaseName + "\n";
    }
    const ModelParameters& p = scenario.params;
    append_key(out, "n_h", p.N_h);
    append_key(out, "b", p.B);
    append_key(out, "beta_mh", p.beta_mh);
    append_key(out, "beta_hm", p.beta_hm);
    append_key(out, "human_lifespan_days", scenario.periods.human_lifespan_days);
    append_key(out, "viremic_period_days", scenario.periods.viremic_period_days);
    append_key(out, "mosquito_lifespan_days", scenario.periods.mosquito_lifespan_days);
    append_key(out, "mu_b", p.mu_b);
    append_key(out, "mu_a", p.mu_A);
    append_key(out, "eta_a", p.eta_A);
    append_key(out, "extrinsic_incubation_days", scenario.periods.extrinsic_incubation_days);
    append_key(out, "intrinsic_incubation_days", scenario.periods.intrinsic_incubation_days);
    append_key(out, "m", p.m);
    append_key(out, "k", p.k);
    append_key(out, "c", scenario.control.c);
    append_key(out, "t_final_days", scenario.integration.t_final);
    append_key(out, "step", scenario.integration.step);
    append_key(out, "rel_tol", scenario.integration.rel_tol);
    append_key(out, "abs_tol", scenario.integration.abs_tol);
    append_key(out, "sample_interval", scenario.integration.sample_interval);
    append_key(out, "s_h0", scenario.initial.S_h);
    append_key(out, "e_h0", scenario.initial.E_h);
    append_key(out, "i_h0", scenario.initial.I_h);
    append_key(out, "r_h0", scenario.initial.R_h);
    append_key(out, "a_m0", scenario.initial.A_m);
    append_key(out, "s_m0", scenario.initial.S_m);
    append_key(out, "e_m0", scenario.initial.E_m);
    append_key(out, "i_m0", scenario.initial.I_m);
    return out;
}

std::string format_scientific(double value)
{
    if (value == 0.0) {
        return "0.0000000000e0";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10e", value);
    std::string s = buf;
    const auto epos = s.find('e');
    if (epos == std::string::npos) {
        return s; // nan/inf
    }
    const std::string mantissa = s.substr(0, epos);
    std::string exponent = s.substr(epos + 1);
    const bool negative = !exponent.empty() && exponent[0] == '-';
    std::size_t i = (!exponent.empty() && (exponent[0] == '+' || exponent[0] == '-')) ? 1 : 0;
    while (i + 1 < exponent.size() && exponent[i] == '0') {
        ++i;
    }
    return mantissa + "e" + (negative ? "-" : "") + exponent.substr(i);
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out)
{
    if (trajectory.samples.empty()) {
        throw domain_error("cannot write an empty trajectory");
    }
    out << kTrajectoryHeader << '\n';
    for (const auto& sample : trajectory.samples) {
        out << format_scientific(sample.t);
        for (double v : sample.state.as_array()) {
            out << ',' << format_scientific(v);
        }
        out << '\n';
    }
    if (!out) {
        throw numeric_error("trajectory sink write failure");
    }
}

Trajectory read_trajectory_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || trim(line) != kTrajectoryHeader) {
        throw domain_error("trajectory CSV header mismatch");
    }
    Trajectory traj;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) {
            continue;
        }
        std::array<double, 9> fields{};
        std::string_view rest = row;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto comma = rest.find(',');
            const bool last = i + 1 == fields.size();
            if (last != (comma == std::string_view::npos)) {
                throw parse_error("expected 9 comma-separated fields", line_no);
            }
            const std::string_view cell = last ? rest : rest.substr(0, comma);
            fields[i] = parse_number(trim(cell), "t", line_no);
            if (!last) {
                rest = rest.substr(comma + 1);
            }
        }
        TrajectorySample sample;
        sample.t = fields[0];
        std::array<double, SystemState::size> comps{};
        std::copy(fields.begin() + 1, fields.end(), comps.begin());
        sample.state = SystemState::from_array(comps);
        traj.samples.push_back(sample);
    }
    if (traj.samples.empty()) {
        throw domain_error("trajectory CSV contains no samples");
    }
    return traj;
}

void write_plot_data(const Trajectory& trajectory, std::ostream& out)
{
    if (trajectory.samples.empty()) {
        throw domain_error("cannot write an empty trajectory");
    }
    for (std::size_t i = 0; i < SystemState::size; ++i) {
        if (i != 0) {
            out << "\n\n";
        }
        out << "# series " << SystemState::component_name(i) << '\n';
        for (const auto& sample : trajectory.samples) {
            out << format_scientific(sample.t) << ' '
                << format_scientific(sample.state.as_array()[i]) << '\n';
        }
    }
    if (!out) {
        throw numeric_error("plot-data sink write failure");
    }
}

void write_report(const EquilibriumReport& report, std::ostream& out)
{
    double max_real = report.eigenvalues[0].real();
    for (const auto& ev : report.eigenvalues) {
        max_real = std::max(max_real, ev.real());
    }

    out << "# equilibrium report\n";
    out << "kind = " << to_string(report.kind) << '\n';
    out << "c = " << format_scientific(report.control) << '\n';
    out << "M = " << format_scientific(report.viability) << '\n';
    out << "R0 = " << format_optional(report.r0) << '\n';
    out << "residual = " << format_scientific(report.residual) << '\n';
    out << "verdict = " << to_string(report.stability) << '\n';
    const auto v = report.state.as_array();
    for (std::size_t i = 0; i < v.size(); ++i) {
        out << SystemState::component_name(i) << " = " << format_scientific(v[i]) << '\n';
    }
    out << "eigenvalues:\n";
    for (const auto& ev : report.eigenvalues) {
        out << "  " << format_eigenvalue(ev) << '\n';
    }
    out << "# csv\n";
    out << "kind,c,M,R0,residual,verdict,S_h,E_h,I_h,R_h,A_m,S_m,E_m,I_m,max_re_eigenvalue\n";
    out << to_string(report.kind) << ',' << format_scientific(report.control) << ','
        << format_scientific(report.viability) << ',' << format_optional(report.r0) << ','
        << format_scientific(report.residual) << ',' << to_string(report.stability);
    for (double x : v) {
        out << ',' << format_scientific(x);
    }
    out << ',' << format_scientific(max_real) << '\n';
    if (!out) {
        throw numeric_error("report sink write failure");
    }
}

void write_report(const std::vector<SweepRow>& rows, std::ostream& out)
{
    out << "# control sweep, " << rows.size() << " row(s)\n";
    out << "c,M,R0,verdict,peak_I_h,final_I_m,note\n";
    for (const auto& row : rows) {
        out << format_scientific(row.control) << ',' << format_scientific(row.viability) << ','
            << format_optional(row.r0) << ','
            << (row.brdfe_verdict ? to_string(*row.brdfe_verdict) : "undefined") << ','
            << format_optional(row.peak_I_h) << ',' << format_optional(row.final_I_m) << ','
            << csv_safe(row.note) << '\n';
    }
    if (!out) {
        throw numeric_error("sweep sink write failure");
    }
}

} // namespace dengue
