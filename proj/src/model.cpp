#include "dengue/model.hpp"

#include "dengue/errors.hpp"

#include <cmath>
#include <sstream>

namespace dengue {

namespace {

const char* const kComponentNames[SystemState::size] = {"S_h", "E_h", "I_h", "R_h",
                                                        "A_m", "S_m", "E_m", "I_m"};

void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "parameter " << name << " must be finite and > 0, got " << v;
        throw domain_error(msg.str());
    }
}

void require_probability(double v, const char* name)
{
    if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream msg;
        msg << "parameter " << name << " must lie in [0, 1], got " << v;
        throw domain_error(msg.str());
    }
}

} // namespace

bool SystemState::all_finite() const
{
    for (double v : as_array()) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

const char* SystemState::component_name(std::size_t i)
{
    return kComponentNames[i];
}

void ModelParameters::validate() const
{
    require_positive(N_h, "N_h");
    require_positive(B, "B");
    require_probability(beta_mh, "beta_mh");
    require_probability(beta_hm, "beta_hm");
    require_positive(mu_h, "mu_h");
    require_positive(eta_h, "eta_h");
    require_positive(mu_m, "mu_m");
    require_positive(mu_b, "mu_b");
    require_positive(mu_A, "mu_A");
    require_positive(eta_A, "eta_A");
    require_positive(eta_m, "eta_m");
    require_positive(nu_h, "nu_h");
    require_positive(m, "m");
    require_positive(k, "k");
    if (K != k * N_h) {
        std::ostringstream msg;
        msg << "parameter K must equal k*N_h = " << k * N_h << ", got " << K;
        throw domain_error(msg.str());
    }
}

void ControlLevel::validate() const
{
    if (!(c >= 0.0) || !std::isfinite(c)) {
        std::ostringstream msg;
        msg << "control level c must be finite and >= 0, got " << c;
        throw domain_error(msg.str());
    }
}

DerivativeVector evaluate_rhs(const SystemState& state, const ModelParameters& p,
                              const ControlLevel& control)
{
    if (!state.all_finite()) {
        for (std::size_t i = 0; i < SystemState::size; ++i) {
            if (!std::isfinite(state.as_array()[i])) {
                throw domain_error(std::string("non-finite state component ") +
                                   SystemState::component_name(i));
            }
        }
    }

    const double c = control.c;
    const double foi_h = p.B * p.beta_mh * state.I_m / p.N_h; // force of infection on humans
    const double foi_m = p.B * p.beta_hm * state.I_h / p.N_h; // force of infection on mosquitoes
    const double adults = state.adult_mosquito_total();

    DerivativeVector d;
    d.S_h = p.mu_h * p.N_h - (foi_h + p.mu_h) * state.S_h;
    d.E_h = foi_h * state.S_h - (p.nu_h + p.mu_h) * state.E_h;
    d.I_h = p.nu_h * state.E_h - (p.eta_h + p.mu_h) * state.I_h;
    d.R_h = p.eta_h * state.I_h - p.mu_h * state.R_h;
    // the adulticide does not reach the aquatic stage, so no c term here
    d.A_m = p.mu_b * (1.0 - state.A_m / p.K) * adults - (p.eta_A + p.mu_A) * state.A_m;
    d.S_m = -(foi_m + p.mu_m) * state.S_m + p.eta_A * state.A_m - c * state.S_m;
    d.E_m = foi_m * state.S_m - (p.mu_m + p.eta_m) * state.E_m - c * state.E_m;
    d.I_m = p.eta_m * state.E_m - p.mu_m * state.I_m - c * state.I_m;
    return d;
}

double mosquito_viability(const ModelParameters& p, const ControlLevel& control)
{
    return p.eta_A * p.mu_b - (p.eta_A + p.mu_A) * (p.mu_m + control.c);
}

double viability_control_bound(const ModelParameters& p)
{
    return (p.eta_A * p.mu_b - (p.eta_A + p.mu_A) * p.mu_m) / (p.eta_A + p.mu_A);
}

double basic_reproduction_number(const ModelParameters& p, const ControlLevel& control)
{
    const double viability = mosquito_viability(p, control);
    if (!(viability > 0.0)) {
        std::ostringstream msg;
        msg << "R0 undefined: mosquito viability margin is " << viability
            << " (<= 0), only the mosquito-free equilibrium exists";
        throw domain_error(msg.str());
    }
    const double c = control.c;
    const double num = p.B * p.B * p.k * p.beta_hm * p.beta_mh * p.eta_m * p.nu_h * viability;
    const double den = p.mu_b * (p.eta_h + p.mu_h) * (c + p.mu_m) * (c + p.mu_m) *
                       (c + p.eta_m + p.mu_m) * (p.mu_h + p.nu_h);
    return std::sqrt(num / den);
}

double component_scale(std::size_t i, const ModelParameters& p)
{
    double scale = p.N_h;
    if (i == 4) {
        scale = p.k * p.N_h;
    } else if (i > 4) {
        scale = p.m * p.N_h;
    }
    return std::max(1.0, scale);
}

bool in_biological_region(const SystemState& state, const ModelParameters& p, double slack)
{
    if (!state.all_finite()) {
        return false;
    }
    const auto v = state.as_array();
    for (std::size_t i = 0; i < SystemState::size; ++i) {
        if (v[i] < -slack * component_scale(i, p)) {
            return false;
        }
    }
    const double human_slack = slack * std::max(1.0, p.N_h);
    if (state.S_h + state.E_h + state.I_h > p.N_h + human_slack) {
        return false;
    }
    if (state.A_m > p.k * p.N_h + slack * std::max(1.0, p.k * p.N_h)) {
        return false;
    }
    if (state.adult_mosquito_total() > p.m * p.N_h + slack * std::max(1.0, p.m * p.N_h)) {
        return false;
    }
    return true;
}

} // namespace dengue
