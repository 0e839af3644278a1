#ifndef DENGUE_MODEL_HPP
#define DENGUE_MODEL_HPP

#include <array>
#include <cstddef>
#include <string>

namespace dengue {

/// Compartment values of the coupled human/mosquito system at one instant.
/// Humans follow an SEIR progression; the vector population has an aquatic
/// stage plus susceptible/exposed/infected adult females. All values are
/// real-valued counts of individuals.
struct SystemState {
    double S_h = 0.0; ///< susceptible humans
    double E_h = 0.0; ///< exposed humans (infected, not yet infectious)
    double I_h = 0.0; ///< infectious humans
    double R_h = 0.0; ///< resistant (recovered) humans
    double A_m = 0.0; ///< aquatic-phase mosquitoes (eggs, larvae, pupae)
    double S_m = 0.0; ///< susceptible adult female mosquitoes
    double E_m = 0.0; ///< exposed adult female mosquitoes
    double I_m = 0.0; ///< infectious adult female mosquitoes

    static constexpr std::size_t size = 8;

    std::array<double, size> as_array() const
    {
        return {S_h, E_h, I_h, R_h, A_m, S_m, E_m, I_m};
    }
    static SystemState from_array(const std::array<double, size>& v)
    {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
    }

    double human_total() const { return S_h + E_h + I_h + R_h; }
    double adult_mosquito_total() const { return S_m + E_m + I_m; }
    bool all_finite() const;

    /// Component name in canonical order (index 0..7).
    static const char* component_name(std::size_t i);
};

/// Epidemiological and entomological constants. All time-like quantities are
/// stored as rates (1/day); period-form inputs (lifespans, incubation times)
/// are converted by the scenario layer, never here.
struct ModelParameters {
    double N_h = 0.0;     ///< total human population (constant)
    double B = 0.0;       ///< average daily bites per mosquito (1/day)
    double beta_mh = 0.0; ///< transmission probability mosquito -> human, per bite
    double beta_hm = 0.0; ///< transmission probability human -> mosquito, per bite
    double mu_h = 0.0;    ///< human mortality rate (1 / lifespan)
    double eta_h = 0.0;   ///< human recovery rate (1 / viremic period)
    double mu_m = 0.0;    ///< adult mosquito mortality rate (1 / lifespan)
    double mu_b = 0.0;    ///< eggs laid per female per day
    double mu_A = 0.0;    ///< aquatic-phase mortality rate
    double eta_A = 0.0;   ///< maturation rate, aquatic -> adult
    double eta_m = 0.0;   ///< mosquito incubation rate (1 / extrinsic period)
    double nu_h = 0.0;    ///< human incubation rate (1 / intrinsic period)
    double m = 0.0;       ///< female mosquitoes per human
    double k = 0.0;       ///< larvae per human
    double K = 0.0;       ///< larval carrying capacity; must equal k * N_h

    /// Throws domain_error naming the offending field if any bound fails.
    void validate() const;
};

/// Constant adulticide application rate (1/day). Acts on the three adult
/// mosquito compartments only; the aquatic stage is unaffected.
struct ControlLevel {
    double c = 0.0;

    void validate() const;
};

/// Time-derivative of each compartment (counts/day), same order as
/// SystemState. The four human entries sum to mu_h * (N_h - human total),
/// which is zero whenever the human compartments sum to N_h.
struct DerivativeVector {
    double S_h = 0.0;
    double E_h = 0.0;
    double I_h = 0.0;
    double R_h = 0.0;
    double A_m = 0.0;
    double S_m = 0.0;
    double E_m = 0.0;
    double I_m = 0.0;

    std::array<double, SystemState::size> as_array() const
    {
        return {S_h, E_h, I_h, R_h, A_m, S_m, E_m, I_m};
    }

    double human_sum() const { return S_h + E_h + I_h + R_h; }
};

/// Right-hand side of the transmission model at `state`.
///
/// Humans:   S -> E at B*beta_mh*I_m/N_h, E -> I at nu_h, I -> R at eta_h,
///           uniform turnover mu_h against a constant birth inflow mu_h*N_h.
/// Vectors:  logistic egg deposition into the aquatic stage, maturation
///           eta_A, force of infection B*beta_hm*I_h/N_h on adults, and the
///           adulticide removal c on S_m, E_m, I_m only.
///
/// Throws domain_error if any state component is non-finite.
DerivativeVector evaluate_rhs(const SystemState& state, const ModelParameters& p,
                              const ControlLevel& control);

/// Mosquito-viability margin  eta_A*mu_b - (eta_A + mu_A)*(mu_m + c).
/// Positive iff a nontrivial mosquito population can persist under control
/// level c; at zero or below, only the mosquito-free equilibrium exists.
double mosquito_viability(const ModelParameters& p, const ControlLevel& control);

/// Control level at which the viability margin hits zero. Above this value
/// the mosquito population cannot sustain itself. May be negative when even
/// the uncontrolled population is unviable.
double viability_control_bound(const ModelParameters& p);

/// Basic reproduction number: secondary human cases caused by one infectious
/// human in a wholly susceptible population, through the mosquito pathway.
///
///   R0^2 = B^2 k beta_hm beta_mh eta_m nu_h M
///          / (mu_b (eta_h+mu_h) (c+mu_m)^2 (c+eta_m+mu_m) (mu_h+nu_h))
///
/// with M = mosquito_viability(p, c). Defined only for M > 0; otherwise a
/// domain_error is thrown (no mosquito population, hence no transmission).
double basic_reproduction_number(const ModelParameters& p, const ControlLevel& control);

/// Natural magnitude of component i: N_h for human compartments, k*N_h for
/// the aquatic stage, m*N_h for adult mosquitoes (floored at 1). Used to
/// scale undershoot tolerances and convergence thresholds.
double component_scale(std::size_t i, const ModelParameters& p);

/// Membership test for the biologically meaningful region: nonnegative
/// components with S_h+E_h+I_h <= N_h, A_m <= k*N_h, S_m+E_m+I_m <= m*N_h.
/// `slack` loosens every bound by slack * max(1, bound scale), so states
/// carrying harmless integration undershoot still qualify.
bool in_biological_region(const SystemState& state, const ModelParameters& p,
                          double slack = 0.0);

/// Largest tolerated undershoot below zero, as a fraction of component scale.
inline constexpr double undershoot_tolerance = 1e-9;

} // namespace dengue

#endif // DENGUE_MODEL_HPP
