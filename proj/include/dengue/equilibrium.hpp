#ifndef DENGUE_EQUILIBRIUM_HPP
#define DENGUE_EQUILIBRIUM_HPP

#include "dengue/integrator.hpp"
#include "dengue/model.hpp"

#include <Eigen/Core>

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dengue {

enum class EquilibriumKind {
    trivial, ///< humans alone, no mosquitoes, no disease
    brdfe,   ///< biologically realistic disease-free: mosquitoes persist
    endemic, ///< interior steady state with ongoing transmission
};

enum class StabilityVerdict {
    asymptotically_stable,
    unstable,
    marginal,
};

const char* to_string(EquilibriumKind kind);
const char* to_string(StabilityVerdict verdict);

/// Real-part band around zero inside which an eigenvalue counts as marginal.
/// Far below the smallest model rate, so slow-but-genuine modes are not
/// misread as marginal.
inline constexpr double stability_band = 1e-10;

using JacobianMatrix = Eigen::Matrix<double, 8, 8>;

struct EquilibriumReport {
    EquilibriumKind kind = EquilibriumKind::trivial;
    SystemState state;
    double control = 0.0;  ///< adulticide level the report was computed at
    double residual = 0.0; ///< max-norm of the RHS at `state` (counts/day)
    double viability = 0.0; ///< mosquito-viability margin at `control`
    std::array<std::complex<double>, 8> eigenvalues{}; ///< descending real part
    StabilityVerdict stability = StabilityVerdict::marginal;
    std::optional<double> r0; ///< empty when the viability margin is <= 0
};

/// The mosquito-free steady state (all compartments zero except S_h = N_h).
/// Exists for every parameter set; its RHS residual is identically zero.
EquilibriumReport trivial_equilibrium(const ModelParameters& p,
                                      const ControlLevel& control = {});

/// Disease-free steady state with a persisting mosquito population:
///   A_m* = k N_h M / (eta_A mu_b),   S_m* = k N_h M / (mu_b (mu_m + c)),
/// everything infected at zero and S_h = N_h. The (mu_m + c) factor in S_m*
/// is forced by the adult-susceptible balance eta_A A_m* = (mu_m + c) S_m*;
/// at c = 0 it reduces to k N_h M / (mu_b mu_m). Requires a positive
/// viability margin, else domain_error.
EquilibriumReport brdfe_equilibrium(const ModelParameters& p, const ControlLevel& control);

/// Interior steady state with all infected compartments strictly positive.
/// With an explicit `guess`, runs damped Newton from it and reports
/// collapsed_to_dfe_error if the iteration lands on a disease-free root.
/// Without a guess, first locates the interior root of the one-dimensional
/// steady-state reduction in I_m by bracketing, then polishes with Newton;
/// throws numeric_error when no interior root exists (R0 <= 1 regime).
EquilibriumReport endemic_equilibrium(const ModelParameters& p, const ControlLevel& control,
                                      const std::optional<SystemState>& guess = {});

/// Analytic partial derivatives of the RHS with respect to the state, in
/// canonical component order.
JacobianMatrix jacobian(const SystemState& state, const ModelParameters& p,
                        const ControlLevel& control);

/// Eigenvalues ordered by descending real part (ties by descending imaginary
/// part). Verifies the spectrum against the matrix trace (relative 1e-8)
/// and determinant (relative 1e-6); failure raises numeric_error.
std::array<std::complex<double>, 8> eigenvalues(const JacobianMatrix& matrix);

/// Verdict from the eigenvalue real parts using the stability_band. For a
/// BRDFE report with R0 available and outside the band |R0 - 1| < 1e-3, the
/// verdict is cross-checked against the sign of R0 - 1; disagreement raises
/// consistency_error.
StabilityVerdict classify_stability(const EquilibriumReport& report);

/// Smallest constant control keeping R0 below one, found by bisection on
/// [0, viability bound) to half-width `tol`. Returns 0 when the uncontrolled
/// R0 is already <= 1. The returned c* satisfies r0(c* + tol) < 1. An
/// explicit `upper_bound` replaces the default bracket top (must lie inside
/// (0, viability bound]). Throws domain_error when no mosquito population
/// exists even uncontrolled.
double threshold_control(const ModelParameters& p, double tol,
                         std::optional<double> upper_bound = {});

struct SweepRow {
    double control = 0.0;
    double viability = 0.0;
    std::optional<double> r0;                      ///< empty when viability <= 0
    std::optional<StabilityVerdict> brdfe_verdict; ///< empty when viability <= 0
    std::optional<double> peak_I_h;                ///< over the simulated window
    std::optional<double> final_I_m;               ///< at the end of the window
    std::string note; ///< per-row failure text; empty on clean rows
};

/// One row per control level (grid must be ascending and nonempty):
/// viability margin, R0 and BRDFE verdict where defined, and peak
/// infectious humans / final infectious mosquitoes from simulating the
/// scenario window under that control level. Row-level failures are
/// recorded in `note` instead of aborting the sweep.
std::vector<SweepRow> sweep(const ModelParameters& p, std::span<const double> c_grid,
                            const SystemState& initial, const IntegrationConfig& cfg);

} // namespace dengue

#endif // DENGUE_EQUILIBRIUM_HPP
