#include "dengue/equilibrium.hpp"

#include "dengue/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dengue {

namespace {

double state_scale(const SystemState& state)
{
    double s = 1.0;
    for (double v : state.as_array()) {
        s = std::max(s, std::abs(v));
    }
    return s;
}

double residual_max_norm(const SystemState& state, const ModelParameters& p,
                         const ControlLevel& control)
{
    double r = 0.0;
    for (double v : evaluate_rhs(state, p, control).as_array()) {
        r = std::max(r, std::abs(v));
    }
    return r;
}

constexpr double kResidualBound = 1e-9; // relative to max(1, ||state||_inf)

/// Fills residual, spectrum, R0 and verdict for a candidate equilibrium and
/// enforces the residual bound.
EquilibriumReport make_report(EquilibriumKind kind, const SystemState& state,
                              const ModelParameters& p, const ControlLevel& control)
{
    EquilibriumReport report;
    report.kind = kind;
    report.state = state;
    report.control = control.c;
    report.viability = mosquito_viability(p, control);
    report.residual = residual_max_norm(state, p, control);
    if (report.residual > kResidualBound * state_scale(state)) {
        std::ostringstream msg;
        msg << "reported " << to_string(kind) << " equilibrium fails the residual bound: "
            << report.residual << " > " << kResidualBound * state_scale(state);
        throw numeric_error(msg.str());
    }
    if (report.viability > 0.0) {
        report.r0 = basic_reproduction_number(p, control);
    }
    report.eigenvalues = eigenvalues(jacobian(state, p, control));
    report.stability = classify_stability(report);
    return report;
}

struct NewtonResult {
    SystemState root;
    int iterations = 0;
};

std::string format_state(const SystemState& state)
{
    std::ostringstream out;
    const auto v = state.as_array();
    for (std::size_t i = 0; i < v.size(); ++i) {
        out << (i == 0 ? "" : ", ") << SystemState::component_name(i) << " = " << v[i];
    }
    return out.str();
}

/// Damped Newton on the steady-state system evaluate_rhs = 0. The human
/// total is pinned through the recovered-compartment equation, so the full
/// eight-dimensional system is nondegenerate at interior roots.
NewtonResult newton_solve(const SystemState& guess, const ModelParameters& p,
                          const ControlLevel& control, int max_iterations = 200)
{
    using Vector8 = Eigen::Matrix<double, 8, 1>;

    SystemState y = guess;
    for (int it = 0; it < max_iterations; ++it) {
        const auto f = evaluate_rhs(y, p, control).as_array();
        double norm_f = 0.0;
        for (double v : f) {
            norm_f = std::max(norm_f, std::abs(v));
        }
        if (norm_f < 1e-10 * state_scale(y)) {
            return {y, it};
        }

        Vector8 rhs_vec;
        for (std::size_t i = 0; i < f.size(); ++i) {
            rhs_vec(static_cast<Eigen::Index>(i)) = -f[i];
        }
        const Vector8 step = jacobian(y, p, control).partialPivLu().solve(rhs_vec);
        if (!step.allFinite()) {
            throw numeric_error("Newton step is singular or non-finite; last iterate: " +
                                format_state(y));
        }

        double alpha = 1.0;
        bool improved = false;
        for (int halvings = 0; halvings < 40; ++halvings) {
            SystemState trial = y;
            auto tv = trial.as_array();
            for (std::size_t i = 0; i < tv.size(); ++i) {
                tv[i] += alpha * step(static_cast<Eigen::Index>(i));
            }
            trial = SystemState::from_array(tv);
            double norm_trial = 0.0;
            for (double v : evaluate_rhs(trial, p, control).as_array()) {
                norm_trial = std::max(norm_trial, std::abs(v));
            }
            if (norm_trial < norm_f) {
                y = trial;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) {
            throw numeric_error("Newton line search stalled; last iterate: " + format_state(y));
        }
    }
    throw numeric_error("Newton did not converge within " + std::to_string(max_iterations) +
                        " iterations; last iterate: " + format_state(y));
}

/// One-dimensional steady-state reduction: given a trial infectious-mosquito
/// count x, chain the human equilibrium relations and the mosquito balance
/// to the implied infectious-mosquito count. Interior equilibria are fixed
/// points x > 0 of that map.
struct ReducedPoint {
    SystemState state;
    double mismatch = 0.0;
    bool valid = false;
};

ReducedPoint reduce_at(double x, const ModelParameters& p, const ControlLevel& control)
{
    ReducedPoint out;
    const double lambda_h = p.B * p.beta_mh * x / p.N_h;
    SystemState s;
    s.S_h = p.mu_h * p.N_h / (lambda_h + p.mu_h);
    s.E_h = lambda_h * s.S_h / (p.nu_h + p.mu_h);
    s.I_h = p.nu_h * s.E_h / (p.eta_h + p.mu_h);
    s.R_h = p.eta_h * s.I_h / p.mu_h;

    const double g = p.B * p.beta_hm * s.I_h / p.N_h;
    const double muc = p.mu_m + control.c;
    const double mec = p.mu_m + p.eta_m + control.c;
    const double adults_per_sm = 1.0 + g / mec + g * p.eta_m / (mec * muc);
    s.A_m = p.K * (1.0 - (p.eta_A + p.mu_A) * (g + muc) / (p.eta_A * p.mu_b * adults_per_sm));
    if (!(s.A_m > 0.0)) {
        out.mismatch = -x; // no viable mosquito stock at this infection level
        return out;
    }
    s.S_m = p.eta_A * s.A_m / (g + muc);
    s.E_m = g * s.S_m / mec;
    s.I_m = p.eta_m * s.E_m / muc;

    out.state = s;
    out.mismatch = s.I_m - x;
    out.valid = true;
    return out;
}

SystemState interior_guess_from_reduction(const ModelParameters& p, const ControlLevel& control)
{
    const double x_max = p.m * p.N_h;
    const double x_min = 1e-10 * x_max;
    constexpr int n_scan = 600;

    double prev_x = x_min;
    double prev_mismatch = reduce_at(x_min, p, control).mismatch;
    double lo = 0.0;
    double hi = 0.0;
    bool bracketed = false;
    for (int i = 1; i <= n_scan; ++i) {
        const double x = x_min * std::pow(x_max / x_min, static_cast<double>(i) / n_scan);
        const double mis = reduce_at(x, p, control).mismatch;
        if (prev_mismatch > 0.0 && mis <= 0.0) {
            lo = prev_x;
            hi = x;
            bracketed = true;
            break;
        }
        prev_x = x;
        prev_mismatch = mis;
    }
    if (!bracketed) {
        throw numeric_error("no interior steady state found: the disease-free state is the "
                            "only equilibrium in the biological region");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (reduce_at(mid, p, control).mismatch > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return reduce_at(0.5 * (lo + hi), p, control).state;
}

bool looks_disease_free(const SystemState& s)
{
    const double infected =
        std::max({std::abs(s.E_h), std::abs(s.I_h), std::abs(s.E_m), std::abs(s.I_m)});
    return infected < 1e-6 * state_scale(s);
}

} // namespace

const char* to_string(EquilibriumKind kind)
{
    switch (kind) {
    case EquilibriumKind::trivial:
        return "trivial";
    case EquilibriumKind::brdfe:
        return "brdfe";
    case EquilibriumKind::endemic:
        return "endemic";
    }
    return "unknown";
}

const char* to_string(StabilityVerdict verdict)
{
    switch (verdict) {
    case StabilityVerdict::asymptotically_stable:
        return "asymptotically_stable";
    case StabilityVerdict::unstable:
        return "unstable";
    case StabilityVerdict::marginal:
        return "marginal";
    }
    return "unknown";
}

EquilibriumReport trivial_equilibrium(const ModelParameters& p, const ControlLevel& control)
{
    p.validate();
    control.validate();
    SystemState state;
    state.S_h = p.N_h;
    return make_report(EquilibriumKind::trivial, state, p, control);
}

EquilibriumReport brdfe_equilibrium(const ModelParameters& p, const ControlLevel& control)
{
    p.validate();
    control.validate();
    const double viability = mosquito_viability(p, control);
    if (!(viability > 0.0)) {
        std::ostringstream msg;
        msg << "BRDFE does not exist: mosquito viability margin is " << viability << " (<= 0)";
        throw domain_error(msg.str());
    }
    SystemState state;
    state.S_h = p.N_h;
    state.A_m = p.k * p.N_h * viability / (p.eta_A * p.mu_b);
    state.S_m = p.k * p.N_h * viability / (p.mu_b * (p.mu_m + control.c));
    return make_report(EquilibriumKind::brdfe, state, p, control);
}

EquilibriumReport endemic_equilibrium(const ModelParameters& p, const ControlLevel& control,
                                      const std::optional<SystemState>& guess)
{
    p.validate();
    control.validate();
    if (!(mosquito_viability(p, control) > 0.0)) {
        throw domain_error("endemic equilibrium cannot exist: mosquito viability margin <= 0");
    }

    const SystemState start = guess ? *guess : interior_guess_from_reduction(p, control);
    const NewtonResult result = newton_solve(start, p, control);

    if (looks_disease_free(result.root)) {
        throw collapsed_to_dfe_error("Newton collapsed to a disease-free root (" +
                                     format_state(result.root) +
                                     "); retry with a different interior guess");
    }
    const bool interior = result.root.E_h > 0.0 && result.root.I_h > 0.0 &&
                          result.root.E_m > 0.0 && result.root.I_m > 0.0;
    if (!interior || !in_biological_region(result.root, p, undershoot_tolerance)) {
        throw numeric_error("Newton converged outside the biological region: " +
                            format_state(result.root));
    }
    return make_report(EquilibriumKind::endemic, result.root, p, control);
}

JacobianMatrix jacobian(const SystemState& state, const ModelParameters& p,
                        const ControlLevel& control)
{
    if (!state.all_finite()) {
        throw domain_error("jacobian requires a finite state");
    }
    const double c = control.c;
    const double foi_h = p.B * p.beta_mh * state.I_m / p.N_h;
    const double foi_m = p.B * p.beta_hm * state.I_h / p.N_h;

    JacobianMatrix J = JacobianMatrix::Zero();
    J(0, 0) = -(foi_h + p.mu_h);
    J(0, 7) = -p.B * p.beta_mh * state.S_h / p.N_h;
    J(1, 0) = foi_h;
    J(1, 1) = -(p.nu_h + p.mu_h);
    J(1, 7) = p.B * p.beta_mh * state.S_h / p.N_h;
    J(2, 1) = p.nu_h;
    J(2, 2) = -(p.eta_h + p.mu_h);
    J(3, 2) = p.eta_h;
    J(3, 3) = -p.mu_h;
    J(4, 4) = -p.mu_b * state.adult_mosquito_total() / p.K - (p.eta_A + p.mu_A);
    J(4, 5) = J(4, 6) = J(4, 7) = p.mu_b * (1.0 - state.A_m / p.K);
    J(5, 2) = -p.B * p.beta_hm * state.S_m / p.N_h;
    J(5, 4) = p.eta_A;
    J(5, 5) = -(foi_m + p.mu_m + c);
    J(6, 2) = p.B * p.beta_hm * state.S_m / p.N_h;
    J(6, 5) = foi_m;
    J(6, 6) = -(p.mu_m + p.eta_m + c);
    J(7, 6) = p.eta_m;
    J(7, 7) = -(p.mu_m + c);
    return J;
}

std::array<std::complex<double>, 8> eigenvalues(const JacobianMatrix& matrix)
{
    if (!matrix.allFinite()) {
        throw domain_error("eigenvalues require a finite matrix");
    }
    Eigen::EigenSolver<JacobianMatrix> solver(matrix, false);
    if (solver.info() != Eigen::Success) {
        throw numeric_error("eigenvalue iteration failed to converge");
    }

    std::array<std::complex<double>, 8> out;
    for (Eigen::Index i = 0; i < 8; ++i) {
        out[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) {
            return a.real() > b.real();
        }
        return a.imag() > b.imag();
    });

    std::complex<double> sum = 0.0;
    std::complex<double> product = 1.0;
    for (const auto& ev : out) {
        sum += ev;
        product *= ev;
    }
    const double trace = matrix.trace();
    const double scale = std::max({1.0, std::abs(trace), 8.0 * matrix.cwiseAbs().maxCoeff()});
    if (std::abs(sum.real() - trace) > 1e-8 * scale || std::abs(sum.imag()) > 1e-8 * scale) {
        throw numeric_error("eigenvalue spectrum inconsistent with the matrix trace");
    }
    const double det = matrix.determinant();
    const double det_scale = std::max(std::abs(det), std::abs(product));
    if (det_scale > 1e-280 && std::abs(product.real() - det) > 1e-6 * det_scale) {
        throw numeric_error("eigenvalue spectrum inconsistent with the matrix determinant");
    }
    return out;
}

StabilityVerdict classify_stability(const EquilibriumReport& report)
{
    double max_real = report.eigenvalues[0].real();
    for (const auto& ev : report.eigenvalues) {
        max_real = std::max(max_real, ev.real());
    }

    StabilityVerdict verdict = StabilityVerdict::marginal;
    if (max_real < -stability_band) {
        verdict = StabilityVerdict::asymptotically_stable;
    } else if (max_real > stability_band) {
        verdict = StabilityVerdict::unstable;
    }

    if (report.kind == EquilibriumKind::brdfe && report.r0.has_value() &&
        std::abs(*report.r0 - 1.0) >= 1e-3 && verdict != StabilityVerdict::marginal) {
        const StabilityVerdict expected = *report.r0 < 1.0
                                              ? StabilityVerdict::asymptotically_stable
                                              : StabilityVerdict::unstable;
        if (verdict != expected) {
            std::ostringstream msg;
            msg << "BRDFE verdict " << to_string(verdict) << " (max Re eigenvalue = " << max_real
                << ") contradicts R0 = " << *report.r0;
            throw consistency_error(msg.str());
        }
    }
    return verdict;
}

double threshold_control(const ModelParameters& p, double tol, std::optional<double> upper_bound)
{
    p.validate();
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw domain_error("threshold tolerance must be finite and > 0");
    }
    if (!(mosquito_viability(p, ControlLevel{0.0}) > 0.0)) {
        throw domain_error("threshold undefined: no mosquito population even without control");
    }
    if (basic_reproduction_number(p, ControlLevel{0.0}) <= 1.0) {
        return 0.0;
    }

    const double c_bound = viability_control_bound(p);
    double hi = c_bound * (1.0 - 1e-9);
    if (upper_bound) {
        if (!(*upper_bound > 0.0) || !(*upper_bound < c_bound)) {
            std::ostringstream msg;
            msg << "bracket upper bound must lie in (0, " << c_bound << "), got " << *upper_bound;
            throw domain_error(msg.str());
        }
        hi = *upper_bound;
    }
    if (basic_reproduction_number(p, ControlLevel{hi}) >= 1.0) {
        throw domain_error("bracket upper bound does not bring R0 below one; widen it");
    }

    double lo = 0.0;
    for (int i = 0; i < 200 && 0.5 * (hi - lo) > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (basic_reproduction_number(p, ControlLevel{mid}) > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<SweepRow> sweep(const ModelParameters& p, std::span<const double> c_grid,
                            const SystemState& initial, const IntegrationConfig& cfg)
{
    p.validate();
    cfg.validate();
    if (c_grid.empty()) {
        throw domain_error("sweep grid must be nonempty");
    }
    for (std::size_t i = 0; i < c_grid.size(); ++i) {
        if (!(c_grid[i] >= 0.0) || !std::isfinite(c_grid[i])) {
            throw domain_error("sweep grid values must be finite and >= 0");
        }
        if (i > 0 && !(c_grid[i] > c_grid[i - 1])) {
            throw domain_error("sweep grid must be strictly ascending");
        }
    }

    std::vector<SweepRow> rows;
    rows.reserve(c_grid.size());
    for (const double c : c_grid) {
        SweepRow row;
        row.control = c;
        const ControlLevel control{c};
        row.viability = mosquito_viability(p, control);
        if (row.viability > 0.0) {
            row.r0 = basic_reproduction_number(p, control);
            try {
                row.brdfe_verdict = brdfe_equilibrium(p, control).stability;
            } catch (const std::exception& e) {
                row.note += std::string("brdfe: ") + e.what() + "; ";
            }
        }
        try {
            const Trajectory traj = integrate(initial, p, control, cfg);
            row.peak_I_h = traj.peak_infectious_humans().state.I_h;
            row.final_I_m = traj.final_state().I_m;
        } catch (const std::exception& e) {
            row.note += std::string("simulation: ") + e.what() + "; ";
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace dengue
