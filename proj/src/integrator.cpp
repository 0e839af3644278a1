#include "dengue/integrator.hpp"

#include "dengue/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dengue {

namespace {

using Vec8 = std::array<double, SystemState::size>;

constexpr double kMinStep = 1e-12;   // below this the problem is declared stiff
constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

Vec8 rhs_array(const Vec8& y, const ModelParameters& p, const ControlLevel& control)
{
    return evaluate_rhs(SystemState::from_array(y), p, control).as_array();
}

Vec8 axpy(const Vec8& y, double h, const Vec8& dir)
{
    Vec8 out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = y[i] + h * dir[i];
    }
    return out;
}

void check_accepted_state(const Vec8& y, const ModelParameters& p, double t, double h)
{
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) {
            std::ostringstream msg;
            msg << "integration produced non-finite " << SystemState::component_name(i)
                << " at t = " << t << " (step size " << h << ")";
            throw numeric_error(msg.str());
        }
        if (y[i] < -undershoot_tolerance * component_scale(i, p)) {
            std::ostringstream msg;
            msg << "positivity violation: " << SystemState::component_name(i) << " = " << y[i]
                << " at t = " << t << " (step size " << h << ")";
            throw numeric_error(msg.str());
        }
    }
}

/// Emits trajectory samples at t0 + j*interval by linear interpolation
/// between accepted steps; step endpoints that land on a sample time are
/// copied exactly.
class UniformSampler {
public:
    UniformSampler(Trajectory& out, double t0, double t_final, double interval)
        : out_(out), t0_(t0), t_final_(t_final), interval_(interval)
    {
    }

    void emit_initial(const Vec8& y0)
    {
        out_.samples.push_back({t0_, SystemState::from_array(y0)});
        next_ = 1;
    }

    void cover_step(double t_old, const Vec8& y_old, double t_new, const Vec8& y_new)
    {
        const double eps = 1e-12 * std::max(1.0, std::abs(t_new));
        for (;;) {
            const double ts = t0_ + static_cast<double>(next_) * interval_;
            if (ts > t_new + eps || ts > t_final_ + eps) {
                break;
            }
            if (std::abs(ts - t_new) <= eps) {
                out_.samples.push_back({ts, SystemState::from_array(y_new)});
            } else {
                double u = t_new > t_old ? (ts - t_old) / (t_new - t_old) : 1.0;
                u = std::clamp(u, 0.0, 1.0);
                Vec8 yi;
                for (std::size_t i = 0; i < yi.size(); ++i) {
                    yi[i] = y_old[i] + u * (y_new[i] - y_old[i]);
                }
                out_.samples.push_back({ts, SystemState::from_array(yi)});
            }
            ++next_;
        }
    }

    /// Guarantees the trajectory ends exactly at t_final with the final state.
    void finish(const Vec8& y_final)
    {
        const double eps = 1e-12 * std::max(1.0, std::abs(t_final_));
        if (!out_.samples.empty() && std::abs(out_.samples.back().t - t_final_) <= eps) {
            out_.samples.back().t = t_final_;
            out_.samples.back().state = SystemState::from_array(y_final);
        } else {
            out_.samples.push_back({t_final_, SystemState::from_array(y_final)});
        }
    }

private:
    Trajectory& out_;
    double t0_;
    double t_final_;
    double interval_;
    long next_ = 1;
};

void run_fixed_rk4(Trajectory& traj, const Vec8& y0, const ModelParameters& p,
                   const ControlLevel& control, const IntegrationConfig& cfg)
{
    const double span = cfg.t_final - cfg.t0;
    const long n_steps = std::max(1L, static_cast<long>(std::ceil(span / cfg.step - 1e-9)));

    UniformSampler sampler(traj, cfg.t0, cfg.t_final, cfg.sample_interval);
    sampler.emit_initial(y0);

    Vec8 y = y0;
    double t = cfg.t0;
    for (long i = 0; i < n_steps; ++i) {
        const bool last = i + 1 == n_steps;
        const double t_next = last ? cfg.t_final : cfg.t0 + static_cast<double>(i + 1) * cfg.step;
        const double h = t_next - t;

        const Vec8 k1 = rhs_array(y, p, control);
        const Vec8 k2 = rhs_array(axpy(y, 0.5 * h, k1), p, control);
        const Vec8 k3 = rhs_array(axpy(y, 0.5 * h, k2), p, control);
        const Vec8 k4 = rhs_array(axpy(y, h, k3), p, control);

        Vec8 y_next;
        for (std::size_t j = 0; j < y.size(); ++j) {
            y_next[j] = y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }

        check_accepted_state(y_next, p, t_next, h);
        sampler.cover_step(t, y, t_next, y_next);
        y = y_next;
        t = t_next;
        ++traj.accepted_steps;
    }
    sampler.finish(y);
}

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0,
                 A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0,
                 A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0;
constexpr double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0,
                 B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0;
// difference between the 5th-order weights and the embedded 4th-order ones
constexpr double E1 = B1 - 5179.0 / 57600.0;
constexpr double E3 = B3 - 7571.0 / 16695.0;
constexpr double E4 = B4 - 393.0 / 640.0;
constexpr double E5 = B5 + 92097.0 / 339200.0;
constexpr double E6 = B6 - 187.0 / 2100.0;
constexpr double E7 = -1.0 / 40.0;

double weighted_rms(const Vec8& v, const Vec8& w)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double q = v[i] * w[i];
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
}

double initial_step(const Vec8& y0, const Vec8& f0, const ModelParameters& p,
                    const ControlLevel& control, double rel_tol, double abs_tol, double span)
{
    Vec8 w;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = 1.0 / (abs_tol + rel_tol * std::abs(y0[i]));
    }
    const double d0 = weighted_rms(y0, w);
    const double d1 = weighted_rms(f0, w);

    double h0 = (!(d0 >= 1e-5) || !(d1 >= 1e-5)) ? 1e-6 : 0.01 * (d0 / d1);
    if (!std::isfinite(h0)) {
        h0 = 1e-6;
    }
    h0 = std::min(h0, span);

    const Vec8 f1 = rhs_array(axpy(y0, h0, f0), p, control);
    Vec8 df;
    for (std::size_t i = 0; i < df.size(); ++i) {
        df[i] = f1[i] - f0[i];
    }
    const double d2 = weighted_rms(df, w) / h0;

    double h1;
    const double d_max = std::max(d1, d2);
    if (!(d_max > 1e-15)) {
        h1 = std::max(1e-6, h0 * 1e-3);
    } else {
        h1 = std::pow(0.01 / d_max, 0.2);
        if (!std::isfinite(h1)) {
            h1 = 0.0;
        }
    }
    return std::min({100.0 * h0, h1, span});
}

void run_adaptive(Trajectory& traj, const Vec8& y0, const ModelParameters& p,
                  const ControlLevel& control, const IntegrationConfig& cfg)
{
    UniformSampler sampler(traj, cfg.t0, cfg.t_final, cfg.sample_interval);
    sampler.emit_initial(y0);

    Vec8 y = y0;
    double t = cfg.t0;
    Vec8 k1 = rhs_array(y, p, control);
    double h = initial_step(y, k1, p, control, cfg.rel_tol, cfg.abs_tol, cfg.t_final - cfg.t0);

    while (t < cfg.t_final) {
        if (!(h >= kMinStep)) {
            std::ostringstream msg;
            msg << "adaptive step size underflow (h = " << h << " < " << kMinStep
                << " day) at t = " << t << "; system too stiff for the requested tolerances";
            throw numeric_error(msg.str());
        }
        const bool final_step = h >= cfg.t_final - t;
        const double hs = final_step ? cfg.t_final - t : h;

        const Vec8 k2 = rhs_array(axpy(y, hs * A21, k1), p, control);
        Vec8 yi;
        for (std::size_t i = 0; i < yi.size(); ++i) {
            yi[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        const Vec8 k3 = rhs_array(yi, p, control);
        for (std::size_t i = 0; i < yi.size(); ++i) {
            yi[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        const Vec8 k4 = rhs_array(yi, p, control);
        for (std::size_t i = 0; i < yi.size(); ++i) {
            yi[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        const Vec8 k5 = rhs_array(yi, p, control);
        for (std::size_t i = 0; i < yi.size(); ++i) {
            yi[i] = y[i] +
                    hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        const Vec8 k6 = rhs_array(yi, p, control);

        Vec8 y_new;
        for (std::size_t i = 0; i < y_new.size(); ++i) {
            y_new[i] = y[i] +
                       hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        const Vec8 k7 = rhs_array(y_new, p, control); // first stage of the next step

        Vec8 err_vec;
        Vec8 w;
        for (std::size_t i = 0; i < err_vec.size(); ++i) {
            err_vec[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] +
                               E7 * k7[i]);
            w[i] = 1.0 / (cfg.abs_tol +
                          cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i])));
        }
        const double err = weighted_rms(err_vec, w);

        if (!(err <= 1.0)) { // non-finite error norms count as rejections
            ++traj.rejected_steps;
            const double factor =
                std::isfinite(err) ? std::clamp(kSafety * std::pow(err, -0.2), kMinFactor, kMaxFactor)
                                   : kMinFactor;
            h = hs * factor;
            continue;
        }

        double t_new = final_step ? cfg.t_final : t + hs;
        if (t_new > cfg.t_final) {
            t_new = cfg.t_final;
        }
        if (!final_step && t_new <= t) {
            std::ostringstream msg;
            msg << "adaptive step size underflow (h = " << hs
                << " no longer advances t = " << t << ")";
            throw numeric_error(msg.str());
        }
        check_accepted_state(y_new, p, t_new, hs);
        sampler.cover_step(t, y, t_new, y_new);
        y = y_new;
        t = t_new;
        k1 = k7;
        ++traj.accepted_steps;

        const double factor =
            err == 0.0 ? kMaxFactor
                       : std::clamp(kSafety * std::pow(err, -0.2), kMinFactor, kMaxFactor);
        h = hs * factor;
    }
    sampler.finish(y);
}

} // namespace

const char* to_string(StepperMethod method)
{
    return method == StepperMethod::fixed_rk4 ? "fixed_rk4" : "adaptive_45";
}

void IntegrationConfig::validate() const
{
    if (!std::isfinite(t0) || !std::isfinite(t_final) || !(t_final > t0)) {
        throw domain_error("integration window invalid: require t_final > t0");
    }
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw domain_error("integration step must be finite and > 0");
    }
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw domain_error("integration tolerances must be > 0");
    }
    if (!(sample_interval > 0.0) || !std::isfinite(sample_interval)) {
        throw domain_error("sample_interval must be finite and > 0");
    }
}

TrajectorySample Trajectory::peak_infectious_humans() const
{
    const TrajectorySample* best = &samples.front();
    for (const auto& s : samples) {
        if (s.state.I_h > best->state.I_h) {
            best = &s;
        }
    }
    return *best;
}

Trajectory integrate(const SystemState& initial, const ModelParameters& p,
                     const ControlLevel& control, const IntegrationConfig& cfg)
{
    cfg.validate();
    p.validate();
    control.validate();
    if (!in_biological_region(initial, p, undershoot_tolerance)) {
        throw domain_error("initial state lies outside the biological region");
    }

    Trajectory traj;
    traj.method = cfg.method;
    const Vec8 y0 = initial.as_array();
    if (cfg.method == StepperMethod::fixed_rk4) {
        run_fixed_rk4(traj, y0, p, control, cfg);
    } else {
        run_adaptive(traj, y0, p, control, cfg);
    }
    return traj;
}

double convergence_order(const SystemState& initial, const ModelParameters& p,
                         const ControlLevel& control, double base_step)
{
    if (!(base_step > 0.0) || !std::isfinite(base_step)) {
        throw domain_error("base_step must be finite and > 0");
    }
    constexpr double horizon = 10.0; // days; fixed observation window

    IntegrationConfig cfg;
    cfg.t0 = 0.0;
    cfg.t_final = horizon;
    cfg.method = StepperMethod::fixed_rk4;
    cfg.sample_interval = horizon;

    const auto endpoint = [&](double h) {
        IntegrationConfig c = cfg;
        c.step = h;
        return integrate(initial, p, control, c).final_state().as_array();
    };

    const Vec8 ref = endpoint(base_step / 16.0);
    double errs[3];
    for (int i = 0; i < 3; ++i) {
        const Vec8 yh = endpoint(base_step / static_cast<double>(1 << i));
        double acc = 0.0;
        for (std::size_t j = 0; j < ref.size(); ++j) {
            const double q = (yh[j] - ref[j]) / std::max(1.0, std::abs(ref[j]));
            acc += q * q;
        }
        errs[i] = std::sqrt(acc / static_cast<double>(ref.size()));
        if (!(errs[i] > 0.0)) {
            throw numeric_error("convergence order undefined: refinement error at machine zero");
        }
    }
    const double p1 = std::log2(errs[0] / errs[1]);
    const double p2 = std::log2(errs[1] / errs[2]);
    return 0.5 * (p1 + p2);
}

} // namespace dengue
