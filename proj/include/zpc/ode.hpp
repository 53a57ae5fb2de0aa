#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "zpc/errors.hpp"

namespace zpc::ode {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double initial_step = 0.0;    // 0 -> heuristic
    double ceiling = 1e12;        // any |y_i| above this raises InstabilityError
    std::int64_t max_steps = 50'000'000;
};

template <class State>
struct Result {
    std::vector<double> t;
    std::vector<State> y;
    std::vector<State> dy;  // rhs at each accepted point, for interpolation

    const State& back() const { return y.back(); }
};

/// Cubic Hermite interpolant on one accepted step.
template <class State>
State hermite(double t, double t0, const State& y0, const State& f0,
              double t1, const State& y1, const State& f1) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0 +
           (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * f1;
}

/// Embedded Dormand-Prince 5(4) with PI-free standard step control.
/// State must support Eigen-style coefficient-wise arithmetic and
/// cwiseAbs()/maxCoeff().
template <class State, class Rhs>
Result<State> integrate_adaptive(Rhs&& f, const State& y0, double t0, double t1,
                                 const Options& opt = {}) {
    // Dormand-Prince coefficients
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                            e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    Result<State> out;
    State y = y0;
    State k1 = f(t0, y);
    double t = t0;
    double h = opt.initial_step > 0.0 ? opt.initial_step
                                      : (t1 - t0) * 1e-4;
    out.t.push_back(t);
    out.y.push_back(y);
    out.dy.push_back(k1);

    std::int64_t steps = 0;
    while (t < t1) {
        if (++steps > opt.max_steps)
            throw StepSizeError("ode: step budget exhausted");
        if (t + h > t1) h = t1 - t;

        const State k2 = f(t + c2 * h, y + h * (a21 * k1));
        const State k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const State k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const State k5 =
            f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 +
                                           a64 * k4 + a65 * k5));
        const State ynew =
            y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = f(t + h, ynew);
        const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 +
                               e7 * k7);

        double err_norm = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            const double scale =
                opt.abs_tol +
                opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err_norm = std::max(err_norm, std::abs(err[i]) / scale);
        }

        if (err_norm <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            if (y.cwiseAbs().maxCoeff() > opt.ceiling)
                throw InstabilityError("ode: solution exceeded ceiling");
            out.t.push_back(t);
            out.y.push_back(y);
            out.dy.push_back(k1);
        }
        const double factor =
            err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.2, factor));
        if (!(h > 0.0) || t + h == t)
            throw StepSizeError("ode: step size underflow");
    }
    return out;
}

/// Evaluate an adaptive result at arbitrary times inside its span.
template <class State>
State sample(const Result<State>& r, double t) {
    if (t <= r.t.front()) return r.y.front();
    if (t >= r.t.back()) return r.y.back();
    auto it = std::upper_bound(r.t.begin(), r.t.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - r.t.begin());
    return hermite(t, r.t[i - 1], r.y[i - 1], r.dy[i - 1], r.t[i], r.y[i],
                   r.dy[i]);
}

} // namespace zpc::ode
