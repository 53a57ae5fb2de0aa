#include "zpc/pulsed.hpp"

#include <cmath>
#include <limits>

namespace zpc::pulsed {

namespace {

constexpr double kSinhGuard = 1e12;  // switch to asymptotic evaluation above this

void check_inputs(double nbar, double gtau) {
    if (nbar < 0.0) throw DomainError("pulsed: nbar must be non-negative");
    if (gtau < 0.0) throw DomainError("pulsed: gtau must be non-negative");
}

std::vector<double> geometric_weights(double mean, int cutoff) {
    std::vector<double> w(static_cast<std::size_t>(cutoff));
    const double ratio = mean / (1.0 + mean);
    double p = 1.0 / (1.0 + mean);
    for (auto& x : w) {
        x = p;
        p *= ratio;
    }
    return w;
}

} // namespace

int thermal_weight_cutoff(double mean, double tail_tol) {
    if (mean <= 0.0) return 1;
    // tail beyond M levels is (mean/(1+mean))^M
    const double log_ratio = std::log(mean / (1.0 + mean));
    return static_cast<int>(std::ceil(std::log(tail_tol) / log_ratio)) + 1;
}

ConditionedThermalResult as_zero_click(double nbar, double gtau, double eta,
                                       int weight_cutoff) {
    check_inputs(nbar, gtau);
    validate_efficiency(eta);
    const double c2 = std::cos(gtau) * std::cos(gtau);
    const double s2 = std::sin(gtau) * std::sin(gtau);
    ConditionedThermalResult r;
    r.occupation = nbar * c2 / (1.0 + eta * nbar * s2);
    r.probability = 1.0 / (1.0 + eta * nbar * s2);
    if (weight_cutoff != 0) {
        if (weight_cutoff < 0) weight_cutoff = thermal_weight_cutoff(r.occupation);
        r.fock_weights = geometric_weights(r.occupation, weight_cutoff);
    }
    return r;
}

ConditionedThermalResult as_n_click(double nbar, double gtau, int n_clicks,
                                    int weight_cutoff) {
    check_inputs(nbar, gtau);
    if (n_clicks < 0) throw DomainError("pulsed: n_clicks must be non-negative");
    const double c2 = std::cos(gtau) * std::cos(gtau);
    const double s2 = std::sin(gtau) * std::sin(gtau);
    const double n0 = nbar * c2 / (1.0 + nbar * s2);

    ConditionedThermalResult r;
    r.occupation = (n_clicks + 1) * n0;
    // (nbar sin^2)^n / (1 + nbar sin^2)^(n+1), with 0^0 = 1
    r.probability = std::pow(nbar * s2, n_clicks) /
                    std::pow(1.0 + nbar * s2, n_clicks + 1);
    if (weight_cutoff != 0) {
        if (weight_cutoff < 0)
            weight_cutoff = thermal_weight_cutoff(r.occupation + 1.0) + n_clicks;
        // w_m = prefac * x^m * C(m+n, n),  x = nbar cos^2 / (1 + nbar)
        const double x = nbar * c2 / (1.0 + nbar);
        const double prefac =
            std::pow((1.0 + nbar * s2) / (1.0 + nbar), n_clicks + 1);
        r.fock_weights.resize(static_cast<std::size_t>(weight_cutoff));
        double binom = 1.0;  // C(m+n, n), updated as m grows
        double xm = 1.0;
        for (int m = 0; m < weight_cutoff; ++m) {
            r.fock_weights[static_cast<std::size_t>(m)] = prefac * xm * binom;
            binom *= static_cast<double>(m + 1 + n_clicks) / (m + 1);
            xm *= x;
        }
    }
    return r;
}

double laser_cooled_occupation(double nbar, double gtau) {
    check_inputs(nbar, gtau);
    const double c = std::cos(gtau);
    return nbar * c * c;
}

ConditionedThermalResult s_zero_click(double nbar, double gtau, double eta,
                                      int weight_cutoff) {
    check_inputs(nbar, gtau);
    validate_efficiency(eta);
    const double sh = std::sinh(std::min(gtau, 400.0));
    const double s2 = sh * sh;
    ConditionedThermalResult r;
    if (std::isfinite(s2) && s2 <= kSinhGuard) {
        r.occupation = (nbar + (1.0 + nbar) * (1.0 - eta) * s2) /
                       (1.0 + eta * (1.0 + nbar) * s2);
        r.probability = 1.0 / (1.0 + eta * (nbar + 1.0) * s2);
    } else {
        // divide through by sinh^2; inv_s2 -> 0 smoothly for large gtau
        const double e = std::exp(-2.0 * gtau);
        const double inv_s2 = 4.0 * e / ((1.0 - e) * (1.0 - e));
        if (eta > 0.0) {
            r.occupation = (nbar * inv_s2 + (1.0 + nbar) * (1.0 - eta)) /
                           (inv_s2 + eta * (1.0 + nbar));
            r.probability = inv_s2 / (inv_s2 + eta * (nbar + 1.0));
        } else {
            r.occupation = inv_s2 > 0.0
                               ? nbar + (1.0 + nbar) / inv_s2
                               : std::numeric_limits<double>::infinity();
            r.probability = 1.0;
        }
    }
    if (weight_cutoff != 0 && std::isfinite(r.occupation)) {
        if (weight_cutoff < 0) weight_cutoff = thermal_weight_cutoff(r.occupation);
        r.fock_weights = geometric_weights(r.occupation, weight_cutoff);
    }
    return r;
}

ConditionedThermalResult s_n_click(double nbar, double gtau, int n_clicks,
                                   int weight_cutoff) {
    check_inputs(nbar, gtau);
    if (n_clicks < 0) throw DomainError("pulsed: n_clicks must be non-negative");
    const double sh = std::sinh(std::min(gtau, 400.0));
    const double s2 = sh * sh;
    const double n0 = s2 <= kSinhGuard
                          ? nbar / (1.0 + (nbar + 1.0) * s2)
                          : 0.0;
    ConditionedThermalResult r;
    r.occupation = (n_clicks + 1) * n0 + n_clicks;
    if (s2 <= kSinhGuard) {
        r.probability = std::pow((1.0 + nbar) * s2, n_clicks) /
                        std::pow(1.0 + (nbar + 1.0) * s2, n_clicks + 1);
    } else {
        // ((1+nbar)s)^n / (1+(nbar+1)s)^(n+1) ~ 1/((1+nbar) s) for large s
        r.probability = 0.0;
    }
    if (weight_cutoff != 0 && s2 <= kSinhGuard) {
        if (weight_cutoff < 0)
            weight_cutoff = thermal_weight_cutoff(r.occupation + 1.0) + n_clicks;
        if (nbar == 0.0) {
            // vacuum input: conditioned state is exactly |n><n|
            r.fock_weights.assign(static_cast<std::size_t>(weight_cutoff), 0.0);
            if (n_clicks < weight_cutoff)
                r.fock_weights[static_cast<std::size_t>(n_clicks)] = 1.0;
            return r;
        }
        // support starts at m = n:  w_m = prefac * y^m * C(m, n)
        const double ch2 = 1.0 + s2;
        const double y = nbar / ((1.0 + nbar) * ch2);
        const double prefac =
            std::pow(ch2 + nbar * s2, n_clicks + 1) /
            (std::pow(nbar, n_clicks) * (1.0 + nbar) * ch2);
        r.fock_weights.assign(static_cast<std::size_t>(weight_cutoff), 0.0);
        double binom = 1.0;  // C(m, n) for m = n, n+1, ...
        double ym = std::pow(y, n_clicks);
        for (int m = n_clicks; m < weight_cutoff; ++m) {
            r.fock_weights[static_cast<std::size_t>(m)] = prefac * ym * binom;
            binom *= static_cast<double>(m + 1) / (m + 1 - n_clicks);
            ym *= y;
        }
    }
    return r;
}

double tms_occupation(double nbar, double gtau) {
    check_inputs(nbar, gtau);
    return s_zero_click(nbar, gtau, 0.0, 0).occupation;
}

double threshold_efficiency(double nbar) {
    if (nbar < 0.0) throw DomainError("pulsed: nbar must be non-negative");
    return 1.0 / (nbar + 1.0);
}

} // namespace zpc::pulsed
