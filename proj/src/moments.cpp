#include "zpc/moments.hpp"

#include <cmath>

namespace zpc::moments {

using std::complex;
using Vec9 = ExtendedMomentState::Vec9;

Vec9 ExtendedMomentState::vec() const {
    Vec9 v;
    v << base.u, base.n_opt, base.n_mech, c_aa.real(), c_aa.imag(),
        c_cross.real(), c_cross.imag(), c_bb.real(), c_bb.imag();
    return v;
}

ExtendedMomentState ExtendedMomentState::from_vec(Interaction kind,
                                                 const Vec9& v) {
    ExtendedMomentState s;
    s.base = {kind, v[0], v[1], v[2]};
    s.c_aa = {v[3], v[4]};
    s.c_cross = {v[5], v[6]};
    s.c_bb = {v[7], v[8]};
    return s;
}

Eigen::Matrix3d drift_matrix(Interaction kind, const SystemParams& p) {
    p.validate();
    const double G = p.coupling, k = p.kappa(), g = p.gamma;
    Eigen::Matrix3d A;
    if (kind == Interaction::antiStokes) {
        A << -(k + g), 2 * G, -2 * G,
             -G, -2 * k, 0,
              G, 0, -2 * g;
    } else {
        A << -(k + g), -2 * G, -2 * G,
             -G, -2 * k, 0,
             -G, 0, -2 * g;
    }
    return A;
}

Eigen::Vector3d drift_offset(Interaction kind, const SystemParams& p) {
    p.validate();
    const double src = kind == Interaction::stokes ? -2.0 * p.coupling : 0.0;
    return {src, 0.0, 2.0 * p.gamma * p.bath_occupation};
}

Eigen::Vector3d drift(const MomentState& s, const SystemParams& p, double eta) {
    validate_efficiency(eta);
    Eigen::Vector3d d =
        drift_matrix(s.kind, p) * s.vec() + drift_offset(s.kind, p);
    const double m = eta * p.kappa_ex;
    if (m > 0.0) {
        d[0] -= 2.0 * m * s.u * s.n_opt;
        d[1] -= 2.0 * m * s.n_opt * s.n_opt;
        d[2] -= 0.5 * m * s.u * s.u;
    }
    return d;
}

Eigen::Matrix3d drift_jacobian(const MomentState& s, const SystemParams& p,
                               double eta) {
    Eigen::Matrix3d J = drift_matrix(s.kind, p);
    const double m = eta * p.kappa_ex;
    J(0, 0) -= 2.0 * m * s.n_opt;
    J(0, 1) -= 2.0 * m * s.u;
    J(1, 1) -= 4.0 * m * s.n_opt;
    J(2, 0) -= m * s.u;
    return J;
}

Vec9 extended_drift(const ExtendedMomentState& s, const SystemParams& p,
                    double eta) {
    const Eigen::Vector3d dmain = drift(s.base, p, eta);
    const double G = p.coupling, k = p.kappa(), g = p.gamma;
    const double m = eta * p.kappa_ex;
    const complex<double> i(0.0, 1.0);
    // cross main moment: <a+b> (anti-Stokes) or <a+b+> (Stokes) = -i u / 2
    const complex<double> cross_main = -i * s.base.u / 2.0;
    const double n_opt = s.base.n_opt;

    complex<double> d_aa, d_cross, d_bb;
    if (s.base.kind == Interaction::antiStokes) {
        d_aa = -2.0 * i * G * s.c_cross - 2.0 * k * s.c_aa -
               4.0 * m * n_opt * s.c_aa;
        d_cross = -i * G * (s.c_aa + s.c_bb) - (k + g) * s.c_cross -
                  2.0 * m * (n_opt * s.c_cross + s.c_aa * cross_main);
        d_bb = -2.0 * i * G * s.c_cross - 2.0 * g * s.c_bb -
               4.0 * m * cross_main * s.c_cross;
    } else {
        // c_cross = <ab+>; <a+b> = conj(c_cross), <ab> = conj(<a+b+>)
        const complex<double> ab = std::conj(cross_main);
        d_aa = -2.0 * i * G * s.c_cross - 2.0 * k * s.c_aa -
               4.0 * m * n_opt * s.c_aa;
        d_cross = i * G * (s.c_aa - std::conj(s.c_bb)) - (k + g) * s.c_cross -
                  2.0 * m * (n_opt * s.c_cross + s.c_aa * cross_main);
        d_bb = -2.0 * i * G * std::conj(s.c_cross) - 2.0 * g * s.c_bb -
               4.0 * m * std::conj(s.c_cross) * ab;
    }
    Vec9 d;
    d << dmain[0], dmain[1], dmain[2], d_aa.real(), d_aa.imag(),
        d_cross.real(), d_cross.imag(), d_bb.real(), d_bb.imag();
    return d;
}

namespace {

void check_regime(Interaction kind, const SystemParams& p, double eta) {
    if (kind == Interaction::stokes && eta == 0.0 &&
        p.coupling * p.coupling >= p.gamma * p.kappa())
        throw InvalidRegimeError(
            "unconditioned Stokes dynamics are unstable for G^2 >= gamma*kappa");
}

} // namespace

MomentSeries integrate(const MomentState& s0, const SystemParams& p, double eta,
                       double t0, double t1, const Tolerances& tol,
                       double ceiling) {
    p.validate();
    validate_efficiency(eta);
    check_regime(s0.kind, p, eta);
    ode::Options opt;
    opt.abs_tol = tol.abs_tol;
    opt.rel_tol = tol.rel_tol;
    opt.ceiling = ceiling;
    auto rhs = [&](double, const Eigen::Vector3d& v) {
        return drift(MomentState::from_vec(s0.kind, v), p, eta);
    };
    return {s0.kind, ode::integrate_adaptive(rhs, s0.vec(), t0, t1, opt)};
}

ExtendedSeries integrate_extended(const ExtendedMomentState& s0,
                                  const SystemParams& p, double eta, double t0,
                                  double t1, const Tolerances& tol,
                                  double ceiling) {
    p.validate();
    validate_efficiency(eta);
    check_regime(s0.base.kind, p, eta);
    ode::Options opt;
    opt.abs_tol = tol.abs_tol;
    opt.rel_tol = tol.rel_tol;
    opt.ceiling = ceiling;
    const Interaction kind = s0.base.kind;
    auto rhs = [&, kind](double, const Vec9& v) {
        return extended_drift(ExtendedMomentState::from_vec(kind, v), p, eta);
    };
    return {kind, ode::integrate_adaptive(rhs, s0.vec(), t0, t1, opt)};
}

MomentState unconditioned_steady_state(Interaction kind,
                                       const SystemParams& p) {
    p.validate();
    if (p.gamma <= 0.0)
        throw DomainError("steady state requires gamma > 0");
    if (kind == Interaction::stokes &&
        p.coupling * p.coupling >= p.gamma * p.kappa())
        throw InvalidRegimeError(
            "no Stokes steady state for G^2 >= gamma*kappa");
    const Eigen::Matrix3d A = drift_matrix(kind, p);
    const Eigen::Vector3d n = drift_offset(kind, p);
    return MomentState::from_vec(kind, A.fullPivLu().solve(-n));
}

namespace {

bool newton_solve(MomentState& s, const SystemParams& p, double eta,
                  double tol, int max_iter) {
    double res = drift(s, p, eta).norm();
    for (int it = 0; it < max_iter; ++it) {
        if (res < tol) return true;
        const Eigen::Vector3d f = drift(s, p, eta);
        const Eigen::Matrix3d J = drift_jacobian(s, p, eta);
        const Eigen::Vector3d step = J.fullPivLu().solve(-f);
        double damping = 1.0;
        MomentState trial = s;
        for (int half = 0; half < 30; ++half) {
            trial = MomentState::from_vec(s.kind, s.vec() + damping * step);
            if (drift(trial, p, eta).norm() < res) break;
            damping *= 0.5;
        }
        const double new_res = drift(trial, p, eta).norm();
        if (!(new_res < res)) return res < tol;
        s = trial;
        res = new_res;
    }
    return res < tol;
}

} // namespace

MomentState conditioned_steady_state(Interaction kind, const SystemParams& p,
                                     double eta, double tol) {
    p.validate();
    validate_efficiency(eta);
    if (p.gamma <= 0.0)
        throw DomainError("steady state requires gamma > 0");
    MomentState s = unconditioned_steady_state(kind, p);
    if (eta == 0.0) return s;

    if (newton_solve(s, p, eta, tol, 200) && is_physical(s)) return s;

    // fallback: relax by integration, then polish
    s = unconditioned_steady_state(kind, p);
    const double span = 10.0 / std::min(p.gamma, p.kappa());
    for (int chunk = 0; chunk < 100; ++chunk) {
        s = integrate(s, p, eta, 0.0, span).back();
        if (drift(s, p, eta).norm() < 10.0 * tol) break;
    }
    if (newton_solve(s, p, eta, tol, 200) && is_physical(s)) return s;
    throw ConvergenceError("conditioned_steady_state: no fixed point found");
}

MomentState apply_click(const MomentState& s) {
    if (s.n_opt <= 1e-12)
        throw ZeroRateError("apply_click: vanishing optical occupation");
    return {s.kind, 2.0 * s.u, 2.0 * s.n_opt,
            s.n_mech + s.u * s.u / (4.0 * s.n_opt)};
}

ExtendedMomentState apply_click(const ExtendedMomentState& s) {
    const double n_opt = s.base.n_opt;
    if (n_opt <= 1e-12)
        throw ZeroRateError("apply_click: vanishing optical occupation");
    const complex<double> i(0.0, 1.0);
    const complex<double> cross_main = -i * s.base.u / 2.0;

    ExtendedMomentState out;
    out.base.kind = s.base.kind;
    out.base.u = 2.0 * s.base.u +
                 (2.0 * i * std::conj(s.c_aa) * s.c_cross).real() / n_opt;
    out.base.n_opt = 2.0 * n_opt + std::norm(s.c_aa) / n_opt;
    out.base.n_mech =
        s.base.n_mech +
        (s.base.u * s.base.u / 4.0 + std::norm(s.c_cross)) / n_opt;
    out.c_aa = 3.0 * s.c_aa;
    out.c_cross = 2.0 * s.c_cross + cross_main * s.c_aa / n_opt;
    if (s.base.kind == Interaction::antiStokes) {
        out.c_bb = s.c_bb + 2.0 * cross_main * s.c_cross / n_opt;
    } else {
        const complex<double> ab = std::conj(cross_main);
        out.c_bb = s.c_bb + 2.0 * std::conj(s.c_cross) * ab / n_opt;
    }
    return out;
}

Eigen::Vector3cd stability_eigenvalues(Interaction kind,
                                       const SystemParams& p) {
    return Eigen::EigenSolver<Eigen::Matrix3d>(drift_matrix(kind, p))
        .eigenvalues();
}

double threshold_efficiency_continuous(const SystemParams& p, double tol) {
    p.validate();
    const double target = p.bath_occupation;
    auto excess = [&](double eta) {
        return conditioned_steady_state(Interaction::stokes, p, eta).n_mech -
               target;
    };
    double lo = 1e-6, hi = 1.0;
    const double f_hi = excess(hi);
    if (f_hi >= 0.0)
        throw NoRootError(
            "threshold_efficiency_continuous: even eta = 1 does not cool "
            "below the bath occupation");
    if (excess(lo) <= 0.0)
        throw NoRootError(
            "threshold_efficiency_continuous: no sign change on (0, 1]");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

bool is_physical(const MomentState& s, double tol) {
    // quadrature covariance with vanishing anomalous moments, plus i*Omega
    const double a = s.n_opt + 0.5, b = s.n_mech + 0.5, h = s.u / 2.0;
    Eigen::Matrix4cd M = Eigen::Matrix4cd::Zero();
    const std::complex<double> i(0.0, 1.0);
    M(0, 0) = M(1, 1) = a;
    M(2, 2) = M(3, 3) = b;
    if (s.kind == Interaction::antiStokes) {
        M(0, 3) = -h; M(3, 0) = -h;
        M(1, 2) = h;  M(2, 1) = h;
    } else {
        M(0, 3) = h; M(3, 0) = h;
        M(1, 2) = h; M(2, 1) = h;
    }
    M(0, 1) += 0.5 * i; M(1, 0) -= 0.5 * i;
    M(2, 3) += 0.5 * i; M(3, 2) -= 0.5 * i;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(M);
    return es.eigenvalues().minCoeff() >= -tol;
}

double regauss_window(const SystemParams& p, double multiplier) {
    return multiplier / std::min(p.gamma, p.kappa());
}

} // namespace zpc::moments
