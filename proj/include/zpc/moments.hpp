#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "zpc/ode.hpp"
#include "zpc/params.hpp"

namespace zpc::moments {

/// Real second-moment variables of the Gaussian description.
/// u is the correlation variable: i<a+b - ab+> for anti-Stokes,
/// i<a+b+ - ab> for Stokes (equivalently 2i times the complex cross moment).
struct MomentState {
    Interaction kind = Interaction::antiStokes;
    double u = 0.0;
    double n_opt = 0.0;
    double n_mech = 0.0;

    Eigen::Vector3d vec() const { return {u, n_opt, n_mech}; }
    static MomentState from_vec(Interaction kind, const Eigen::Vector3d& v) {
        return {kind, v[0], v[1], v[2]};
    }
};

/// MomentState plus the anomalous moments that close the dynamics.
/// c_cross is <ab> for anti-Stokes and <ab+> for Stokes.
struct ExtendedMomentState {
    MomentState base;
    std::complex<double> c_aa{0.0, 0.0};     // <a^2>
    std::complex<double> c_cross{0.0, 0.0};
    std::complex<double> c_bb{0.0, 0.0};     // <b^2>

    using Vec9 = Eigen::Matrix<double, 9, 1>;
    Vec9 vec() const;
    static ExtendedMomentState from_vec(Interaction kind, const Vec9& v);
};

struct Tolerances {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
};

/// Drift matrix A of the unconditioned dynamics.
Eigen::Matrix3d drift_matrix(Interaction kind, const SystemParams& p);

/// Constant source vector of the unconditioned dynamics.
Eigen::Vector3d drift_offset(Interaction kind, const SystemParams& p);

/// Time derivative of (u, n_opt, n_mech); eta > 0 adds the nonlinear
/// zero-click conditioning terms.
Eigen::Vector3d drift(const MomentState& s, const SystemParams& p, double eta);

/// Jacobian of drift with respect to (u, n_opt, n_mech).
Eigen::Matrix3d drift_jacobian(const MomentState& s, const SystemParams& p,
                               double eta);

/// Drift extended with the anomalous-moment equations.
ExtendedMomentState::Vec9 extended_drift(const ExtendedMomentState& s,
                                         const SystemParams& p, double eta);

struct MomentSeries {
    Interaction kind;
    ode::Result<Eigen::Vector3d> raw;

    MomentState at(double t) const {
        return MomentState::from_vec(kind, ode::sample(raw, t));
    }
    MomentState front() const { return MomentState::from_vec(kind, raw.y.front()); }
    MomentState back() const { return MomentState::from_vec(kind, raw.y.back()); }
};

/// Adaptive integration of the moment equations over [t0, t1].
/// Unconditioned Stokes runs require G^2 < gamma*kappa; conditioned Stokes
/// runs are allowed past the boundary but abort with InstabilityError once
/// any moment exceeds the ceiling.
MomentSeries integrate(const MomentState& s0, const SystemParams& p, double eta,
                       double t0, double t1, const Tolerances& tol = {},
                       double ceiling = 1e12);

struct ExtendedSeries {
    Interaction kind;
    ode::Result<ExtendedMomentState::Vec9> raw;

    ExtendedMomentState back() const {
        return ExtendedMomentState::from_vec(kind, raw.y.back());
    }
};

ExtendedSeries integrate_extended(const ExtendedMomentState& s0,
                                  const SystemParams& p, double eta, double t0,
                                  double t1, const Tolerances& tol = {},
                                  double ceiling = 1e12);

/// Exact steady state of the unconditioned (eta = 0) dynamics via linear solve.
MomentState unconditioned_steady_state(Interaction kind, const SystemParams& p);

/// Fixed point of the conditioned drift, by damped Newton iteration seeded
/// from the unconditioned steady state, with a long-time-integration fallback.
MomentState conditioned_steady_state(Interaction kind, const SystemParams& p,
                                     double eta, double tol = 1e-10);

/// Moment transformation at a single-photon detection event.
MomentState apply_click(const MomentState& s);
ExtendedMomentState apply_click(const ExtendedMomentState& s);

/// Eigenvalues of the unconditioned drift matrix.
Eigen::Vector3cd stability_eigenvalues(Interaction kind, const SystemParams& p);

/// Minimum detection efficiency at which continuous zero-click conditioning
/// holds the Stokes-driven mechanical occupation at the bath occupation.
double threshold_efficiency_continuous(const SystemParams& p, double tol = 1e-4);

/// Uncertainty-principle positivity of the two-mode covariance matrix
/// assembled from (u, n_opt, n_mech) with vanishing anomalous moments.
bool is_physical(const MomentState& s, double tol = 1e-8);

/// Time to wait after a click before the Gaussian conditioned equations
/// are trusted again.
double regauss_window(const SystemParams& p, double multiplier = 3.0);

} // namespace zpc::moments
