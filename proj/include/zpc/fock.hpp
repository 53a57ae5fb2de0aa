#pragma once

#include <complex>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "zpc/params.hpp"

namespace zpc::fock {

/// Density operator of the joint optical-mechanical system in the truncated
/// product Fock basis |n_opt> (x) |m_mech>, row-major over the product index
/// i = n_opt * d_mech + m_mech.
struct JointDensityMatrix {
    Eigen::MatrixXcd rho;
    int d_opt = 0;
    int d_mech = 0;
    double tail_tol = 1e-8;

    int dim() const { return d_opt * d_mech; }
    int index(int n_opt, int m_mech) const { return n_opt * d_mech + m_mech; }

    double trace() const { return rho.trace().real(); }

    /// Marginal photon-number distribution of the optical mode.
    Eigen::VectorXd optical_populations() const;
    /// Marginal phonon-number distribution of the mechanical mode.
    Eigen::VectorXd mechanical_populations() const;

    double optical_mean() const;
    double mechanical_mean() const;

    /// Largest population fraction sitting in the top 10% of either ladder.
    double tail_mass() const;
};

/// Full second-moment set (plus first moments) read off a joint state.
struct MomentSet {
    double n_opt = 0.0;           // <a+a>
    double n_mech = 0.0;          // <b+b>
    std::complex<double> adag_b;  // <a+b>
    std::complex<double> ab;      // <ab>
    std::complex<double> aa;      // <a^2>
    std::complex<double> bb;      // <b^2>
    std::complex<double> a;       // <a>
    std::complex<double> b;       // <b>
};

/// Rates, bath occupation, detection efficiency and interaction choice for
/// the continuous-evolution oracle.
struct OracleParams {
    SystemParams rates;
    double eta = 0.0;
    Interaction kind = Interaction::antiStokes;

    void validate() const {
        rates.validate();
        validate_efficiency(eta);
    }
};

/// |0><0| (x) thermal(nbar), normalized after truncation.  Throws
/// TruncationError when the clipped geometric tail exceeds tail_tol.
JointDensityMatrix thermal_product_state(double nbar, int d_opt, int d_mech,
                                         double tail_tol = 1e-8);

/// Conjugation by exp(-i H tau) with H the truncated interaction
/// Hamiltonian; exploits number conservation for the exponential.
JointDensityMatrix apply_pulsed_unitary(const JointDensityMatrix& state,
                                        Interaction kind, double gtau);

/// Single-mode attenuation of the optical mode with transmission eta,
/// realized as the photon-loss Kraus sum.
JointDensityMatrix apply_loss(const JointDensityMatrix& state, double eta);

/// Projective measurement of the optical mode onto |n>.  Returns the
/// normalized conditional state (optical mode collapsed to |n>) and the
/// outcome probability.
std::pair<JointDensityMatrix, double>
project_photon_number(const JointDensityMatrix& state, int n);

/// Lindblad evolution with the measurement averaged out (eta plays no role).
JointDensityMatrix evolve_unconditional(const JointDensityMatrix& state,
                                        const OracleParams& params,
                                        double duration, double dt);

/// No-click conditioned evolution; returns the normalized conditioned state
/// and the accumulated log-probability of the all-zero-click record.
std::pair<JointDensityMatrix, double>
evolve_conditioned_no_click(const JointDensityMatrix& state,
                            const OracleParams& params, double duration,
                            double dt);

/// Jump a rho a+ / <a+a>; second element is the rate weight <a+a>.
std::pair<JointDensityMatrix, double>
apply_click_jump_exact(const JointDensityMatrix& state);

MomentSet second_moments(const JointDensityMatrix& state);

/// Hermiticity / trace / positivity / tail checks; throws on violation.
void validate_state(const JointDensityMatrix& state,
                    double hermiticity_tol = 1e-12, double trace_tol = 1e-10,
                    double positivity_tol = 1e-10);

/// Flat binary fixture dump: two little-endian uint32 dims, then row-major
/// complex doubles.
void write_binary(const JointDensityMatrix& state, const std::string& path);
JointDensityMatrix read_binary(const std::string& path);

} // namespace zpc::fock
