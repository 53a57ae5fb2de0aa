#include "zpc/fock.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

namespace zpc::fock {

using std::complex;
using Mat = Eigen::MatrixXcd;
using Sparse = Eigen::SparseMatrix<complex<double>>;

namespace {

// --- structure-aware operator application -------------------------------
// The product index is i = n_opt * d_mech + m_mech; optical ladder operators
// shift whole d_mech-sized blocks, mechanical ones shift within blocks.

Mat a_left(const Mat& r, int d_opt, int d_mech) {
    Mat out = Mat::Zero(r.rows(), r.cols());
    for (int no = 0; no + 1 < d_opt; ++no)
        out.middleRows(no * d_mech, d_mech) =
            std::sqrt(no + 1.0) * r.middleRows((no + 1) * d_mech, d_mech);
    return out;
}

Mat adag_left(const Mat& r, int d_opt, int d_mech) {
    Mat out = Mat::Zero(r.rows(), r.cols());
    for (int no = 0; no + 1 < d_opt; ++no)
        out.middleRows((no + 1) * d_mech, d_mech) =
            std::sqrt(no + 1.0) * r.middleRows(no * d_mech, d_mech);
    return out;
}

Mat a_right(const Mat& r, int d_opt, int d_mech) {  // r * a
    Mat out = Mat::Zero(r.rows(), r.cols());
    for (int no = 0; no + 1 < d_opt; ++no)
        out.middleCols((no + 1) * d_mech, d_mech) =
            std::sqrt(no + 1.0) * r.middleCols(no * d_mech, d_mech);
    return out;
}

Mat adag_right(const Mat& r, int d_opt, int d_mech) {  // r * a+
    Mat out = Mat::Zero(r.rows(), r.cols());
    for (int no = 0; no + 1 < d_opt; ++no)
        out.middleCols(no * d_mech, d_mech) =
            std::sqrt(no + 1.0) * r.middleCols((no + 1) * d_mech, d_mech);
    return out;
}

Mat b_left(const Mat& r, int d_opt, int d_mech) {
    Mat out = Mat::Zero(r.rows(), r.cols());
    for (int no = 0; no < d_opt; ++no)
        for (int m = 0; m + 1 < d_mech; ++m)
            out.row(no * d_mech + m) =
                std::sqrt(m + 1.0) * r.row(no * d_mech + m + 1);
    return out;
}

Mat bdag_left(const Mat& r, int d_opt, int d_mech) {
    Mat out = Mat::Zero(r.rows(), r.cols());
    for (int no = 0; no < d_opt; ++no)
        for (int m = 0; m + 1 < d_mech; ++m)
            out.row(no * d_mech + m + 1) =
                std::sqrt(m + 1.0) * r.row(no * d_mech + m);
    return out;
}

Mat b_right(const Mat& r, int d_opt, int d_mech) {  // r * b
    Mat out = Mat::Zero(r.rows(), r.cols());
    for (int no = 0; no < d_opt; ++no)
        for (int m = 0; m + 1 < d_mech; ++m)
            out.col(no * d_mech + m + 1) =
                std::sqrt(m + 1.0) * r.col(no * d_mech + m);
    return out;
}

Mat bdag_right(const Mat& r, int d_opt, int d_mech) {  // r * b+
    Mat out = Mat::Zero(r.rows(), r.cols());
    for (int no = 0; no < d_opt; ++no)
        for (int m = 0; m + 1 < d_mech; ++m)
            out.col(no * d_mech + m) =
                std::sqrt(m + 1.0) * r.col(no * d_mech + m + 1);
    return out;
}

Eigen::VectorXd number_diag_opt(int d_opt, int d_mech) {
    Eigen::VectorXd v(d_opt * d_mech);
    for (int no = 0; no < d_opt; ++no)
        v.segment(no * d_mech, d_mech).setConstant(no);
    return v;
}

Eigen::VectorXd number_diag_mech(int d_opt, int d_mech) {
    Eigen::VectorXd v(d_opt * d_mech);
    for (int no = 0; no < d_opt; ++no)
        for (int m = 0; m < d_mech; ++m) v[no * d_mech + m] = m;
    return v;
}

// b b+ of the truncated ladder: m + 1 below the top level, 0 at the top.
// Using the untruncated m + 1 there would leak trace at a rate the step
// halving cannot reduce.
Eigen::VectorXd bbdag_diag_mech(int d_opt, int d_mech) {
    Eigen::VectorXd v(d_opt * d_mech);
    for (int no = 0; no < d_opt; ++no) {
        for (int m = 0; m + 1 < d_mech; ++m) v[no * d_mech + m] = m + 1.0;
        v[no * d_mech + d_mech - 1] = 0.0;
    }
    return v;
}

Mat h_times(const Mat& r, Interaction kind, int d_opt, int d_mech) {
    // H / G applied on the left
    if (kind == Interaction::antiStokes)
        return adag_left(b_left(r, d_opt, d_mech), d_opt, d_mech) +
               a_left(bdag_left(r, d_opt, d_mech), d_opt, d_mech);
    return adag_left(bdag_left(r, d_opt, d_mech), d_opt, d_mech) +
           a_left(b_left(r, d_opt, d_mech), d_opt, d_mech);
}

Mat times_h(const Mat& r, Interaction kind, int d_opt, int d_mech) {
    if (kind == Interaction::antiStokes)
        return bdag_right(a_right(r, d_opt, d_mech), d_opt, d_mech) +
               b_right(adag_right(r, d_opt, d_mech), d_opt, d_mech);
    return bdag_right(adag_right(r, d_opt, d_mech), d_opt, d_mech) +
           b_right(a_right(r, d_opt, d_mech), d_opt, d_mech);
}

void check_tail(const JointDensityMatrix& s, const char* where) {
    if (s.tail_mass() >= s.tail_tol)
        throw TruncationError(std::string(where) +
                              ": truncation tail mass exceeds tolerance");
}

double mean_n_opt(const Mat& r, const Eigen::VectorXd& nopt) {
    return (r.diagonal().real().array() * nopt.array()).sum();
}

struct Rhs {
    Interaction kind;
    int d_opt, d_mech;
    double G, kappa, kappa_ex, gamma, nbath, eta;
    bool conditioned;
    Eigen::VectorXd nopt, nmech, bbdag;

    Rhs(const OracleParams& p, int d_opt_, int d_mech_, bool conditioned_)
        : kind(p.kind), d_opt(d_opt_), d_mech(d_mech_),
          G(p.rates.coupling), kappa(p.rates.kappa()),
          kappa_ex(p.rates.kappa_ex), gamma(p.rates.gamma),
          nbath(p.rates.bath_occupation), eta(p.eta),
          conditioned(conditioned_),
          nopt(number_diag_opt(d_opt_, d_mech_)),
          nmech(number_diag_mech(d_opt_, d_mech_)),
          bbdag(bbdag_diag_mech(d_opt_, d_mech_)) {}

    // returns d(rho)/dt; also writes the instantaneous <a+a> for the
    // record-probability quadrature
    Mat operator()(const Mat& r, double& n_opt_out) const {
        const complex<double> i(0.0, 1.0);
        const double eta_eff = conditioned ? eta : 0.0;
        Mat d = -i * G *
                (h_times(r, kind, d_opt, d_mech) -
                 times_h(r, kind, d_opt, d_mech));

        const double ra = 2.0 * (kappa - eta_eff * kappa_ex);
        if (ra != 0.0) {
            Mat ar = a_left(r, d_opt, d_mech);
            d += ra * adag_right(ar, d_opt, d_mech);
            d -= 0.5 * ra * (nopt.asDiagonal() * r + r * nopt.asDiagonal());
        }
        if (gamma != 0.0) {
            const double rdown = 2.0 * gamma * (nbath + 1.0);
            Mat br = b_left(r, d_opt, d_mech);
            d += rdown * bdag_right(br, d_opt, d_mech);
            d -= 0.5 * rdown * (nmech.asDiagonal() * r + r * nmech.asDiagonal());
            if (nbath > 0.0) {
                const double rup = 2.0 * gamma * nbath;
                Mat bdr = bdag_left(r, d_opt, d_mech);
                d += rup * b_right(bdr, d_opt, d_mech);
                d -= 0.5 * rup *
                     (bbdag.asDiagonal() * r + r * bbdag.asDiagonal());
            }
        }
        n_opt_out = mean_n_opt(r, nopt);
        if (conditioned && eta * kappa_ex > 0.0) {
            d -= eta * kappa_ex *
                 (nopt.asDiagonal() * r + r * nopt.asDiagonal() -
                  2.0 * n_opt_out * r);
        }
        return d;
    }
};

// fixed-step RK4 on (rho, accumulated 2*eta*kappa_ex*int <a+a> dt)
void rk4_run(const Rhs& rhs, Mat& r, double& record_integral, double duration,
             double dt, double eta_kex2) {
    const auto steps = static_cast<std::int64_t>(std::ceil(duration / dt));
    const double h = duration / static_cast<double>(steps);
    for (std::int64_t s = 0; s < steps; ++s) {
        double n1, n2, n3, n4;
        const Mat k1 = rhs(r, n1);
        const Mat k2 = rhs(r + 0.5 * h * k1, n2);
        const Mat k3 = rhs(r + 0.5 * h * k2, n3);
        const Mat k4 = rhs(r + h * k3, n4);
        r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        record_integral +=
            eta_kex2 * (h / 6.0) * (n1 + 2.0 * n2 + 2.0 * n3 + n4);
    }
}

JointDensityMatrix evolve_impl(const JointDensityMatrix& state,
                               const OracleParams& params, double duration,
                               double dt, bool conditioned,
                               double* log_record_probability) {
    params.validate();
    if (!(duration >= 0.0) || !(dt > 0.0))
        throw DomainError("evolve: need duration >= 0 and dt > 0");
    const Rhs rhs(params, state.d_opt, state.d_mech, conditioned);
    const double eta_kex2 =
        conditioned ? 2.0 * params.eta * params.rates.kappa_ex : 0.0;

    JointDensityMatrix out = state;
    double record = 0.0;
    double step = dt;
    for (int halving = 0;; ++halving) {
        out.rho = state.rho;
        record = 0.0;
        rk4_run(rhs, out.rho, record, duration, step, eta_kex2);
        const double drift = std::abs(out.trace() - 1.0);
        if (drift < 1e-9 * std::max(duration, 1.0)) break;
        if (halving >= 10)
            throw StepSizeError("evolve: trace drift persists after halving");
        step *= 0.5;
    }
    check_tail(out, "evolve");
    if (log_record_probability) *log_record_probability = -record;
    return out;
}

} // namespace

Eigen::VectorXd JointDensityMatrix::optical_populations() const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(d_opt);
    for (int no = 0; no < d_opt; ++no)
        p[no] = rho.diagonal().segment(no * d_mech, d_mech).real().sum();
    return p;
}

Eigen::VectorXd JointDensityMatrix::mechanical_populations() const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(d_mech);
    for (int no = 0; no < d_opt; ++no)
        for (int m = 0; m < d_mech; ++m)
            p[m] += rho(index(no, m), index(no, m)).real();
    return p;
}

double JointDensityMatrix::optical_mean() const {
    const auto p = optical_populations();
    double s = 0.0;
    for (int no = 0; no < d_opt; ++no) s += no * p[no];
    return s;
}

double JointDensityMatrix::mechanical_mean() const {
    const auto p = mechanical_populations();
    double s = 0.0;
    for (int m = 0; m < d_mech; ++m) s += m * p[m];
    return s;
}

double JointDensityMatrix::tail_mass() const {
    const auto po = optical_populations();
    const auto pm = mechanical_populations();
    const int ko = std::max(1, d_opt / 10);
    const int km = std::max(1, d_mech / 10);
    return std::max(po.tail(ko).sum(), pm.tail(km).sum());
}

JointDensityMatrix thermal_product_state(double nbar, int d_opt, int d_mech,
                                         double tail_tol) {
    if (nbar < 0.0) throw DomainError("thermal_product_state: nbar < 0");
    if (d_opt < 2 || d_mech < 2)
        throw DomainError("thermal_product_state: dimensions must be >= 2");
    if (nbar > 0.0) {
        const double tail =
            std::pow(nbar / (1.0 + nbar), static_cast<double>(d_mech));
        if (tail >= tail_tol)
            throw TruncationError(
                "thermal_product_state: geometric tail beyond d_mech exceeds "
                "tail_tol");
    }
    JointDensityMatrix s;
    s.d_opt = d_opt;
    s.d_mech = d_mech;
    s.tail_tol = tail_tol;
    s.rho = Mat::Zero(s.dim(), s.dim());
    double norm = 0.0;
    const double ratio = nbar > 0.0 ? nbar / (1.0 + nbar) : 0.0;
    double p = 1.0;
    for (int m = 0; m < d_mech; ++m) {
        s.rho(s.index(0, m), s.index(0, m)) = p;
        norm += p;
        p *= ratio;
    }
    s.rho /= norm;
    return s;
}

JointDensityMatrix apply_pulsed_unitary(const JointDensityMatrix& state,
                                        Interaction kind, double gtau) {
    if (gtau < 0.0) throw DomainError("apply_pulsed_unitary: gtau < 0");
    const int d_opt = state.d_opt, d_mech = state.d_mech;
    const complex<double> i(0.0, 1.0);

    // The truncated Hamiltonian block-diagonalizes over its conserved
    // quantity (n_opt + m for anti-Stokes, m - n_opt for Stokes); each block
    // is a real symmetric tridiagonal chain, exponentiated exactly.
    std::vector<Eigen::Triplet<complex<double>>> trips;
    auto add_sector = [&](const std::vector<int>& idx,
                          const std::vector<double>& coupling) {
        const int L = static_cast<int>(idx.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(L, L);
        for (int k = 0; k + 1 < L; ++k) T(k, k + 1) = T(k + 1, k) = coupling[k];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const Eigen::VectorXcd phases =
            (-i * gtau * es.eigenvalues().cast<complex<double>>().array())
                .exp();
        const Mat U = es.eigenvectors().cast<complex<double>>() *
                      phases.asDiagonal() *
                      es.eigenvectors().transpose().cast<complex<double>>();
        for (int r = 0; r < L; ++r)
            for (int c = 0; c < L; ++c)
                if (std::abs(U(r, c)) > 0.0)
                    trips.emplace_back(idx[r], idx[c], U(r, c));
    };

    if (kind == Interaction::antiStokes) {
        for (int N = 0; N <= d_opt + d_mech - 2; ++N) {
            std::vector<int> idx;
            std::vector<double> cpl;
            const int lo = std::max(0, N - d_mech + 1);
            const int hi = std::min(d_opt - 1, N);
            for (int no = lo; no <= hi; ++no) {
                idx.push_back(state.index(no, N - no));
                if (no < hi)
                    cpl.push_back(std::sqrt((no + 1.0) * (N - no)));
            }
            if (!idx.empty()) add_sector(idx, cpl);
        }
    } else {
        for (int delta = -(d_opt - 1); delta <= d_mech - 1; ++delta) {
            std::vector<int> idx;
            std::vector<double> cpl;
            const int lo = std::max(0, -delta);
            const int hi = std::min(d_opt - 1, d_mech - 1 - delta);
            for (int no = lo; no <= hi; ++no) {
                idx.push_back(state.index(no, no + delta));
                if (no < hi)
                    cpl.push_back(std::sqrt((no + 1.0) * (no + delta + 1.0)));
            }
            if (!idx.empty()) add_sector(idx, cpl);
        }
    }

    Sparse U(state.dim(), state.dim());
    U.setFromTriplets(trips.begin(), trips.end());
    JointDensityMatrix out = state;
    out.rho = U * state.rho * U.adjoint();
    check_tail(out, "apply_pulsed_unitary");
    return out;
}

JointDensityMatrix apply_loss(const JointDensityMatrix& state, double eta) {
    validate_efficiency(eta);
    if (eta == 1.0) return state;
    const int d_opt = state.d_opt, d_mech = state.d_mech;

    JointDensityMatrix out = state;
    out.rho = Mat::Zero(state.dim(), state.dim());
    for (int j = 0; j < d_opt; ++j) {
        // Kraus coefficient of |no-j><no|: sqrt(C(no,j) eta^(no-j) (1-eta)^j)
        std::vector<double> c(static_cast<std::size_t>(d_opt), 0.0);
        for (int no = j; no < d_opt; ++no) {
            const double lc = std::lgamma(no + 1.0) - std::lgamma(j + 1.0) -
                              std::lgamma(no - j + 1.0);
            double le = j * std::log1p(-eta);
            if (no > j) {
                if (eta == 0.0) continue;
                le += (no - j) * std::log(eta);
            }
            c[static_cast<std::size_t>(no)] = std::exp(0.5 * (lc + le));
        }
        Mat kr = Mat::Zero(state.dim(), state.dim());  // K_j rho
        for (int no = j; no < d_opt; ++no)
            kr.middleRows((no - j) * d_mech, d_mech) =
                c[static_cast<std::size_t>(no)] *
                state.rho.middleRows(no * d_mech, d_mech);
        for (int no = j; no < d_opt; ++no)
            out.rho.middleCols((no - j) * d_mech, d_mech) +=
                c[static_cast<std::size_t>(no)] *
                kr.middleCols(no * d_mech, d_mech);
    }
    return out;
}

std::pair<JointDensityMatrix, double>
project_photon_number(const JointDensityMatrix& state, int n) {
    if (n < 0 || n >= state.d_opt)
        throw DomainError("project_photon_number: n outside optical ladder");
    const int d_mech = state.d_mech;
    const Mat block = state.rho.block(n * d_mech, n * d_mech, d_mech, d_mech);
    const double prob = block.trace().real();
    if (prob < 1e-300)
        throw ZeroRateError("project_photon_number: outcome probability ~ 0");
    JointDensityMatrix out = state;
    out.rho = Mat::Zero(state.dim(), state.dim());
    out.rho.block(n * d_mech, n * d_mech, d_mech, d_mech) = block / prob;
    return {out, prob};
}

JointDensityMatrix evolve_unconditional(const JointDensityMatrix& state,
                                        const OracleParams& params,
                                        double duration, double dt) {
    return evolve_impl(state, params, duration, dt, false, nullptr);
}

std::pair<JointDensityMatrix, double>
evolve_conditioned_no_click(const JointDensityMatrix& state,
                            const OracleParams& params, double duration,
                            double dt) {
    double log_p0 = 0.0;
    auto out = evolve_impl(state, params, duration, dt, true, &log_p0);
    return {std::move(out), log_p0};
}

std::pair<JointDensityMatrix, double>
apply_click_jump_exact(const JointDensityMatrix& state) {
    const auto nopt = number_diag_opt(state.d_opt, state.d_mech);
    const double rate = mean_n_opt(state.rho, nopt);
    if (rate <= 1e-12)
        throw ZeroRateError("apply_click_jump_exact: <a+a> ~ 0");
    JointDensityMatrix out = state;
    out.rho = adag_right(a_left(state.rho, state.d_opt, state.d_mech),
                         state.d_opt, state.d_mech) /
              rate;
    return {std::move(out), rate};
}

MomentSet second_moments(const JointDensityMatrix& state) {
    const int d_opt = state.d_opt, d_mech = state.d_mech;
    const Mat& r = state.rho;
    MomentSet m;
    for (int no = 0; no < d_opt; ++no)
        for (int mm = 0; mm < d_mech; ++mm) {
            const int i = state.index(no, mm);
            const double pop = r(i, i).real();
            m.n_opt += no * pop;
            m.n_mech += mm * pop;
            // tr(A rho) = sum A_ij rho_ji over the sparse entries of A
            if (no + 1 < d_opt && mm >= 1)
                m.adag_b += std::sqrt((no + 1.0) * mm) *
                            r(i, state.index(no + 1, mm - 1));
            if (no >= 1 && mm >= 1)
                m.ab += std::sqrt(static_cast<double>(no) * mm) *
                        r(i, state.index(no - 1, mm - 1));
            if (no >= 2)
                m.aa += std::sqrt(no * (no - 1.0)) *
                        r(i, state.index(no - 2, mm));
            if (mm >= 2)
                m.bb += std::sqrt(mm * (mm - 1.0)) *
                        r(i, state.index(no, mm - 2));
            if (no >= 1)
                m.a += std::sqrt(static_cast<double>(no)) *
                       r(i, state.index(no - 1, mm));
            if (mm >= 1)
                m.b += std::sqrt(static_cast<double>(mm)) *
                       r(i, state.index(no, mm - 1));
        }
    return m;
}

void validate_state(const JointDensityMatrix& state, double hermiticity_tol,
                    double trace_tol, double positivity_tol) {
    const Mat& r = state.rho;
    if ((r - r.adjoint()).cwiseAbs().maxCoeff() > hermiticity_tol)
        throw DomainError("validate_state: not Hermitian");
    if (std::abs(state.trace() - 1.0) > trace_tol)
        throw DomainError("validate_state: trace != 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(r);
    if (es.eigenvalues().minCoeff() < -positivity_tol)
        throw DomainError("validate_state: negative eigenvalue");
    check_tail(state, "validate_state");
}

void write_binary(const JointDensityMatrix& state, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_binary: cannot open " + path);
    const std::uint32_t dims[2] = {static_cast<std::uint32_t>(state.d_opt),
                                   static_cast<std::uint32_t>(state.d_mech)};
    f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    // stored row-major
    for (int i = 0; i < state.dim(); ++i)
        for (int j = 0; j < state.dim(); ++j) {
            const complex<double> v = state.rho(i, j);
            f.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    if (!f) throw std::runtime_error("write_binary: write failed");
}

JointDensityMatrix read_binary(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_binary: cannot open " + path);
    std::uint32_t dims[2];
    f.read(reinterpret_cast<char*>(dims), sizeof(dims));
    JointDensityMatrix s;
    s.d_opt = static_cast<int>(dims[0]);
    s.d_mech = static_cast<int>(dims[1]);
    s.rho = Mat(s.dim(), s.dim());
    for (int i = 0; i < s.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j) {
            complex<double> v;
            f.read(reinterpret_cast<char*>(&v), sizeof(v));
            s.rho(i, j) = v;
        }
    if (!f) throw std::runtime_error("read_binary: truncated file");
    return s;
}

} // namespace zpc::fock
