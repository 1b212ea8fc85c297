#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "risloc/anm.hpp"

namespace risloc::anm
{

CMatrix toeplitz(const CVector& u)
{
    const Index n = u.size();
    CMatrix t(n, n);
    for (Index r = 0; r < n; ++r)
    {
        for (Index c = 0; c < n; ++c)
        {
            t(r, c) = c >= r ? u(c - r) : std::conj(u(r - c));
        }
    }
    return t;
}

double anm_objective(const CMatrix& y, const CMatrix& sensing, double mu,
                     const CVector& u, const CMatrix& z, const CMatrix& u_mat)
{
    const double t = static_cast<double>(u_mat.cols());
    const double fit = (y - sensing * u_mat).squaredNorm();
    return mu / (2.0 * t) * z.trace().real() + 0.5 * mu * u(0).real() + 0.5 * fit;
}

double select_mu(double noise_std, Index signal_dim, Index snapshots, double y_norm)
{
    if (noise_std > 0.0)
    {
        const double n = static_cast<double>(signal_dim);
        const double t = static_cast<double>(snapshots);
        return noise_std * std::sqrt(n * t * std::log(std::max(n, 2.0)));
    }
    return std::max(1e-6 * y_norm, 1e-300);
}

namespace
{

// Projection of the (Hermitian part of the) block onto Toeplitz structure with
// the trace penalty folded into the main diagonal.
CVector toeplitz_prox(const CMatrix& m, double diag_shift)
{
    const Index n = m.rows();
    CVector u(n);
    for (Index k = 0; k < n; ++k)
    {
        Complex acc{0.0, 0.0};
        for (Index r = 0; r + k < n; ++r)
        {
            // average the k-th superdiagonal with the conjugated subdiagonal
            acc += 0.5 * (m(r, r + k) + std::conj(m(r + k, r)));
        }
        u(k) = acc / static_cast<double>(n - k);
    }
    u(0) = Complex(u(0).real() - diag_shift, 0.0);
    return u;
}

} // namespace

AnmSolution regularized_denoise(const CMatrix& y, const CMatrix& sensing,
                                double mu, const AnmConfig& cfg)
{
    const Index n = sensing.cols();
    const Index t = y.cols();
    if (sensing.rows() != y.rows())
    {
        throw std::invalid_argument("regularized_denoise: sensing/data row mismatch");
    }
    if (!(mu > 0.0))
    {
        throw std::invalid_argument("regularized_denoise: mu must be positive");
    }
    if (!(cfg.solver_tolerance > 0.0) || cfg.max_iterations < 1 || !(cfg.admm_penalty > 0.0))
    {
        throw std::invalid_argument("regularized_denoise: invalid solver settings");
    }

    AnmSolution sol;
    sol.mu = mu;
    const double scale = y.norm();
    if (scale == 0.0)
    {
        sol.toeplitz_generator = CVector::Zero(n);
        sol.auxiliary_block = CMatrix::Zero(t, t);
        sol.denoised = CMatrix::Zero(n, t);
        return sol;
    }

    // The program is positively homogeneous in (Y, mu); iterate on unit data.
    const CMatrix yn = y / scale;
    const double mun = mu / scale;
    const double nd = static_cast<double>(n);
    const double td = static_cast<double>(t);
    const Index dim = n + t;

    const CMatrix gram = sensing.adjoint() * sensing;
    const CMatrix rhs0 = sensing.adjoint() * yn;
    double rho = cfg.admm_penalty;
    Eigen::LLT<CMatrix> chol(gram + 2.0 * rho * CMatrix::Identity(n, n));

    CMatrix s = CMatrix::Zero(dim, dim);
    CMatrix lambda = CMatrix::Zero(dim, dim);
    CMatrix theta(dim, dim);
    CVector u(n);
    CMatrix u_mat(n, t);
    CMatrix z(t, t);

    Eigen::SelfAdjointEigenSolver<CMatrix> eig(dim);
    const double abs_tol = 1e-3 * cfg.solver_tolerance;

    int it = 0;
    Residuals res{};
    bool converged = false;
    for (; it < cfg.max_iterations && !converged; ++it)
    {
        u_mat = chol.solve(rhs0 + 2.0 * rho * s.topRightCorner(n, t) -
                           2.0 * lambda.topRightCorner(n, t));

        z = s.bottomRightCorner(t, t) - lambda.bottomRightCorner(t, t) / rho;
        z.diagonal().array() -= mun / (2.0 * td * rho);

        u = toeplitz_prox(s.topLeftCorner(n, n) - lambda.topLeftCorner(n, n) / rho,
                          mun / (2.0 * rho * nd));

        theta.topLeftCorner(n, n) = toeplitz(u);
        theta.topRightCorner(n, t) = u_mat;
        theta.bottomLeftCorner(t, n) = u_mat.adjoint();
        theta.bottomRightCorner(t, t) = 0.5 * (z + z.adjoint());

        CMatrix v = theta + lambda / rho;
        v = 0.5 * (v + v.adjoint()).eval();
        eig.compute(v);
        const RVector ev = eig.eigenvalues().cwiseMax(0.0);
        const CMatrix s_prev = s;
        s = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().adjoint();

        lambda += rho * (theta - s);

        res.primal = (theta - s).norm();
        res.dual = rho * (s - s_prev).norm();
        const double eps_pri = abs_tol + cfg.solver_tolerance * std::max(theta.norm(), s.norm());
        const double eps_dual = abs_tol + cfg.solver_tolerance * lambda.norm();
        converged = res.primal <= eps_pri && res.dual <= eps_dual;

        // residual balancing
        if (!converged && (it + 1) % 10 == 0)
        {
            double factor = 1.0;
            if (res.primal / eps_pri > 10.0 * res.dual / eps_dual)
            {
                factor = 2.0;
            }
            else if (res.dual / eps_dual > 10.0 * res.primal / eps_pri)
            {
                factor = 0.5;
            }
            if (factor != 1.0)
            {
                rho *= factor;
                chol.compute(gram + 2.0 * rho * CMatrix::Identity(n, n));
            }
        }
    }

    res.primal *= scale;
    res.dual *= scale;
    if (!converged)
    {
        throw AnmError("regularized_denoise: no convergence within iteration budget",
                       res, it);
    }

    sol.toeplitz_generator = u * scale;
    sol.auxiliary_block = theta.bottomRightCorner(t, t) * scale;
    sol.denoised = u_mat * scale;
    sol.iterations = it;
    sol.residuals = res;
    sol.objective = anm_objective(y, sensing, mu, sol.toeplitz_generator,
                                  sol.auxiliary_block, sol.denoised);
    return sol;
}

} // namespace risloc::anm
