#ifndef RISLOC_ANM_HPP
#define RISLOC_ANM_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "risloc/types.hpp"

namespace risloc::anm
{

/// Solver settings for the regularized atomic-norm denoising program
///
///   min (mu / 2T) Tr(Z) + (mu / 2N) Tr(Toep(u)) + 1/2 ||Y - A U||_F^2
///   s.t. [[Toep(u), U], [U^H, Z]] >= 0
///
/// where A is the N-column sensing matrix and U has T columns.
struct AnmConfig
{
    /// Regularization weight; std::nullopt selects select_mu() from
    /// noise_std, scaled by mu_scale.
    std::optional<double> mu;
    double mu_scale = 1.0;
    /// Standard deviation of the (complex) noise on each entry of Y.
    double noise_std = 0.0;

    double solver_tolerance = 1e-4;
    int max_iterations = 20000;
    double admm_penalty = 1.0;
};

struct Residuals
{
    double primal = 0.0;
    double dual = 0.0;
};

struct AnmSolution
{
    CVector toeplitz_generator; // first row of Toep(u)
    CMatrix auxiliary_block;    // Z
    CMatrix denoised;           // U
    double objective = 0.0;
    double mu = 0.0;
    int iterations = 0;
    Residuals residuals;
};

/// Thrown when the solver exhausts its iteration budget.
class AnmError : public std::runtime_error
{
public:
    AnmError(const std::string& what, Residuals r, int iterations)
        : std::runtime_error(what), residuals_(r), iterations_(iterations)
    {
    }
    [[nodiscard]] Residuals residuals() const noexcept { return residuals_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

private:
    Residuals residuals_;
    int iterations_;
};

/// Hermitian Toeplitz matrix whose first row is u.
CMatrix toeplitz(const CVector& u);

/// Solves the program above by ADMM with a PSD projection on the stacked
/// block. `sensing` is the (rows of Y) x N measurement operator.
AnmSolution regularized_denoise(const CMatrix& y, const CMatrix& sensing,
                                double mu, const AnmConfig& cfg);

/// Objective value of the program for a candidate (u, Z, U).
double anm_objective(const CMatrix& y, const CMatrix& sensing, double mu,
                     const CVector& u, const CMatrix& z, const CMatrix& u_mat);

/// mu = noise_std * sqrt(N T log N); for noise_std == 0 a tiny fraction of
/// ||Y||_F keeps the program strictly regularized.
double select_mu(double noise_std, Index signal_dim, Index snapshots,
                 double y_norm);

struct FrequencyExtraction
{
    std::vector<double> frequencies; // sorted ascending, in [-1, 1)
    RVector eigenvalues;             // of Toep(u), descending
    bool degenerate = false;         // rank < L or no spectral gap
};

/// All roots of sum_j coefficients[j] z^j (Aberth-Ehrlich iteration).
/// Vanishing leading coefficients lower the degree.
CVector polynomial_roots(const CVector& coefficients);

/// Frequencies of the Vandermonde decomposition of Toep(u) by rooting the
/// noise-subspace polynomial and keeping the L roots closest to the unit
/// circle.
FrequencyExtraction extract_frequencies(const CVector& u, Index num_paths);

struct EstimationResult
{
    std::vector<double> aoa_freqs;  // sin(phi_hat) per path
    std::vector<double> diff_freqs; // f_diff per path
    std::vector<Complex> gains;     // xi per path
    double pairing_residual = 0.0;
    std::vector<double> candidate_residuals; // one per pairing tried
    bool degenerate = false;
    int iterations_aoa = 0;
    int iterations_diff = 0;

    [[nodiscard]] std::size_t num_paths() const noexcept { return aoa_freqs.size(); }
};

struct GainFit
{
    std::vector<Complex> gains;
    double residual = 0.0; // ||Y - model||_F
};

/// Least-squares gains xi_l in
///   Y ~ sum_l xi_l (W^H alpha_M(x_l)) (alpha_R(f_l)^T Omega) / sqrt(N_R).
/// Throws std::domain_error on a rank-deficient regression.
GainFit recover_gains(const CMatrix& y, const CMatrix& combiners,
                      const CMatrix& ris_profiles,
                      const std::vector<double>& aoa_freqs,
                      const std::vector<double>& diff_freqs);

/// Decoupled estimation for a LoS-only RIS-MS channel.
EstimationResult estimate_single_path(const CMatrix& y, const CMatrix& combiners,
                                      const CMatrix& ris_profiles,
                                      const AnmConfig& cfg);

/// Decoupled estimation of L paths with exhaustive pairing (L <= 6).
EstimationResult estimate_multipath(const CMatrix& y, const CMatrix& combiners,
                                    const CMatrix& ris_profiles, Index num_paths,
                                    const AnmConfig& cfg);

} // namespace risloc::anm

#endif
