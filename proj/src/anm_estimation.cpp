#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "risloc/anm.hpp"
#include "risloc/channel.hpp"

namespace risloc::anm
{

namespace
{

constexpr double kRankTol = 1e-6;
constexpr double kGapTol = 0.999;
constexpr double kDuplicateFreq = 1e-6;

double freq_distance(double a, double b) { return std::abs(wrap_frequency(a - b)); }

// Newton correction p(z) / p'(z). For |z| > 1 the reversed polynomial is
// evaluated at 1/z so that high degrees cannot overflow.
Complex newton_step(const CVector& c, Complex z)
{
    const Index deg = c.size() - 1;
    if (std::abs(z) <= 1.0)
    {
        Complex p = c(deg);
        Complex dp{0.0, 0.0};
        for (Index j = deg - 1; j >= 0; --j)
        {
            dp = dp * z + p;
            p = p * z + c(j);
        }
        return p / dp;
    }
    const Complex y = 1.0 / z;
    Complex q = c(0);
    Complex dq{0.0, 0.0};
    for (Index j = 1; j <= deg; ++j)
    {
        dq = dq * y + q;
        q = q * y + c(j);
    }
    return z / (static_cast<double>(deg) - y * dq / q);
}

} // namespace

CVector polynomial_roots(const CVector& coefficients)
{
    Index deg = coefficients.size() - 1;
    if (deg < 1)
    {
        return {};
    }
    const double scale = coefficients.cwiseAbs().maxCoeff();
    while (deg > 0 && std::abs(coefficients(deg)) <= 1e-14 * scale)
    {
        --deg;
    }
    Index low = 0;
    while (low < deg && std::abs(coefficients(low)) <= 1e-14 * scale)
    {
        ++low;
    }
    // zero roots from vanishing low-order coefficients
    CVector roots = CVector::Zero(deg);
    const Index n = deg - low;
    if (n < 1)
    {
        return roots;
    }
    const CVector c = coefficients.segment(low, n + 1) / coefficients(deg);

    // Aberth-Ehrlich iteration, Gauss-Seidel ordering
    const double radius = std::pow(std::abs(c(0)), 1.0 / static_cast<double>(n));
    CVector z(n);
    for (Index i = 0; i < n; ++i)
    {
        z(i) = std::polar(radius > 0.0 ? radius : 1.0,
                          2.0 * kPi * static_cast<double>(i) / static_cast<double>(n) + 0.4);
    }
    std::vector<bool> done(static_cast<std::size_t>(n), false);
    for (int sweep = 0; sweep < 500; ++sweep)
    {
        bool all_done = true;
        for (Index i = 0; i < n; ++i)
        {
            if (done[static_cast<std::size_t>(i)])
            {
                continue;
            }
            const Complex ratio = newton_step(c, z(i));
            Complex repulsion{0.0, 0.0};
            for (Index j = 0; j < n; ++j)
            {
                if (j != i)
                {
                    repulsion += 1.0 / (z(i) - z(j));
                }
            }
            const Complex w = ratio / (1.0 - ratio * repulsion);
            z(i) -= w;
            if (std::abs(w) <= 1e-14 * std::max(1.0, std::abs(z(i))) || !std::isfinite(std::abs(z(i))))
            {
                done[static_cast<std::size_t>(i)] = true;
            }
            else
            {
                all_done = false;
            }
        }
        if (all_done)
        {
            break;
        }
    }
    roots.segment(low, n) = z;
    return roots;
}

FrequencyExtraction extract_frequencies(const CVector& u, Index num_paths)
{
    const Index n = u.size();
    if (num_paths < 1 || num_paths >= n)
    {
        throw std::invalid_argument("extract_frequencies: need 1 <= L < dim(Toep(u))");
    }

    Eigen::SelfAdjointEigenSolver<CMatrix> eig(toeplitz(u));
    FrequencyExtraction out;
    out.eigenvalues = eig.eigenvalues().reverse();

    const RVector& ev = out.eigenvalues;
    const double top = std::max(ev(0), 0.0);
    const double lam_l = ev(num_paths - 1);
    const double lam_next = ev(num_paths);
    out.degenerate = !(top > 0.0) || lam_l <= kRankTol * top ||
                     lam_next >= kGapTol * lam_l;

    // noise subspace: the n - L eigenvectors of the smallest eigenvalues
    // (SelfAdjointEigenSolver sorts ascending)
    const CMatrix en = eig.eigenvectors().leftCols(n - num_paths);
    const CMatrix proj = en * en.adjoint();

    // p(z) z^{n-1} with p(z) = sum_k c_k z^k, c_k = sum of the k-th diagonal
    CVector coeffs = CVector::Zero(2 * n - 1);
    for (Index r = 0; r < n; ++r)
    {
        for (Index c = 0; c < n; ++c)
        {
            coeffs(c - r + n - 1) += proj(r, c);
        }
    }
    const CVector roots = polynomial_roots(coeffs);

    struct Candidate
    {
        double dist;
        double freq;
    };
    std::vector<Candidate> inside;
    std::vector<Candidate> outside;
    for (Index i = 0; i < roots.size(); ++i)
    {
        const double mag = std::abs(roots(i));
        Candidate c{std::abs(mag - 1.0), wrap_frequency(std::arg(roots(i)) / kPi)};
        (mag <= 1.0 + 1e-6 ? inside : outside).push_back(c);
    }
    const auto by_dist = [](const Candidate& a, const Candidate& b) {
        return a.dist < b.dist || (a.dist == b.dist && a.freq < b.freq);
    };
    std::sort(inside.begin(), inside.end(), by_dist);
    std::sort(outside.begin(), outside.end(), by_dist);
    inside.insert(inside.end(), outside.begin(), outside.end());

    for (const auto& c : inside)
    {
        if (static_cast<Index>(out.frequencies.size()) == num_paths)
        {
            break;
        }
        const bool dup = std::any_of(out.frequencies.begin(), out.frequencies.end(),
                                     [&](double f) { return freq_distance(f, c.freq) < kDuplicateFreq; });
        if (!dup)
        {
            out.frequencies.push_back(c.freq);
        }
    }
    if (static_cast<Index>(out.frequencies.size()) < num_paths)
    {
        out.degenerate = true;
        while (static_cast<Index>(out.frequencies.size()) < num_paths)
        {
            out.frequencies.push_back(out.frequencies.empty() ? 0.0 : out.frequencies.back());
        }
    }
    std::sort(out.frequencies.begin(), out.frequencies.end());
    return out;
}

GainFit recover_gains(const CMatrix& y, const CMatrix& combiners,
                      const CMatrix& ris_profiles,
                      const std::vector<double>& aoa_freqs,
                      const std::vector<double>& diff_freqs)
{
    if (aoa_freqs.size() != diff_freqs.size() || aoa_freqs.empty())
    {
        throw std::invalid_argument("recover_gains: frequency lists must be non-empty and equal length");
    }
    const auto paths = static_cast<Index>(aoa_freqs.size());
    const Index n_m = combiners.rows();
    const Index n_r = ris_profiles.rows();
    const Index rows = y.rows();
    const Index cols = y.cols();
    const double ris_scale = 1.0 / std::sqrt(static_cast<double>(n_r));

    CMatrix design(rows * cols, paths);
    for (Index l = 0; l < paths; ++l)
    {
        const CVector left = combiners.adjoint() * channel::steering(n_m, aoa_freqs[l]);
        const CVector right = ris_profiles.transpose() * channel::steering(n_r, diff_freqs[l]) * ris_scale;
        const CMatrix outer = left * right.transpose();
        design.col(l) = outer.reshaped();
    }
    const CVector target = y.reshaped();

    Eigen::ColPivHouseholderQR<CMatrix> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < paths)
    {
        throw std::domain_error("recover_gains: rank-deficient regression");
    }
    const CVector xi = qr.solve(target);

    GainFit fit;
    fit.gains.assign(xi.data(), xi.data() + xi.size());
    fit.residual = (target - design * xi).norm();
    return fit;
}

namespace
{

double resolve_mu(const AnmConfig& cfg, Index signal_dim, Index snapshots, double y_norm)
{
    if (cfg.mu)
    {
        return *cfg.mu;
    }
    return cfg.mu_scale * select_mu(cfg.noise_std, signal_dim, snapshots, y_norm);
}

struct Decoupled
{
    FrequencyExtraction aoa;
    FrequencyExtraction diff;
    int iterations_aoa = 0;
    int iterations_diff = 0;
};

Decoupled decoupled_anm(const CMatrix& y, const CMatrix& combiners,
                        const CMatrix& ris_profiles, Index num_paths,
                        const AnmConfig& cfg)
{
    if (y.rows() != combiners.cols() || y.cols() != ris_profiles.cols())
    {
        throw std::invalid_argument("decoupled ANM: observation/beam dimension mismatch");
    }
    const double y_norm = y.norm();
    Decoupled d;

    // receive side: Y = W^H U, atoms in C^{N_M}, T columns
    const CMatrix sensing_aoa = combiners.adjoint();
    const AnmSolution s_aoa = regularized_denoise(
        y, sensing_aoa, resolve_mu(cfg, combiners.rows(), y.cols(), y_norm), cfg);
    d.aoa = extract_frequencies(s_aoa.toeplitz_generator, num_paths);
    d.iterations_aoa = s_aoa.iterations;

    // RIS side: Y^T = Omega^T V, atoms in C^{N_R}, P columns
    const CMatrix yt = y.transpose();
    const CMatrix sensing_diff = ris_profiles.transpose();
    const AnmSolution s_diff = regularized_denoise(
        yt, sensing_diff, resolve_mu(cfg, ris_profiles.rows(), y.rows(), y_norm), cfg);
    d.diff = extract_frequencies(s_diff.toeplitz_generator, num_paths);
    d.iterations_diff = s_diff.iterations;
    return d;
}

} // namespace

EstimationResult estimate_single_path(const CMatrix& y, const CMatrix& combiners,
                                      const CMatrix& ris_profiles,
                                      const AnmConfig& cfg)
{
    const Decoupled d = decoupled_anm(y, combiners, ris_profiles, 1, cfg);
    EstimationResult r;
    r.aoa_freqs = d.aoa.frequencies;
    r.diff_freqs = d.diff.frequencies;
    r.degenerate = d.aoa.degenerate || d.diff.degenerate;
    r.iterations_aoa = d.iterations_aoa;
    r.iterations_diff = d.iterations_diff;
    const GainFit fit = recover_gains(y, combiners, ris_profiles, r.aoa_freqs, r.diff_freqs);
    r.gains = fit.gains;
    r.pairing_residual = fit.residual;
    r.candidate_residuals = {fit.residual};
    return r;
}

EstimationResult estimate_multipath(const CMatrix& y, const CMatrix& combiners,
                                    const CMatrix& ris_profiles, Index num_paths,
                                    const AnmConfig& cfg)
{
    if (num_paths < 1 || num_paths > 6)
    {
        throw std::invalid_argument("estimate_multipath: need 1 <= L <= 6");
    }
    const Decoupled d = decoupled_anm(y, combiners, ris_profiles, num_paths, cfg);

    EstimationResult r;
    r.aoa_freqs = d.aoa.frequencies;
    r.degenerate = d.aoa.degenerate || d.diff.degenerate;
    r.iterations_aoa = d.iterations_aoa;
    r.iterations_diff = d.iterations_diff;

    std::vector<std::size_t> perm(static_cast<std::size_t>(num_paths));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_perm;
    do
    {
        std::vector<double> diffs(perm.size());
        for (std::size_t l = 0; l < perm.size(); ++l)
        {
            diffs[l] = d.diff.frequencies[perm[l]];
        }
        double residual = std::numeric_limits<double>::infinity();
        try
        {
            residual = recover_gains(y, combiners, ris_profiles, r.aoa_freqs, diffs).residual;
        }
        catch (const std::domain_error&)
        {
            // a collinear pairing can never win
        }
        r.candidate_residuals.push_back(residual);
        if (residual < best)
        {
            best = residual;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    if (best_perm.empty())
    {
        throw std::domain_error("estimate_multipath: every pairing is rank-deficient");
    }
    r.diff_freqs.resize(best_perm.size());
    for (std::size_t l = 0; l < best_perm.size(); ++l)
    {
        r.diff_freqs[l] = d.diff.frequencies[best_perm[l]];
    }
    const GainFit fit = recover_gains(y, combiners, ris_profiles, r.aoa_freqs, r.diff_freqs);
    r.gains = fit.gains;
    r.pairing_residual = fit.residual;
    return r;
}

} // namespace risloc::anm
