#include "risloc/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "risloc/channel.hpp"

namespace risloc::evaluation
{

double mse_frequency(const std::vector<double>& estimates,
                     const std::vector<double>& truths)
{
    if (estimates.size() != truths.size())
    {
        throw std::invalid_argument("mse_frequency: length mismatch");
    }
    if (estimates.empty())
    {
        return 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i)
    {
        const double e = wrap_frequency(estimates[i] - truths[i]);
        acc += e * e;
    }
    return acc / static_cast<double>(estimates.size());
}

namespace
{

CVector phase_profile(Index num_ris, double diff_freq)
{
    CVector w(num_ris);
    for (Index n = 0; n < num_ris; ++n)
    {
        w(n) = std::exp(-kJ * (kPi * static_cast<double>(n) * diff_freq));
    }
    return w;
}

CVector unit_modulus(const CVector& v)
{
    CVector out(v.size());
    for (Index i = 0; i < v.size(); ++i)
    {
        out(i) = v(i) == Complex(0.0, 0.0) ? Complex(1.0, 0.0) : std::polar(1.0, std::arg(v(i)));
    }
    return out;
}

} // namespace

ReceiverDesign design_receiver(const anm::EstimationResult& result,
                               Index num_ms, Index num_ris)
{
    if (result.aoa_freqs.empty() || result.gains.size() != result.aoa_freqs.size() ||
        result.diff_freqs.size() != result.aoa_freqs.size())
    {
        throw std::invalid_argument("design_receiver: empty or inconsistent estimate");
    }
    std::size_t best = 0;
    for (std::size_t l = 1; l < result.gains.size(); ++l)
    {
        if (std::abs(result.gains[l]) > std::abs(result.gains[best]))
        {
            best = l;
        }
    }
    ReceiverDesign d;
    d.ms_combiner = channel::steering(num_ms, result.aoa_freqs[best]);
    d.ris_profile = phase_profile(num_ris, result.diff_freqs[best]);
    d.source = DesignSource::anm_estimate;
    return d;
}

Complex beamforming_gain(const ReceiverDesign& design, const CMatrix& h_br,
                         const CMatrix& h_rm, const CVector& bs_beam)
{
    const CVector incident = h_br * bs_beam;
    return design.ms_combiner.dot(h_rm * design.ris_profile.cwiseProduct(incident));
}

double effective_se(const ReceiverDesign& design, const CMatrix& h_br,
                    const CMatrix& h_rm, const CVector& bs_beam,
                    const SeConfig& cfg)
{
    if (cfg.coherence_length <= 0.0 || cfg.training_length >= cfg.coherence_length)
    {
        return 0.0;
    }
    const double n_r = static_cast<double>(design.ris_profile.size());
    const double power = std::norm(beamforming_gain(design, h_br, h_rm, bs_beam)) / n_r;
    const double frac = (cfg.coherence_length - cfg.training_length) / cfg.coherence_length;
    return frac * std::log2(1.0 + power / cfg.noise_variance);
}

ReceiverDesign benchmark_beam_alignment(const CMatrix& y,
                                        const codebook::Codebook& ms_codebook,
                                        const codebook::Codebook& ris_codebook)
{
    if (y.rows() != ms_codebook.size() || y.cols() != ris_codebook.size() || y.size() == 0)
    {
        throw std::invalid_argument("benchmark_beam_alignment: observation/codebook mismatch");
    }
    Index best_l = 0;
    Index best_k = 0;
    double best = -1.0;
    // column-major scan would break the row-first tie rule
    for (Index l = 0; l < y.rows(); ++l)
    {
        for (Index k = 0; k < y.cols(); ++k)
        {
            const double p = std::abs(y(l, k));
            if (p > best)
            {
                best = p;
                best_l = l;
                best_k = k;
            }
        }
    }
    ReceiverDesign d;
    d.ms_combiner = ms_codebook.beams.col(best_l).normalized();
    d.ris_profile = unit_modulus(ris_codebook.beams.col(best_k));
    d.source = DesignSource::beam_alignment;
    return d;
}

ReceiverDesign benchmark_wide_beam(const codebook::FrequencyInterval& ms_interval,
                                   const codebook::FrequencyInterval& ris_target,
                                   Index num_ms, Index num_ris)
{
    ReceiverDesign d;
    d.source = DesignSource::wide_beam;
    if (ms_interval.width() > 0.0)
    {
        d.ms_combiner = codebook::design_codebook({num_ms, 0, ms_interval, 1, false}).beams.col(0);
    }
    else
    {
        d.ms_combiner = channel::steering(num_ms, ms_interval.a);
    }
    if (ris_target.width() > 0.0)
    {
        d.ris_profile = unit_modulus(
            codebook::design_codebook({num_ris, 0, ris_target, 1, true}).beams.col(0));
    }
    else
    {
        // response alpha_R(f)^T omega peaks at f = -target
        d.ris_profile = phase_profile(num_ris, -ris_target.a);
    }
    return d;
}

RMatrix fisher_information(const std::vector<PathTruth>& paths,
                           const CMatrix& combiners, const CMatrix& ris_profiles,
                           double noise_variance)
{
    if (paths.empty() || !(noise_variance > 0.0))
    {
        throw std::invalid_argument("fisher_information: need paths and sigma^2 > 0");
    }
    const Index n_m = combiners.rows();
    const Index n_r = ris_profiles.rows();
    const double rs = 1.0 / std::sqrt(static_cast<double>(n_r));
    const Index entries = combiners.cols() * ris_profiles.cols();
    const auto num = static_cast<Index>(paths.size());

    CMatrix jac(entries, 4 * num);
    for (Index l = 0; l < num; ++l)
    {
        const PathTruth& p = paths[static_cast<std::size_t>(l)];
        const CVector a = combiners.adjoint() * channel::steering(n_m, p.aoa_freq);
        const CVector da = combiners.adjoint() * channel::steering_derivative(n_m, p.aoa_freq);
        const CVector b = rs * (ris_profiles.transpose() * channel::steering(n_r, p.diff_freq));
        const CVector db =
            rs * (ris_profiles.transpose() * channel::steering_derivative(n_r, p.diff_freq));
        const CMatrix ab = a * b.transpose();
        jac.col(4 * l) = (p.gain * da * b.transpose()).reshaped();
        jac.col(4 * l + 1) = (p.gain * a * db.transpose()).reshaped();
        jac.col(4 * l + 2) = ab.reshaped();
        jac.col(4 * l + 3) = (kJ * ab).reshaped();
    }
    return (2.0 / noise_variance) * (jac.adjoint() * jac).real();
}

std::vector<Crlb> crlb_all_paths(const std::vector<PathTruth>& paths, const CMatrix& combiners,
                                const CMatrix& ris_profiles, double noise_variance)
{
    const RMatrix fim = fisher_information(paths, combiners, ris_profiles, noise_variance);
    const RVector diag = fim.diagonal();
    if (!(diag.minCoeff() > 0.0))
    {
        throw std::domain_error("crlb_frequencies: singular Fisher information");
    }
    // unit-diagonal scaling so the rank test ignores parameter units
    const RVector s = diag.cwiseSqrt().cwiseInverse();
    const RMatrix scaled = s.asDiagonal() * fim * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(scaled);
    const RVector& ev = eig.eigenvalues();
    if (!(ev(0) > 1e-12 * ev(ev.size() - 1)))
    {
        throw std::domain_error("crlb_frequencies: singular Fisher information");
    }
    const RMatrix inv = s.asDiagonal() *
                        (eig.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                         eig.eigenvectors().transpose()) *
                        s.asDiagonal();
    std::vector<Crlb> out(paths.size());
    for (std::size_t l = 0; l < paths.size(); ++l)
    {
        const auto k = static_cast<Index>(4 * l);
        out[l] = {inv(k, k), inv(k + 1, k + 1)};
    }
    return out;
}

Crlb crlb_frequencies(const std::vector<PathTruth>& paths, const CMatrix& combiners,
                      const CMatrix& ris_profiles, double noise_variance)
{
    return crlb_all_paths(paths, combiners, ris_profiles, noise_variance).front();
}

} // namespace risloc::evaluation
