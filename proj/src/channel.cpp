#include "risloc/channel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace risloc::channel
{

CVector steering(Index num_elements, double frequency)
{
    CVector a(num_elements);
    const double scale = 1.0 / std::sqrt(static_cast<double>(num_elements));
    for (Index n = 0; n < num_elements; ++n)
    {
        a(n) = scale * std::exp(kJ * (kPi * static_cast<double>(n) * frequency));
    }
    return a;
}

CVector steering_derivative(Index num_elements, double frequency)
{
    CVector d = steering(num_elements, frequency);
    for (Index n = 0; n < num_elements; ++n)
    {
        d(n) *= kJ * (kPi * static_cast<double>(n));
    }
    return d;
}

CVector ula_response(UlaConfig array, double angle)
{
    return steering(array.num_elements, std::sin(angle));
}

CMatrix bs_ris_channel(Complex rho, double theta_br, double phi_br,
                       UlaConfig bs, UlaConfig ris)
{
    const double scale = std::sqrt(static_cast<double>(bs.num_elements * ris.num_elements));
    return (scale * rho) * ula_response(ris, phi_br) *
           ula_response(bs, theta_br).adjoint();
}

CMatrix ris_ms_channel(const MultipathChannel& ch)
{
    const Index n_r = ch.tx_array.num_elements;
    const Index n_m = ch.rx_array.num_elements;
    const double scale = std::sqrt(static_cast<double>(n_r * n_m));
    CMatrix h = CMatrix::Zero(n_m, n_r);
    for (const auto& p : ch.paths)
    {
        h.noalias() += (scale * p.gain) * ula_response(ch.rx_array, p.aoa) *
                       ula_response(ch.tx_array, p.aod).adjoint();
    }
    return h;
}

double effective_frequency_diff(double theta_rm, double phi_br)
{
    return wrap_frequency(std::sin(phi_br) - std::sin(theta_rm));
}

namespace
{

void check_dimensions(const TrainingSetup& setup, const CMatrix& h_br,
                      const CMatrix& h_rm)
{
    const Index n_b = setup.bs_beam.size();
    const Index n_r = setup.ris_profiles.rows();
    const Index n_m = setup.ms_combiners.rows();
    if (h_br.rows() != n_r || h_br.cols() != n_b || h_rm.rows() != n_m ||
        h_rm.cols() != n_r)
    {
        throw std::invalid_argument("training_observation: dimension mismatch");
    }
    if (setup.ms_combiners.cols() < 1 || setup.ris_profiles.cols() < 1)
    {
        throw std::invalid_argument(
            "training_observation: need at least one combiner and profile");
    }
}

} // namespace

CMatrix noiseless_observation(const TrainingSetup& setup, const CMatrix& h_br,
                              const CMatrix& h_rm)
{
    check_dimensions(setup, h_br, h_rm);
    const CVector incident = h_br * setup.bs_beam * setup.pilot;
    const CMatrix combined = setup.ms_combiners.adjoint() * h_rm; // P x N_R
    const Index t_count = setup.ris_profiles.cols();
    CMatrix y(setup.ms_combiners.cols(), t_count);
    for (Index t = 0; t < t_count; ++t)
    {
        // diag(omega_t) applied as an entrywise product
        y.col(t) = combined * setup.ris_profiles.col(t).cwiseProduct(incident);
    }
    return y;
}

CMatrix noiseless_observation_hadamard(const TrainingSetup& setup,
                                       Complex rho_br, double phi_br,
                                       Index num_bs, const CMatrix& h_rm)
{
    const Index n_r = setup.ris_profiles.rows();
    const CVector a_r = ula_response({n_r}, phi_br);
    const double scale = std::sqrt(static_cast<double>(num_bs * n_r));
    CMatrix y(setup.ms_combiners.cols(), setup.ris_profiles.cols());
    for (Index t = 0; t < setup.ris_profiles.cols(); ++t)
    {
        y.col(t) = (scale * rho_br * setup.pilot) * setup.ms_combiners.adjoint() *
                   (h_rm * setup.ris_profiles.col(t).cwiseProduct(a_r));
    }
    return y;
}

CMatrix complex_gaussian(Index rows, Index cols, double variance,
                         std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    CMatrix z(rows, cols);
    // column-major fill order is part of the reproducibility contract
    for (Index c = 0; c < cols; ++c)
    {
        for (Index r = 0; r < rows; ++r)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            z(r, c) = Complex(re, im);
        }
    }
    return z;
}

CMatrix training_observation(const TrainingSetup& setup, const CMatrix& h_br,
                             const CMatrix& h_rm, std::uint64_t seed)
{
    CMatrix y = noiseless_observation(setup, h_br, h_rm);
    if (setup.noise_variance > 0.0)
    {
        const CMatrix z = complex_gaussian(setup.ms_combiners.rows(),
                                           setup.ris_profiles.cols(),
                                           setup.noise_variance, seed);
        y.noalias() += setup.ms_combiners.adjoint() * z;
    }
    return y;
}

} // namespace risloc::channel
