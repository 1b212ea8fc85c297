#ifndef RISLOC_CHANNEL_HPP
#define RISLOC_CHANNEL_HPP

#include <cstdint>
#include <vector>

#include "risloc/types.hpp"

namespace risloc::channel
{

struct UlaConfig
{
    Index num_elements = 1;
};

/// One propagation path: complex gain, departure angle (at the transmitting
/// array) and arrival angle (at the receiving array), in radians.
struct PathParams
{
    Complex gain{0.0, 0.0};
    double aod = 0.0;
    double aoa = 0.0;
};

/// RIS-MS channel. paths[0] is the LoS path.
struct MultipathChannel
{
    std::vector<PathParams> paths;
    UlaConfig tx_array; // RIS
    UlaConfig rx_array; // MS
};

/// Training configuration: BS beam f, MS combiners W (N_M x P, one beam per
/// column), RIS phase profiles (N_R x T, one profile per column) and the
/// per-entry noise variance of Z.
struct TrainingSetup
{
    CVector bs_beam;
    CMatrix ms_combiners;
    CMatrix ris_profiles;
    double noise_variance = 0.0;
    Complex pilot{1.0, 0.0};
};

/// Half-wavelength ULA response (1/sqrt(N)) exp(j pi n f), n = 0..N-1, at
/// spatial frequency f.
CVector steering(Index num_elements, double frequency);

/// Derivative of steering() with respect to the spatial frequency.
CVector steering_derivative(Index num_elements, double frequency);

/// steering() evaluated at sin(angle).
CVector ula_response(UlaConfig array, double angle);

/// sqrt(N_B N_R) rho alpha_R(phi) alpha_B(theta)^H, size N_R x N_B.
CMatrix bs_ris_channel(Complex rho, double theta_br, double phi_br,
                       UlaConfig bs, UlaConfig ris);

/// sqrt(N_R N_M) sum_l rho_l alpha_M(phi_l) alpha_R(theta_l)^H, size N_M x N_R.
CMatrix ris_ms_channel(const MultipathChannel& ch);

/// Spatial frequency of conj(alpha_R(theta_rm)) o alpha_R(phi_br), i.e.
/// wrap(sin(phi_br) - sin(theta_rm)) in [-1, 1).
double effective_frequency_diff(double theta_rm, double phi_br);

/// Noiseless W^H H_RM diag(omega_t) H_BR f s for every profile, P x T.
CMatrix noiseless_observation(const TrainingSetup& setup, const CMatrix& h_br,
                              const CMatrix& h_rm);

/// Same quantity through the Hadamard form, valid when the BS beam is the
/// BS-RIS steering vector alpha_B(theta_br):
/// sqrt(N_B N_R) rho_br [W^H H_RM (omega_t o alpha_R(phi_br))]_t.
CMatrix noiseless_observation_hadamard(const TrainingSetup& setup,
                                       Complex rho_br, double phi_br,
                                       Index num_bs, const CMatrix& h_rm);

/// Noiseless observation plus W^H Z, with Z (N_M x T) i.i.d. CN(0, sigma^2).
/// Bitwise reproducible for a fixed seed.
CMatrix training_observation(const TrainingSetup& setup, const CMatrix& h_br,
                             const CMatrix& h_rm, std::uint64_t seed);

/// Draws an (rows x cols) matrix of i.i.d. CN(0, variance) entries.
CMatrix complex_gaussian(Index rows, Index cols, double variance,
                         std::uint64_t seed);

} // namespace risloc::channel

#endif
