#ifndef RISLOC_EVALUATION_HPP
#define RISLOC_EVALUATION_HPP

#include <vector>

#include "risloc/anm.hpp"
#include "risloc/codebook.hpp"
#include "risloc/types.hpp"

namespace risloc::evaluation
{

enum class DesignSource
{
    anm_estimate,
    beam_alignment,
    wide_beam,
};

/// Data-phase configuration: unit-norm MS combiner and unit-modulus RIS
/// phase profile.
struct ReceiverDesign
{
    CVector ms_combiner;
    CVector ris_profile;
    DesignSource source = DesignSource::anm_estimate;
};

struct SeConfig
{
    double coherence_length = 500.0; // T_c, symbols
    double training_length = 0.0;    // T_t, symbols
    double noise_variance = 1.0;
};

/// Mean squared wrap-aware difference of spatial frequencies.
double mse_frequency(const std::vector<double>& estimates,
                     const std::vector<double>& truths);

/// Combiner and RIS phases matched to the strongest estimated path.
ReceiverDesign design_receiver(const anm::EstimationResult& result,
                               Index num_ms, Index num_ris);

/// w^H H_RM diag(omega) H_BR f with the design's unit-modulus omega.
Complex beamforming_gain(const ReceiverDesign& design, const CMatrix& h_br,
                         const CMatrix& h_rm, const CVector& bs_beam);

/// ((T_c - T_t) / T_c) log2(1 + |g|^2 / sigma^2) where g uses the RIS
/// profile normalized to unit total power, omega / sqrt(N_R), the same
/// normalization as the constant-modulus training profiles.
double effective_se(const ReceiverDesign& design, const CMatrix& h_br,
                    const CMatrix& h_rm, const CVector& bs_beam,
                    const SeConfig& cfg);

/// Beam pair with the highest received power |Y[l, k]|; ties go to the
/// smallest l, then the smallest k.
ReceiverDesign benchmark_beam_alignment(const CMatrix& y,
                                        const codebook::Codebook& ms_codebook,
                                        const codebook::Codebook& ris_codebook);

/// Single least-squares wide beam per side covering the whole interval.
/// `ris_target` is the negated f_diff interval, as for the training profiles.
ReceiverDesign benchmark_wide_beam(const codebook::FrequencyInterval& ms_interval,
                                   const codebook::FrequencyInterval& ris_target,
                                   Index num_ms, Index num_ris);

struct PathTruth
{
    double aoa_freq = 0.0;  // sin(phi_RM)
    double diff_freq = 0.0; // f_diff
    Complex gain{0.0, 0.0}; // xi
};

struct Crlb
{
    double aoa = 0.0;
    double diff = 0.0;
};

/// Fisher information of the real parameters (x_l, f_l, Re xi_l, Im xi_l)
/// for every path under Y = sum_l xi_l a_l b_l^T + noise with white CN(0,
/// sigma^2) entries.
RMatrix fisher_information(const std::vector<PathTruth>& paths,
                           const CMatrix& combiners, const CMatrix& ris_profiles,
                           double noise_variance);

/// Inverse-FIM variances of the frequencies of every path, in path order.
/// Throws std::domain_error when the FIM is singular.
std::vector<Crlb> crlb_all_paths(const std::vector<PathTruth>& paths, const CMatrix& combiners,
                                 const CMatrix& ris_profiles, double noise_variance);

/// Bounds for paths[0] (LoS).
Crlb crlb_frequencies(const std::vector<PathTruth>& paths, const CMatrix& combiners,
                      const CMatrix& ris_profiles, double noise_variance);

} // namespace risloc::evaluation

#endif
