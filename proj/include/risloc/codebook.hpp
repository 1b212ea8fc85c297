#ifndef RISLOC_CODEBOOK_HPP
#define RISLOC_CODEBOOK_HPP

#include <iosfwd>

#include "risloc/geometry.hpp"
#include "risloc/types.hpp"

namespace risloc::codebook
{

using geometry::FrequencyInterval;

struct CodebookDesignSpec
{
    Index num_antennas = 1;
    Index dictionary_size = 0; // M; 0 selects the default 4 * num_antennas
    FrequencyInterval target{-1.0, 1.0};
    Index num_beams = 1;
    bool constant_modulus = false;

    [[nodiscard]] Index effective_dictionary_size() const noexcept
    {
        return dictionary_size > 0 ? dictionary_size : 4 * num_antennas;
    }
};

/// Bank of training beams, one unit-norm beam per column.
struct Codebook
{
    CMatrix beams;
    FrequencyInterval covered;
    double per_beam_width = 0.0;
    bool constant_modulus = false;

    [[nodiscard]] Index num_antennas() const noexcept { return beams.rows(); }
    [[nodiscard]] Index size() const noexcept { return beams.cols(); }
};

/// Over-complete steering dictionary, column i at -1 + (2i + 1) / M.
CMatrix build_dictionary(Index num_antennas, Index dictionary_size);

/// Number of ones per column of the selection matrix, ceil((b - a) M / (2 N)).
Index ones_per_column(const CodebookDesignSpec& spec);

/// Binary M x N matrix with contiguous, circularly shifted blocks of ones;
/// column c covers dictionary rows [start + c q, start + (c + 1) q) mod M.
RMatrix selection_matrix(const CodebookDesignSpec& spec);

/// Least-squares beams solving A^H F = G, scaled to unit-norm columns and
/// optionally projected onto the constant-modulus set.
Codebook design_codebook(const CodebookDesignSpec& spec);

/// Entrywise (1/sqrt(N)) exp(j arg(x)); zero entries map to phase 0.
CMatrix project_constant_modulus(const CMatrix& beams);

/// Moore-Penrose pseudo-inverse via SVD with a relative singular-value cutoff.
CMatrix pseudo_inverse(const CMatrix& a, double rel_cutoff = 1e-12);

/// Grid frequency g = -1 + 2 g / grid_size, g = 0..grid_size-1.
RVector pattern_grid(Index grid_size);

/// |alpha(f)^H beam|^2 for each beam (rows) over pattern_grid (columns).
RMatrix gain_pattern(const Codebook& codebook, Index grid_size);

/// CSV with one row per antenna and an (re, im) column pair per beam.
void write_csv(const Codebook& codebook, std::ostream& os);
CMatrix read_csv(std::istream& is);

} // namespace risloc::codebook

#endif
