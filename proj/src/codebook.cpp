#include "risloc/codebook.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "risloc/channel.hpp"
#include "risloc/format.hpp"

namespace risloc::codebook
{

namespace
{

// ceil() that ignores rounding noise just above an integer
Index robust_ceil(double x)
{
    return static_cast<Index>(std::ceil(x - 1e-9));
}

void validate(const CodebookDesignSpec& spec)
{
    if (spec.num_antennas < 1 || spec.num_beams < 1)
    {
        throw std::invalid_argument("codebook: need num_antennas >= 1 and num_beams >= 1");
    }
    if (spec.effective_dictionary_size() <= spec.num_antennas)
    {
        throw std::invalid_argument("codebook: dictionary size must exceed num_antennas");
    }
    geometry::make_frequency_interval(spec.target.a, spec.target.b);
}

} // namespace

CMatrix build_dictionary(Index num_antennas, Index dictionary_size)
{
    if (dictionary_size <= num_antennas)
    {
        throw std::invalid_argument("build_dictionary: M must exceed num_antennas");
    }
    CMatrix a(num_antennas, dictionary_size);
    const double m = static_cast<double>(dictionary_size);
    for (Index i = 0; i < dictionary_size; ++i)
    {
        a.col(i) = channel::steering(num_antennas,
                                     -1.0 + (2.0 * static_cast<double>(i) + 1.0) / m);
    }
    return a;
}

Index ones_per_column(const CodebookDesignSpec& spec)
{
    const double m = static_cast<double>(spec.effective_dictionary_size());
    return robust_ceil(spec.target.width() * m /
                       (2.0 * static_cast<double>(spec.num_beams)));
}

RMatrix selection_matrix(const CodebookDesignSpec& spec)
{
    validate(spec);
    const Index m = spec.effective_dictionary_size();
    const Index q = ones_per_column(spec);
    if (q <= 0)
    {
        throw std::invalid_argument("selection_matrix: empty target band");
    }
    // 1-based start row, floored at 1 for a = -1
    const Index start_1 =
        std::max<Index>(1, robust_ceil((spec.target.a + 1.0) * static_cast<double>(m) / 2.0));
    const Index start = start_1 - 1;

    RMatrix g = RMatrix::Zero(m, spec.num_beams);
    for (Index c = 0; c < spec.num_beams; ++c)
    {
        for (Index k = 0; k < q; ++k)
        {
            g((start + c * q + k) % m, c) = 1.0;
        }
    }
    return g;
}

CMatrix pseudo_inverse(const CMatrix& a, double rel_cutoff)
{
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    const double cutoff = s.size() > 0 ? rel_cutoff * s(0) : 0.0;
    RVector inv = RVector::Zero(s.size());
    for (Index i = 0; i < s.size(); ++i)
    {
        if (s(i) > cutoff)
        {
            inv(i) = 1.0 / s(i);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

CMatrix project_constant_modulus(const CMatrix& beams)
{
    const double mag = 1.0 / std::sqrt(static_cast<double>(beams.rows()));
    CMatrix out(beams.rows(), beams.cols());
    for (Index c = 0; c < beams.cols(); ++c)
    {
        for (Index r = 0; r < beams.rows(); ++r)
        {
            const Complex x = beams(r, c);
            out(r, c) = (x == Complex(0.0, 0.0)) ? Complex(mag, 0.0)
                                                  : std::polar(mag, std::arg(x));
        }
    }
    return out;
}

Codebook design_codebook(const CodebookDesignSpec& spec)
{
    const RMatrix g = selection_matrix(spec);
    const CMatrix a = build_dictionary(spec.num_antennas, spec.effective_dictionary_size());

    CMatrix f = pseudo_inverse(a.adjoint()) * g.cast<Complex>();
    for (Index c = 0; c < f.cols(); ++c)
    {
        const double n = f.col(c).norm();
        if (n > 0.0)
        {
            f.col(c) /= n;
        }
    }

    Codebook cb;
    cb.beams = spec.constant_modulus ? project_constant_modulus(f) : std::move(f);
    cb.covered = spec.target;
    cb.per_beam_width = spec.target.width() / static_cast<double>(spec.num_beams);
    cb.constant_modulus = spec.constant_modulus;
    return cb;
}

RVector pattern_grid(Index grid_size)
{
    RVector f(grid_size);
    for (Index g = 0; g < grid_size; ++g)
    {
        f(g) = -1.0 + 2.0 * static_cast<double>(g) / static_cast<double>(grid_size);
    }
    return f;
}

RMatrix gain_pattern(const Codebook& codebook, Index grid_size)
{
    if (grid_size < 2)
    {
        throw std::invalid_argument("gain_pattern: grid_size must be >= 2");
    }
    const RVector grid = pattern_grid(grid_size);
    CMatrix steer(codebook.num_antennas(), grid_size);
    for (Index g = 0; g < grid_size; ++g)
    {
        steer.col(g) = channel::steering(codebook.num_antennas(), grid(g));
    }
    return (codebook.beams.adjoint() * steer).cwiseAbs2();
}

void write_csv(const Codebook& codebook, std::ostream& os)
{
    for (Index c = 0; c < codebook.size(); ++c)
    {
        os << (c ? "," : "") << "beam" << c << "_re,beam" << c << "_im";
    }
    os << '\n';
    for (Index r = 0; r < codebook.num_antennas(); ++r)
    {
        for (Index c = 0; c < codebook.size(); ++c)
        {
            os << (c ? "," : "") << format_double(codebook.beams(r, c).real()) << ','
               << format_double(codebook.beams(r, c).imag());
        }
        os << '\n';
    }
}

CMatrix read_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
    {
        throw std::runtime_error("codebook csv: missing header");
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line))
    {
        if (line.empty())
        {
            continue;
        }
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
        {
            vals.push_back(std::stod(cell));
        }
        if (vals.size() % 2 != 0 || (!rows.empty() && vals.size() != rows.front().size()))
        {
            throw std::runtime_error("codebook csv: ragged row");
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty())
    {
        return {};
    }
    const auto n_rows = static_cast<Index>(rows.size());
    const auto n_cols = static_cast<Index>(rows.front().size() / 2);
    CMatrix out(n_rows, n_cols);
    for (Index r = 0; r < n_rows; ++r)
    {
        for (Index c = 0; c < n_cols; ++c)
        {
            out(r, c) = Complex(rows[r][2 * c], rows[r][2 * c + 1]);
        }
    }
    return out;
}

} // namespace risloc::codebook
