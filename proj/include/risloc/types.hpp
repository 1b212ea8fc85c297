#ifndef RISLOC_TYPES_HPP
#define RISLOC_TYPES_HPP

#include <complex>
#include <numbers>

#include <Eigen/Core>

namespace risloc
{

using Complex = std::complex<double>;
using Index   = Eigen::Index;

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kJ{0.0, 1.0};

/// Wraps a spatial frequency into [-1, 1). Steering vectors are 2-periodic in
/// spatial frequency, so this is the canonical representative.
double wrap_frequency(double f) noexcept;

} // namespace risloc

#endif
