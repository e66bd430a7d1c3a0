///
/// \file types.hpp
///
/// Dense type aliases shared by every module. All numerical code is
/// templated on the real scalar type `Real`; signals and lifted matrices are
/// complex-valued.
///
#ifndef WLI_TYPES_HPP
#define WLI_TYPES_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace wli
{

using Index = Eigen::Index;

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using ComplexMatrix =
    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

///
/// Raised when a computation is well-posed on paper but numerically
/// meaningless (singular Gram matrices, singular normal equations, ...).
/// Precondition violations throw `std::invalid_argument` instead.
///
class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace wli

#endif /* WLI_TYPES_HPP */
