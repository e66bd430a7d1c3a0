///
/// \file weight_pair.hpp
///
/// Left/right weight matrices (W_L, W_R) acting on a lifted matrix as
/// W_L M W_R^H. Diagonal weights keep their diagonals as real vectors so the
/// product costs O(d1 d2).
///
#ifndef WLI_WEIGHT_PAIR_HPP
#define WLI_WEIGHT_PAIR_HPP

#include <cmath>

#include <wli/types.hpp>

namespace wli
{

template <typename Real = double>
class WeightPair
{
public:
    WeightPair() = default;

    /// Diagonal weights W_L = diag(left), W_R = diag(right); entries >= 0.
    static WeightPair diagonal(RealVector<Real> left, RealVector<Real> right)
    {
        if (left.size() < 1 || right.size() < 1)
        {
            throw std::invalid_argument("WeightPair: empty diagonal");
        }
        if ((left.array() < Real(0)).any() || (right.array() < Real(0)).any() ||
            !left.allFinite() || !right.allFinite())
        {
            throw std::invalid_argument("WeightPair: diagonal weights must be finite and nonnegative");
        }
        if (left.norm() == Real(0) || right.norm() == Real(0))
        {
            throw std::invalid_argument("WeightPair: weights must have positive norm");
        }
        WeightPair w;
        w.m_diagonal   = true;
        w.m_left_diag  = std::move(left);
        w.m_right_diag = std::move(right);
        return w;
    }

    static WeightPair identity(Index d1, Index d2)
    {
        return diagonal(RealVector<Real>::Ones(d1), RealVector<Real>::Ones(d2));
    }

    /// Full (possibly non-diagonal) square weights.
    static WeightPair general(ComplexMatrix<Real> left, ComplexMatrix<Real> right)
    {
        if (left.rows() != left.cols() || right.rows() != right.cols() ||
            left.rows() < 1 || right.rows() < 1)
        {
            throw std::invalid_argument("WeightPair: weight matrices must be square");
        }
        if (!left.allFinite() || !right.allFinite() || left.norm() == Real(0) ||
            right.norm() == Real(0))
        {
            throw std::invalid_argument("WeightPair: weights must be finite with positive norm");
        }
        WeightPair w;
        w.m_diagonal = false;
        w.m_left     = std::move(left);
        w.m_right    = std::move(right);
        return w;
    }

    bool is_diagonal() const
    {
        return m_diagonal;
    }
    Index left_size() const
    {
        return m_diagonal ? m_left_diag.size() : m_left.rows();
    }
    Index right_size() const
    {
        return m_diagonal ? m_right_diag.size() : m_right.rows();
    }
    const RealVector<Real>& left_diag() const
    {
        require_diagonal();
        return m_left_diag;
    }
    const RealVector<Real>& right_diag() const
    {
        require_diagonal();
        return m_right_diag;
    }

    ComplexMatrix<Real> left() const
    {
        if (m_diagonal)
        {
            return m_left_diag.template cast<Complex<Real>>().asDiagonal();
        }
        return m_left;
    }
    ComplexMatrix<Real> right() const
    {
        if (m_diagonal)
        {
            return m_right_diag.template cast<Complex<Real>>().asDiagonal();
        }
        return m_right;
    }

    /// W_L M W_R^H
    template <typename Derived>
    ComplexMatrix<Real> apply(const Eigen::MatrixBase<Derived>& m) const
    {
        check_dims(m.rows(), m.cols());
        if (m_diagonal)
        {
            return (m_left_diag.asDiagonal() * m * m_right_diag.asDiagonal()).eval();
        }
        return m_left * m * m_right.adjoint();
    }

    /// W_L^H M W_R, the adjoint of `apply`.
    template <typename Derived>
    ComplexMatrix<Real> apply_adjoint(const Eigen::MatrixBase<Derived>& m) const
    {
        check_dims(m.rows(), m.cols());
        if (m_diagonal)
        {
            return (m_left_diag.asDiagonal() * m * m_right_diag.asDiagonal()).eval();
        }
        return m_left.adjoint() * m * m_right;
    }

    Real left_frobenius() const
    {
        return m_diagonal ? m_left_diag.norm() : m_left.norm();
    }
    Real right_frobenius() const
    {
        return m_diagonal ? m_right_diag.norm() : m_right.norm();
    }

    /// Copy scaled so that ||W_L||_F = ||W_R||_F = 1.
    WeightPair normalized() const
    {
        WeightPair w = *this;
        if (m_diagonal)
        {
            w.m_left_diag /= left_frobenius();
            w.m_right_diag /= right_frobenius();
        }
        else
        {
            w.m_left /= left_frobenius();
            w.m_right /= right_frobenius();
        }
        return w;
    }

private:
    void require_diagonal() const
    {
        if (!m_diagonal)
        {
            throw std::logic_error("WeightPair: diagonal accessor on general weights");
        }
    }
    void check_dims(Index rows, Index cols) const
    {
        if (rows != left_size() || cols != right_size())
        {
            throw std::invalid_argument("WeightPair: matrix dimensions do not match weights");
        }
    }

    bool m_diagonal = true;
    RealVector<Real> m_left_diag;
    RealVector<Real> m_right_diag;
    ComplexMatrix<Real> m_left;
    ComplexMatrix<Real> m_right;
};

template <typename Real = double>
WeightPair<Real> identity_weights(Index d1, Index d2)
{
    return WeightPair<Real>::identity(d1, d2);
}

} // namespace wli

#endif /* WLI_WEIGHT_PAIR_HPP */
