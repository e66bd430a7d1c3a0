///
/// \file lifting.hpp
///
/// Lifting bases and the lifting operator.
///
/// A lifting basis is a family {A_n} of sparse d1 x d2 matrices with unit
/// Frobenius norm, equal positive nonzeros, pairwise orthogonal, and at most
/// one nonzero per column. Together with positive coefficients {a_n} it
/// defines
///
///     L(x)     = sum_n a_n x_n A_n,
///     L^+(M)_n = <A_n, M> / a_n,
///
/// so that L^+(L(x)) = x.
///
#ifndef WLI_LIFTING_HPP
#define WLI_LIFTING_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <wli/types.hpp>

namespace wli
{

enum class Structure
{
    Hankel,
    DoubleHankel,
    Custom
};

inline std::string to_string(Structure s)
{
    switch (s)
    {
        case Structure::Hankel:
            return "hankel";
        case Structure::DoubleHankel:
            return "double-hankel";
        case Structure::Custom:
            return "custom";
    }
    return "custom";
}

inline Structure structure_from_string(const std::string& name)
{
    if (name == "hankel")
    {
        return Structure::Hankel;
    }
    if (name == "double-hankel" || name == "double_hankel" || name == "dhankel")
    {
        return Structure::DoubleHankel;
    }
    throw std::invalid_argument("unknown structure '" + name + "'");
}

///
/// One nonzero of A_n. A `conjugate` entry receives conj(x_n) instead of x_n,
/// which makes the lift real-linear rather than complex-linear; it is used by
/// the forward-backward double-Hankel structure.
///
template <typename Real>
struct PatternEntry
{
    Index row;
    Index col;
    Real value;
    bool conjugate = false;
};

template <typename Real>
using Pattern = std::vector<PatternEntry<Real>>;

///
/// Sparse coordinate representation of a lifting basis. Constructors in this
/// header always produce valid bases; arbitrary patterns can be supplied for
/// testing `validate_basis`.
///
template <typename Real = double>
class LiftingBasis
{
public:
    LiftingBasis() = default;

    LiftingBasis(Index rows, Index cols, std::vector<Pattern<Real>> elements,
                 RealVector<Real> coefficients,
                 Structure structure = Structure::Custom, Index pencil = 0)
        : m_rows(rows),
          m_cols(cols),
          m_elements(std::move(elements)),
          m_coeffs(std::move(coefficients)),
          m_structure(structure),
          m_pencil(pencil)
    {
        if (static_cast<Index>(m_elements.size()) != m_coeffs.size())
        {
            throw std::invalid_argument("LiftingBasis: element/coefficient count mismatch");
        }
        for (const auto& pat : m_elements)
        {
            for (const auto& e : pat)
            {
                if (e.row < 0 || e.row >= m_rows || e.col < 0 || e.col >= m_cols)
                {
                    throw std::out_of_range("LiftingBasis: pattern entry outside matrix");
                }
            }
        }
    }

    Index size() const
    {
        return static_cast<Index>(m_elements.size());
    }
    Index rows() const
    {
        return m_rows;
    }
    Index cols() const
    {
        return m_cols;
    }
    Structure structure() const
    {
        return m_structure;
    }
    Index pencil() const
    {
        return m_pencil;
    }
    const Pattern<Real>& element(Index n) const
    {
        return m_elements[static_cast<std::size_t>(n)];
    }
    const std::vector<Pattern<Real>>& elements() const
    {
        return m_elements;
    }
    const RealVector<Real>& coefficients() const
    {
        return m_coeffs;
    }
    Real coefficient(Index n) const
    {
        return m_coeffs(n);
    }
    /// omega_n = number of nonzeros of A_n.
    Index support(Index n) const
    {
        return static_cast<Index>(element(n).size());
    }
    std::vector<Index> support_counts() const
    {
        std::vector<Index> out;
        out.reserve(m_elements.size());
        for (const auto& pat : m_elements)
        {
            out.push_back(static_cast<Index>(pat.size()));
        }
        return out;
    }

    /// Dense copy of A_n.
    RealMatrix<Real> dense_element(Index n) const
    {
        RealMatrix<Real> a = RealMatrix<Real>::Zero(m_rows, m_cols);
        for (const auto& e : element(n))
        {
            a(e.row, e.col) += e.value;
        }
        return a;
    }

private:
    Index m_rows = 0;
    Index m_cols = 0;
    std::vector<Pattern<Real>> m_elements;
    RealVector<Real> m_coeffs;
    Structure m_structure = Structure::Custom;
    Index m_pencil        = 0;
};

namespace detail
{

// Append the antidiagonal {(i, j) : i + j = s} of a rows x cols block whose
// first column sits at col_offset.
template <typename Real>
void append_antidiagonal(Pattern<Real>& pat, Index s, Index rows, Index cols,
                         Index col_offset, bool conjugate = false)
{
    const Index i_lo = std::max<Index>(0, s - (cols - 1));
    const Index i_hi = std::min<Index>(rows - 1, s);
    for (Index i = i_lo; i <= i_hi; ++i)
    {
        pat.push_back({i, col_offset + (s - i), Real(0), conjugate});
    }
}

template <typename Real>
void normalize_pattern(Pattern<Real>& pat)
{
    const Real v = Real(1) / std::sqrt(static_cast<Real>(pat.size()));
    for (auto& e : pat)
    {
        e.value = v;
    }
}

} // namespace detail

///
/// Hankel lifting of a length-N vector into the d x (N - d + 1) matrix with
/// entries M(i, j) = x_{i + j} (0-based). Element n is the n-th antidiagonal
/// and a_n is the square root of its length.
///
template <typename Real = double>
LiftingBasis<Real> hankel_basis(Index n, Index d)
{
    if (n < 1 || d < 1 || d > n)
    {
        throw std::invalid_argument("hankel_basis: require 1 <= d <= N");
    }
    const Index rows = d;
    const Index cols = n - d + 1;
    std::vector<Pattern<Real>> elements(static_cast<std::size_t>(n));
    RealVector<Real> coeffs(n);
    for (Index s = 0; s < n; ++s)
    {
        auto& pat = elements[static_cast<std::size_t>(s)];
        detail::append_antidiagonal(pat, s, rows, cols, 0);
        detail::normalize_pattern(pat);
        coeffs(s) = std::sqrt(static_cast<Real>(pat.size()));
    }
    return LiftingBasis<Real>(rows, cols, std::move(elements), std::move(coeffs),
                              Structure::Hankel, d);
}

///
/// Double-Hankel lifting of size d x 2(N - d + 1): the Hankel matrix of x next
/// to the Hankel matrix of its conjugate reversal,
///
///     [ H_d(x) | H_d(conj(J x)) ],   (J x)_n = x_{N-1-n}.
///
/// For unit-modulus bases conj(J x) is again a mixture of the same z_k, so
/// both blocks share a column space and the lift keeps rank K. Sample x_n
/// occupies antidiagonal n of the first block and antidiagonal N - 1 - n of
/// the second; a_n = sqrt(omega_n).
///
/// With `conjugate_reversal = false` the second block is H_d(J x) instead,
/// a complex-linear lift whose rank is 2K for unit-modulus bases (z and 1/z).
///
template <typename Real = double>
LiftingBasis<Real> double_hankel_basis(Index n, Index d, bool conjugate_reversal = true)
{
    if (n < 1 || d < 1 || d > n)
    {
        throw std::invalid_argument("double_hankel_basis: require 1 <= d <= N");
    }
    const Index rows  = d;
    const Index block = n - d + 1;
    std::vector<Pattern<Real>> elements(static_cast<std::size_t>(n));
    RealVector<Real> coeffs(n);
    for (Index s = 0; s < n; ++s)
    {
        auto& pat = elements[static_cast<std::size_t>(s)];
        detail::append_antidiagonal(pat, s, rows, block, 0);
        detail::append_antidiagonal(pat, n - 1 - s, rows, block, block, conjugate_reversal);
        detail::normalize_pattern(pat);
        coeffs(s) = std::sqrt(static_cast<Real>(pat.size()));
    }
    return LiftingBasis<Real>(rows, 2 * block, std::move(elements),
                              std::move(coeffs), Structure::DoubleHankel, d);
}

template <typename Real = double>
LiftingBasis<Real> make_basis(Structure structure, Index n, Index d)
{
    switch (structure)
    {
        case Structure::Hankel:
            return hankel_basis<Real>(n, d);
        case Structure::DoubleHankel:
            return double_hankel_basis<Real>(n, d);
        case Structure::Custom:
            break;
    }
    throw std::invalid_argument("make_basis: custom bases must be built explicitly");
}

/// M = sum_n a_n x_n A_n.
template <typename Real>
ComplexMatrix<Real> lift(const LiftingBasis<Real>& basis,
                         const ComplexVector<Real>& x)
{
    if (x.size() != basis.size())
    {
        throw std::invalid_argument("lift: vector length does not match basis");
    }
    ComplexMatrix<Real> m = ComplexMatrix<Real>::Zero(basis.rows(), basis.cols());
    for (Index n = 0; n < basis.size(); ++n)
    {
        const Complex<Real> scaled = basis.coefficient(n) * x(n);
        for (const auto& e : basis.element(n))
        {
            m(e.row, e.col) += e.value * (e.conjugate ? std::conj(scaled) : scaled);
        }
    }
    return m;
}

/// <A_n, M> = sum over the pattern of A_n(i, j) M(i, j); A_n is real.
template <typename Real, typename Derived>
Complex<Real> basis_inner(const Pattern<Real>& pat,
                          const Eigen::MatrixBase<Derived>& m)
{
    Complex<Real> acc(0);
    for (const auto& e : pat)
    {
        acc += e.value * m(e.row, e.col);
    }
    return acc;
}

///
/// Coordinate of M along A_n: sum of A_n(i, j) M(i, j) over the plain
/// entries plus the conjugate of the same sum over conjugated entries. Equals
/// <A_n, M> when the pattern has no conjugated entries.
///
template <typename Real, typename Derived>
Complex<Real> pattern_coordinate(const Pattern<Real>& pat,
                                 const Eigen::MatrixBase<Derived>& m)
{
    Complex<Real> plain(0);
    Complex<Real> conj(0);
    for (const auto& e : pat)
    {
        (e.conjugate ? conj : plain) += e.value * m(e.row, e.col);
    }
    return plain + std::conj(conj);
}

/// L^+(M)_n = <A_n, M> / a_n.
template <typename Real, typename Derived>
ComplexVector<Real> adjoint(const LiftingBasis<Real>& basis,
                            const Eigen::MatrixBase<Derived>& m)
{
    if (m.rows() != basis.rows() || m.cols() != basis.cols())
    {
        throw std::invalid_argument("adjoint: matrix dimensions do not match basis");
    }
    ComplexVector<Real> x(basis.size());
    for (Index n = 0; n < basis.size(); ++n)
    {
        x(n) = pattern_coordinate(basis.element(n), m) / basis.coefficient(n);
    }
    return x;
}

///
/// Hermitian adjoint L^*(M)_n = a_n <A_n, M>. Differs from `adjoint` by the
/// factor a_n^2; it is the operator needed for normal equations. For
/// conjugated entries this is the adjoint with respect to Re<., .>.
///
template <typename Real, typename Derived>
ComplexVector<Real> lift_hermitian_adjoint(const LiftingBasis<Real>& basis,
                                           const Eigen::MatrixBase<Derived>& m)
{
    if (m.rows() != basis.rows() || m.cols() != basis.cols())
    {
        throw std::invalid_argument("lift_hermitian_adjoint: dimension mismatch");
    }
    ComplexVector<Real> x(basis.size());
    for (Index n = 0; n < basis.size(); ++n)
    {
        x(n) = pattern_coordinate(basis.element(n), m) * basis.coefficient(n);
    }
    return x;
}

//------------------------------------------------------------------------------
// Validation
//------------------------------------------------------------------------------

struct BasisCheck
{
    std::string name;
    bool pass = true;
    std::optional<Index> first_offender; // element index, 0-based
};

struct BasisReport
{
    std::vector<BasisCheck> checks;

    bool all_pass() const
    {
        return std::all_of(checks.begin(), checks.end(),
                           [](const BasisCheck& c) { return c.pass; });
    }
    const BasisCheck& check(const std::string& name) const
    {
        for (const auto& c : checks)
        {
            if (c.name == name)
            {
                return c;
            }
        }
        throw std::out_of_range("BasisReport: no check named " + name);
    }
};

///
/// Check the four lifting-basis conditions (unit Frobenius norm, equal
/// positive real nonzeros, orthogonality, at most one nonzero per column)
/// plus positivity of the coefficients. Each check records the first
/// offending element.
///
template <typename Real>
BasisReport validate_basis(const LiftingBasis<Real>& basis, Real tol = Real(1e-12))
{
    BasisCheck unit_norm{"unit-frobenius-norm", true, std::nullopt};
    BasisCheck equal_pos{"equal-positive-entries", true, std::nullopt};
    BasisCheck orthogonal{"orthogonality", true, std::nullopt};
    BasisCheck one_per_col{"one-nonzero-per-column", true, std::nullopt};
    BasisCheck coeff_pos{"positive-coefficients", true, std::nullopt};

    auto fail = [](BasisCheck& c, Index n) {
        if (c.pass)
        {
            c.pass           = false;
            c.first_offender = n;
        }
    };

    // owner of each cell, for the orthogonality check
    std::vector<Index> owner(static_cast<std::size_t>(basis.rows() * basis.cols()), -1);

    for (Index n = 0; n < basis.size(); ++n)
    {
        const auto& pat = basis.element(n);

        // merge duplicate coordinates within one element before any check
        std::map<std::pair<Index, Index>, Real> cells;
        for (const auto& e : pat)
        {
            cells[{e.row, e.col}] += e.value;
        }

        Real frob2 = Real(0);
        for (const auto& [rc, v] : cells)
        {
            frob2 += v * v;
        }
        if (cells.empty() || std::abs(frob2 - Real(1)) > tol)
        {
            fail(unit_norm, n);
        }

        if (!cells.empty())
        {
            const Real v0 = cells.begin()->second;
            for (const auto& [rc, v] : cells)
            {
                if (!(v > Real(0)) || std::abs(v - v0) > tol)
                {
                    fail(equal_pos, n);
                    break;
                }
            }
        }

        std::map<Index, int> per_col;
        for (const auto& [rc, v] : cells)
        {
            if (++per_col[rc.second] > 1)
            {
                fail(one_per_col, n);
                break;
            }
        }

        for (const auto& [rc, v] : cells)
        {
            auto& o = owner[static_cast<std::size_t>(rc.first * basis.cols() + rc.second)];
            if (o >= 0 && o != n)
            {
                fail(orthogonal, n);
            }
            o = n;
        }

        if (!(basis.coefficient(n) > Real(0)))
        {
            fail(coeff_pos, n);
        }
    }

    return BasisReport{{unit_norm, equal_pos, orthogonal, one_per_col, coeff_pos}};
}

} // namespace wli

#endif /* WLI_LIFTING_HPP */
