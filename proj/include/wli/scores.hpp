///
/// \file scores.hpp
///
/// Leverage scores of lifted structures and the quantities built on them.
///
/// For a lifted matrix with SVD U S V^H of rank K the leverage score of
/// basis element A_n is
///
///     mu_n = (N / K) max{ ||U^H A_n||_F^2, ||A_n V||_F^2 }.
///
/// The weighted variant replaces the orthogonal projections by the oblique
/// projections induced by (W_L, W_R), with U, V taken from the SVD of
/// W_L L(x) W_R^H:
///
///     P_U(Y) = W_L^H U (U^H W_L W_L^H U)^{-1} U^H W_L Y
///     P_V(Y) = Y W_R^H V (V^H W_R W_R^H V)^{-1} V^H W_R.
///
/// P_U is the orthogonal projector onto range(W_L^H U), so with
/// Q_L = B (B^H B)^{-1/2}, B = W_L^H U, we get ||P_U(A_n)||_F = ||Q_L^H A_n||_F.
/// The Gram matrices B^H B are inverted once per weight pair.
///
#ifndef WLI_SCORES_HPP
#define WLI_SCORES_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <wli/lifting.hpp>
#include <wli/types.hpp>
#include <wli/weight_pair.hpp>

namespace wli
{

template <typename Real = double>
struct SubspacePair
{
    ComplexMatrix<Real> left;  // d1 x K, orthonormal columns
    ComplexMatrix<Real> right; // d2 x K, orthonormal columns
    RealVector<Real> singular_values;

    Index rank() const
    {
        return left.cols();
    }
};

template <typename Real = double>
struct ScoreVector
{
    RealVector<Real> values;
    Index rank_used = 0;

    Index size() const
    {
        return values.size();
    }
    Real operator()(Index n) const
    {
        return values(n);
    }
};

/// Default relative threshold for the numerical rank of a lifted matrix.
template <typename Real>
inline constexpr Real default_rank_tol = Real(1e-8);

/// Gram matrices worse conditioned than this make P_U / P_V meaningless.
template <typename Real>
inline constexpr Real gram_condition_limit = Real(1e12);

///
/// Singular subspaces of `m`, keeping singular values above
/// rank_tol * sigma_max.
///
template <typename Real, typename Derived>
SubspacePair<Real> subspace_of_matrix(const Eigen::MatrixBase<Derived>& m,
                                      Real rank_tol = default_rank_tol<Real>)
{
    Eigen::BDCSVD<ComplexMatrix<Real>> svd(m.derived(),
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    if (sigma.size() == 0 || !(sigma(0) > Real(0)))
    {
        throw NumericalError("subspace_of: zero matrix has no singular subspace");
    }
    Index rank = 0;
    while (rank < sigma.size() && sigma(rank) > rank_tol * sigma(0))
    {
        ++rank;
    }
    return SubspacePair<Real>{svd.matrixU().leftCols(rank), svd.matrixV().leftCols(rank),
                              sigma.head(rank)};
}

/// Singular subspaces of L(x).
template <typename Real>
SubspacePair<Real> subspace_of(const LiftingBasis<Real>& basis,
                               const ComplexVector<Real>& x,
                               Real rank_tol = default_rank_tol<Real>)
{
    return subspace_of_matrix(lift(basis, x), rank_tol);
}

/// Singular subspaces of W_L L(x) W_R^H.
template <typename Real>
SubspacePair<Real> weighted_subspace_of(const LiftingBasis<Real>& basis,
                                        const WeightPair<Real>& weights,
                                        const ComplexVector<Real>& x,
                                        Real rank_tol = default_rank_tol<Real>)
{
    return subspace_of_matrix(weights.apply(lift(basis, x)), rank_tol);
}

///
/// Subspaces of W_L L(x) W_R^H obtained from those of L(x) without another
/// SVD: range(W_L U) and range(W_R V). Requires invertible weights.
///
template <typename Real>
SubspacePair<Real> reweighted_subspace(const SubspacePair<Real>& pilot,
                                       const WeightPair<Real>& weights)
{
    auto orth = [](const ComplexMatrix<Real>& a) {
        Eigen::HouseholderQR<ComplexMatrix<Real>> qr(a);
        return ComplexMatrix<Real>(qr.householderQ() *
                                   ComplexMatrix<Real>::Identity(a.rows(), a.cols()));
    };
    ComplexMatrix<Real> wl_u;
    ComplexMatrix<Real> wr_v;
    if (weights.is_diagonal())
    {
        wl_u = weights.left_diag().template cast<Complex<Real>>().asDiagonal() * pilot.left;
        wr_v = weights.right_diag().template cast<Complex<Real>>().asDiagonal() * pilot.right;
    }
    else
    {
        wl_u = weights.left() * pilot.left;
        wr_v = weights.right() * pilot.right;
    }
    return SubspacePair<Real>{orth(wl_u), orth(wr_v), pilot.singular_values};
}

namespace detail
{

// ||Q^H A||_F^2 (left = true, Q is d1 x K) or ||A Q||_F^2 (left = false,
// Q is d2 x K) for sparse real A. Entries sharing a column (resp. row) are
// combined before taking norms.
template <typename Real>
Real sparse_frob2(const Pattern<Real>& pat, const ComplexMatrix<Real>& q, bool left)
{
    auto key = [left](const PatternEntry<Real>& e) { return left ? e.col : e.row; };
    auto src = [left](const PatternEntry<Real>& e) { return left ? e.row : e.col; };

    bool unique = true;
    for (std::size_t i = 0; i < pat.size() && unique; ++i)
    {
        for (std::size_t j = i + 1; j < pat.size(); ++j)
        {
            if (key(pat[i]) == key(pat[j]))
            {
                unique = false;
                break;
            }
        }
    }
    Real acc = Real(0);
    if (unique)
    {
        for (const auto& e : pat)
        {
            acc += e.value * e.value * q.row(src(e)).squaredNorm();
        }
        return acc;
    }
    std::vector<PatternEntry<Real>> sorted(pat.begin(), pat.end());
    std::sort(sorted.begin(), sorted.end(),
              [&](const auto& a, const auto& b) { return key(a) < key(b); });
    Eigen::Matrix<Complex<Real>, 1, Eigen::Dynamic> group(q.cols());
    std::size_t i = 0;
    while (i < sorted.size())
    {
        group.setZero();
        const Index k = key(sorted[i]);
        for (; i < sorted.size() && key(sorted[i]) == k; ++i)
        {
            group += sorted[i].value * q.row(src(sorted[i]));
        }
        acc += group.squaredNorm();
    }
    return acc;
}

// B (B^H B)^{-1/2}; fails when the Gram matrix is numerically singular.
template <typename Real>
ComplexMatrix<Real> orthonormalize_gram(const ComplexMatrix<Real>& b, const char* side)
{
    const ComplexMatrix<Real> gram = b.adjoint() * b;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> eig(gram);
    const auto& lambda = eig.eigenvalues();
    const Real lo      = lambda.minCoeff();
    const Real hi      = lambda.maxCoeff();
    if (!(lo > Real(0)) || hi / lo > gram_condition_limit<Real>)
    {
        throw NumericalError(std::string("weighted projection: singular ") + side +
                             " Gram matrix (weights annihilate the subspace)");
    }
    const RealVector<Real> inv_sqrt = lambda.cwiseSqrt().cwiseInverse();
    return b * eig.eigenvectors() * inv_sqrt.template cast<Complex<Real>>().asDiagonal() *
           eig.eigenvectors().adjoint();
}

} // namespace detail

///
/// Orthonormal bases of range(W_L^H U) and range(W_R^H V). Their projectors
/// are P_U and P_V.
///
template <typename Real>
struct WeightedProjection
{
    ComplexMatrix<Real> left;
    ComplexMatrix<Real> right;
};

template <typename Real>
WeightedProjection<Real> weighted_projection(const WeightPair<Real>& weights,
                                             const SubspacePair<Real>& subspace)
{
    if (subspace.left.rows() != weights.left_size() ||
        subspace.right.rows() != weights.right_size())
    {
        throw std::invalid_argument("weighted_projection: subspace/weight dimension mismatch");
    }
    ComplexMatrix<Real> bl;
    ComplexMatrix<Real> br;
    if (weights.is_diagonal())
    {
        bl = weights.left_diag().template cast<Complex<Real>>().asDiagonal() * subspace.left;
        br = weights.right_diag().template cast<Complex<Real>>().asDiagonal() * subspace.right;
    }
    else
    {
        bl = weights.left().adjoint() * subspace.left;
        br = weights.right().adjoint() * subspace.right;
    }
    return {detail::orthonormalize_gram(bl, "left"), detail::orthonormalize_gram(br, "right")};
}

/// (||P_U(A_n)||_F^2, ||P_V(A_n)||_F^2) for every n.
template <typename Real>
std::pair<RealVector<Real>, RealVector<Real>>
projection_energies(const LiftingBasis<Real>& basis, const ComplexMatrix<Real>& ql,
                    const ComplexMatrix<Real>& qr)
{
    if (ql.rows() != basis.rows() || qr.rows() != basis.cols())
    {
        throw std::invalid_argument("leverage scores: subspace dimensions do not match basis");
    }
    RealVector<Real> left(basis.size());
    RealVector<Real> right(basis.size());
    for (Index n = 0; n < basis.size(); ++n)
    {
        left(n)  = detail::sparse_frob2(basis.element(n), ql, true);
        right(n) = detail::sparse_frob2(basis.element(n), qr, false);
    }
    return {left, right};
}

template <typename Real>
ScoreVector<Real> scores_from_bases(const LiftingBasis<Real>& basis,
                                    const ComplexMatrix<Real>& ql,
                                    const ComplexMatrix<Real>& qr)
{
    const Index k = ql.cols();
    if (k < 1 || qr.cols() != k)
    {
        throw std::invalid_argument("leverage scores: subspace rank must be >= 1");
    }
    const auto [left, right] = projection_energies(basis, ql, qr);
    const Real scale         = static_cast<Real>(basis.size()) / static_cast<Real>(k);
    return ScoreVector<Real>{scale * left.cwiseMax(right), k};
}

/// mu_n = (N/K) max{||U^H A_n||_F^2, ||A_n V||_F^2}.
template <typename Real>
ScoreVector<Real> leverage_scores(const LiftingBasis<Real>& basis,
                                  const SubspacePair<Real>& subspace)
{
    return scores_from_bases(basis, subspace.left, subspace.right);
}

///
/// Weighted scores (N/K) max{||P_U(A_n)||_F^2, ||P_V(A_n)||_F^2}; `subspace`
/// must be that of W_L L(x) W_R^H.
///
template <typename Real>
ScoreVector<Real> weighted_leverage_scores(const LiftingBasis<Real>& basis,
                                           const WeightPair<Real>& weights,
                                           const SubspacePair<Real>& subspace)
{
    const auto proj = weighted_projection(weights, subspace);
    return scores_from_bases(basis, proj.left, proj.right);
}

///
/// R_L = sum_n ||A_n o A_n||_{inf->inf}, the sum over elements of the largest
/// row sum of squared entries. Hankel: sum_n 1/omega_n.
///
template <typename Real>
Real lifting_coefficient(const LiftingBasis<Real>& basis)
{
    Real total = Real(0);
    std::vector<Real> row_sum(static_cast<std::size_t>(basis.rows()), Real(0));
    for (Index n = 0; n < basis.size(); ++n)
    {
        std::fill(row_sum.begin(), row_sum.end(), Real(0));
        for (const auto& e : basis.element(n))
        {
            row_sum[static_cast<std::size_t>(e.row)] += e.value * e.value;
        }
        total += *std::max_element(row_sum.begin(), row_sum.end());
    }
    return total;
}

///
/// Per-index sampling probability sufficient for exact recovery:
///
///     p_n >= min{1, (1/N) max{1, R_L^2 c mu_n K^2 log N}},  c = 192^2 (b1 + 1).
///
template <typename Real>
RealVector<Real> probability_floor(const ScoreVector<Real>& scores, Real r_l, Index n,
                                   Index k, Real b1 = Real(3))
{
    if (b1 < Real(3))
    {
        throw std::invalid_argument("probability_floor: b1 must be >= 3");
    }
    if (n < 1 || k < 1)
    {
        throw std::invalid_argument("probability_floor: require N >= 1 and K >= 1");
    }
    const Real c    = Real(192) * Real(192) * (b1 + Real(1));
    const Real kk   = static_cast<Real>(k);
    const Real logn = std::log(static_cast<Real>(n));
    RealVector<Real> floor(scores.size());
    for (Index i = 0; i < scores.size(); ++i)
    {
        const Real inner = r_l * r_l * c * scores(i) * kk * kk * logn;
        floor(i) = std::min(Real(1), std::max(Real(1), inner) / static_cast<Real>(n));
    }
    return floor;
}

template <typename Real>
struct IncoherenceResult
{
    Real lhs = Real(0);
    Real rhs = Real(0);
    bool pass = false;
};

///
/// 1/(8 sqrt(log N)) <= min_i omega_i min{||P_U(A_i)||_F^2, ||P_V(A_i)||_F^2}.
///
template <typename Real>
IncoherenceResult<Real> incoherence_check(const LiftingBasis<Real>& basis,
                                          const WeightPair<Real>& weights,
                                          const SubspacePair<Real>& subspace)
{
    const auto proj          = weighted_projection(weights, subspace);
    const auto [left, right] = projection_energies(basis, proj.left, proj.right);
    IncoherenceResult<Real> out;
    out.lhs = Real(1) / (Real(8) * std::sqrt(std::log(static_cast<Real>(basis.size()))));
    out.rhs = std::numeric_limits<Real>::infinity();
    for (Index i = 0; i < basis.size(); ++i)
    {
        out.rhs = std::min(out.rhs,
                           static_cast<Real>(basis.support(i)) * std::min(left(i), right(i)));
    }
    out.pass = out.lhs <= out.rhs;
    return out;
}

///
/// F_0 = W_L^H U V^H W_R with the weights scaled to unit Frobenius norm, the
/// normalization under which ||F_0||_{A,inf} <= 1 and
/// ||F_0||_{A,2}^2 <= 2 K R_L hold.
///
template <typename Real>
ComplexMatrix<Real> sign_matrix(const WeightPair<Real>& weights,
                                const SubspacePair<Real>& subspace)
{
    return weights.normalized().apply_adjoint(subspace.left * subspace.right.adjoint());
}

namespace detail
{

template <typename Real>
void require_positive_scores(const LiftingBasis<Real>& basis, const ScoreVector<Real>& scores)
{
    if (scores.size() != basis.size())
    {
        throw std::invalid_argument("A-norm: score vector length does not match basis");
    }
    if (!(scores.values.array() > Real(0)).all())
    {
        throw std::invalid_argument("A-norm: leverage scores must be positive");
    }
}

} // namespace detail

/// ||M||_{A,inf} = max_n |N <A_n, M>| / (K mu_n sqrt(omega_n)).
template <typename Real, typename Derived>
Real a_norm_inf(const LiftingBasis<Real>& basis, const ScoreVector<Real>& scores,
                const Eigen::MatrixBase<Derived>& m)
{
    detail::require_positive_scores(basis, scores);
    const Real nn = static_cast<Real>(basis.size());
    const Real kk = static_cast<Real>(scores.rank_used);
    Real best     = Real(0);
    for (Index n = 0; n < basis.size(); ++n)
    {
        const Real num = nn * std::abs(basis_inner(basis.element(n), m));
        const Real den = kk * scores(n) * std::sqrt(static_cast<Real>(basis.support(n)));
        best           = std::max(best, num / den);
    }
    return best;
}

/// ||M||_{A,2} = sqrt(sum_n |N <A_n, M>|^2 / (K mu_n omega_n)).
template <typename Real, typename Derived>
Real a_norm_2(const LiftingBasis<Real>& basis, const ScoreVector<Real>& scores,
              const Eigen::MatrixBase<Derived>& m)
{
    detail::require_positive_scores(basis, scores);
    const Real nn = static_cast<Real>(basis.size());
    const Real kk = static_cast<Real>(scores.rank_used);
    Real acc      = Real(0);
    for (Index n = 0; n < basis.size(); ++n)
    {
        const Real num = std::norm(nn * basis_inner(basis.element(n), m));
        acc += num / (kk * scores(n) * static_cast<Real>(basis.support(n)));
    }
    return std::sqrt(acc);
}

///
/// How ||U^H||^2 is read in beta = (N/K) max{1/||U^H||^2, 1/||V^H||^2}.
///
/// Spectral: the operator norm, equal to 1 for orthonormal U.
/// Coherence: the largest squared row norm of U, max_i ||U^H e_i||^2.
///
enum class BetaReading
{
    Spectral,
    Coherence
};

template <typename Real>
Real weight_bound_beta(const SubspacePair<Real>& subspace, Index n,
                    BetaReading reading = BetaReading::Spectral)
{
    const Real k = static_cast<Real>(subspace.rank());
    Real nu      = Real(1);
    Real nv      = Real(1);
    if (reading == BetaReading::Spectral)
    {
        nu = Eigen::BDCSVD<ComplexMatrix<Real>>(subspace.left).singularValues()(0);
        nv = Eigen::BDCSVD<ComplexMatrix<Real>>(subspace.right).singularValues()(0);
        nu *= nu;
        nv *= nv;
    }
    else
    {
        nu = subspace.left.rowwise().squaredNorm().maxCoeff();
        nv = subspace.right.rowwise().squaredNorm().maxCoeff();
    }
    return static_cast<Real>(n) / k * std::max(Real(1) / nu, Real(1) / nv);
}

///
/// Upper bound on mu_n K / N for diagonal weights W = diag(sqrt(w)):
///
///     max{ ||W_L A_n||_F^2 / S_L, ||A_n W_R^T||_F^2 / S_R },
///
/// where S_L (S_R) sums the floor(N/(beta K)) smallest w_L (w_R). The count is
/// capped at the number of available weights.
///
template <typename Real>
RealVector<Real> diag_weight_bound(const LiftingBasis<Real>& basis,
                                   const WeightPair<Real>& weights, Real beta, Index k)
{
    if (!weights.is_diagonal())
    {
        throw std::invalid_argument("diag_weight_bound: weights must be diagonal");
    }
    if (weights.left_size() != basis.rows() || weights.right_size() != basis.cols())
    {
        throw std::invalid_argument("diag_weight_bound: weight dimensions do not match basis");
    }
    const Real ratio = static_cast<Real>(basis.size()) / (beta * static_cast<Real>(k));
    const auto count = static_cast<Index>(std::floor(ratio));
    if (count < 1)
    {
        throw std::invalid_argument("diag_weight_bound: empty partial sum (floor(N/(beta K)) = 0)");
    }
    auto partial = [count](const RealVector<Real>& diag) {
        std::vector<Real> w(static_cast<std::size_t>(diag.size()));
        for (Index i = 0; i < diag.size(); ++i)
        {
            w[static_cast<std::size_t>(i)] = diag(i) * diag(i);
        }
        std::sort(w.begin(), w.end());
        const auto used = static_cast<std::size_t>(std::min<Index>(count, diag.size()));
        Real s          = Real(0);
        for (std::size_t i = 0; i < used; ++i)
        {
            s += w[i];
        }
        return s;
    };
    const auto& wl  = weights.left_diag();
    const auto& wr  = weights.right_diag();
    const Real sl   = partial(wl);
    const Real sr   = partial(wr);
    RealVector<Real> bound(basis.size());
    for (Index n = 0; n < basis.size(); ++n)
    {
        Real num_l = Real(0);
        Real num_r = Real(0);
        for (const auto& e : basis.element(n))
        {
            num_l += wl(e.row) * wl(e.row) * e.value * e.value;
            num_r += wr(e.col) * wr(e.col) * e.value * e.value;
        }
        bound(n) = std::max(num_l / sl, num_r / sr);
    }
    return bound;
}

} // namespace wli

#endif /* WLI_SCORES_HPP */
