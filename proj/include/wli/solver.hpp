///
/// \file solver.hpp
///
/// Weighted nuclear-norm completion of lifted signals.
///
/// Solves
///
///     min_g ||W_L L(g) W_R^H||_*   s.t.  P_Omega(g) = y_Omega            (noiseless)
///                                  or    ||P_Omega(g) - y_Omega||_2 <= sqrt(M) eta
///
/// with ADMM on the splitting Z = W_L L(g) W_R^H. Each iteration performs
///
///   g <- argmin_{g in C} ||B(g) - (Z - Lambda)||_F^2   (B = W_L L(.) W_R^H)
///   Z <- svt(B(g) + Lambda, 1/rho)
///   Lambda <- Lambda + B(g) - Z
///
/// For diagonal weights the g-update is separable per sample because the
/// patterns of distinct A_n occupy disjoint cells. General weights use a
/// conjugate-gradient (equality constraint) or accelerated projected-gradient
/// (ball constraint) inner solve.
///
#ifndef WLI_SOLVER_HPP
#define WLI_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/SVD>

#include <wli/lifting.hpp>
#include <wli/signal.hpp>
#include <wli/types.hpp>
#include <wli/weight_pair.hpp>

namespace wli
{

template <typename Real = double>
struct SolverConfig
{
    Index max_iters        = 2000;
    Real rho               = Real(1);
    Real abs_tol           = Real(1e-9);
    Real rel_tol           = Real(1e-7);
    Real success_threshold = Real(1e-3);
    bool adapt_rho         = true;
    Index inner_iters      = 50; // general (non-diagonal) weights only
    bool record_trace      = false;

    void validate() const
    {
        if (max_iters < 1 || !(rho > 0) || !(abs_tol > 0) || !(rel_tol > 0) ||
            !(success_threshold > 0) || inner_iters < 1)
        {
            throw std::invalid_argument("SolverConfig: all parameters must be positive");
        }
    }
};

template <typename Real = double>
struct CompletionMode
{
    bool noisy = false;
    Real eta   = Real(0);

    static CompletionMode noiseless()
    {
        return {};
    }
    static CompletionMode with_noise(Real eta)
    {
        if (!(eta >= Real(0)))
        {
            throw std::invalid_argument("CompletionMode: eta must be nonnegative");
        }
        return {true, eta};
    }
};

template <typename Real = double>
struct CompletionResult
{
    ComplexVector<Real> estimate;
    Index iterations     = 0;
    Real primal_residual = Real(0);
    Real dual_residual   = Real(0);
    Real objective       = Real(0);
    bool converged       = false;
    std::vector<Real> objective_trace; // ||Z||_* per iteration, if recorded
};

/// Soft-threshold the singular values of m by tau.
template <typename Real, typename Derived>
ComplexMatrix<Real> svt(const Eigen::MatrixBase<Derived>& m, Real tau,
                        Real* nuclear_norm_out = nullptr)
{
    if (!(tau >= Real(0)))
    {
        throw std::invalid_argument("svt: threshold must be nonnegative");
    }
    Eigen::BDCSVD<ComplexMatrix<Real>> svd(m.derived(),
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector<Real> shrunk =
        (svd.singularValues().array() - tau).cwiseMax(Real(0)).matrix();
    Index rank = 0;
    while (rank < shrunk.size() && shrunk(rank) > Real(0))
    {
        ++rank;
    }
    if (nuclear_norm_out)
    {
        *nuclear_norm_out = shrunk.sum();
    }
    if (rank == 0)
    {
        return ComplexMatrix<Real>::Zero(m.rows(), m.cols());
    }
    return svd.matrixU().leftCols(rank) *
           shrunk.head(rank).template cast<Complex<Real>>().asDiagonal() *
           svd.matrixV().leftCols(rank).adjoint();
}

template <typename Real, typename Derived>
Real nuclear_norm(const Eigen::MatrixBase<Derived>& m)
{
    return Eigen::BDCSVD<ComplexMatrix<Real>>(m.derived()).singularValues().sum();
}

/// ||truth - estimate||_2 / ||truth||_2
template <typename Real>
Real relative_error(const ComplexVector<Real>& truth, const ComplexVector<Real>& estimate)
{
    if (truth.size() != estimate.size())
    {
        throw std::invalid_argument("relative_error: length mismatch");
    }
    const Real denom = truth.norm();
    if (!(denom > Real(0)))
    {
        throw std::invalid_argument("relative_error: truth vector is zero");
    }
    return (truth - estimate).norm() / denom;
}

namespace detail
{

///
/// The weighted lift B(g) = W_L L(g) W_R^H with its adjoint (with respect to
/// Re<., .> when the basis has conjugated entries) and the diagonal of B^* B.
///
template <typename Real>
class WeightedLift
{
public:
    WeightedLift(const LiftingBasis<Real>& basis, const WeightPair<Real>& weights)
        : m_basis(basis), m_weights(weights), m_diagonal(weights.is_diagonal())
    {
        if (weights.left_size() != basis.rows() || weights.right_size() != basis.cols())
        {
            throw std::invalid_argument("complete: weight dimensions do not match basis");
        }
        const Index n = basis.size();
        m_gram_diag.resize(n);
        if (m_diagonal)
        {
            const auto& wl = weights.left_diag();
            const auto& wr = weights.right_diag();
            m_cell_coeff.resize(static_cast<std::size_t>(n));
            for (Index k = 0; k < n; ++k)
            {
                auto& coeff = m_cell_coeff[static_cast<std::size_t>(k)];
                Real d      = Real(0);
                for (const auto& e : basis.element(k))
                {
                    const Real c = basis.coefficient(k) * e.value * wl(e.row) * wr(e.col);
                    coeff.push_back(c);
                    d += c * c;
                }
                m_gram_diag(k) = d;
            }
        }
        else
        {
            m_left  = weights.left();
            m_right = weights.right();
            for (Index k = 0; k < n; ++k)
            {
                ComplexVector<Real> unit = ComplexVector<Real>::Zero(n);
                unit(k)                  = Complex<Real>(1);
                m_gram_diag(k)           = apply(unit).squaredNorm();
            }
        }
    }

    bool diagonal() const
    {
        return m_diagonal;
    }
    const RealVector<Real>& gram_diag() const
    {
        return m_gram_diag;
    }

    ComplexMatrix<Real> apply(const ComplexVector<Real>& g) const
    {
        if (m_diagonal)
        {
            ComplexMatrix<Real> m = ComplexMatrix<Real>::Zero(m_basis.rows(), m_basis.cols());
            for (Index k = 0; k < m_basis.size(); ++k)
            {
                const auto& pat   = m_basis.element(k);
                const auto& coeff = m_cell_coeff[static_cast<std::size_t>(k)];
                for (std::size_t i = 0; i < pat.size(); ++i)
                {
                    m(pat[i].row, pat[i].col) +=
                        coeff[i] * (pat[i].conjugate ? std::conj(g(k)) : g(k));
                }
            }
            return m;
        }
        return m_left * lift(m_basis, g) * m_right.adjoint();
    }

    ComplexVector<Real> adjoint(const ComplexMatrix<Real>& m) const
    {
        if (m_diagonal)
        {
            ComplexVector<Real> g(m_basis.size());
            for (Index k = 0; k < m_basis.size(); ++k)
            {
                const auto& pat   = m_basis.element(k);
                const auto& coeff = m_cell_coeff[static_cast<std::size_t>(k)];
                Complex<Real> plain(0);
                Complex<Real> conj(0);
                for (std::size_t i = 0; i < pat.size(); ++i)
                {
                    (pat[i].conjugate ? conj : plain) += coeff[i] * m(pat[i].row, pat[i].col);
                }
                g(k) = plain + std::conj(conj);
            }
            return g;
        }
        const ComplexMatrix<Real> back = m_left.adjoint() * m * m_right;
        return lift_hermitian_adjoint(m_basis, back);
    }

    /// Largest eigenvalue of B^* B by power iteration.
    Real lipschitz() const
    {
        if (m_diagonal)
        {
            return m_gram_diag.maxCoeff();
        }
        ComplexVector<Real> v = ComplexVector<Real>::Ones(m_basis.size()).normalized();
        Real lambda           = Real(0);
        for (int it = 0; it < 100; ++it)
        {
            ComplexVector<Real> w = adjoint(apply(v));
            const Real next       = w.norm();
            if (next == Real(0))
            {
                return Real(0);
            }
            v = w / next;
            if (std::abs(next - lambda) <= Real(1e-10) * next)
            {
                lambda = next;
                break;
            }
            lambda = next;
        }
        return lambda;
    }

private:
    const LiftingBasis<Real>& m_basis;
    const WeightPair<Real>& m_weights;
    bool m_diagonal;
    std::vector<std::vector<Real>> m_cell_coeff;
    RealVector<Real> m_gram_diag;
    ComplexMatrix<Real> m_left;
    ComplexMatrix<Real> m_right;
};

///
/// argmin sum_j d_j |g_j - h_j|^2  s.t.  ||g - c||_2 <= radius, over the
/// observed coordinates. Solution g_j = c_j + d_j/(d_j + lambda) (h_j - c_j)
/// with lambda >= 0 chosen by bisection so the constraint is active.
///
template <typename Real>
void weighted_ball_projection(ComplexVector<Real>& g, const std::vector<Index>& idx,
                              const ComplexVector<Real>& center,
                              const RealVector<Real>& curvature, Real radius)
{
    const auto m = static_cast<Index>(idx.size());
    ComplexVector<Real> delta(m);
    RealVector<Real> d(m);
    for (Index j = 0; j < m; ++j)
    {
        const Index n = idx[static_cast<std::size_t>(j)];
        delta(j)      = g(n) - center(j);
        d(j)          = curvature(n);
    }
    if (delta.norm() <= radius)
    {
        return;
    }
    auto shrunk_norm = [&](Real lambda) {
        Real acc = Real(0);
        for (Index j = 0; j < m; ++j)
        {
            const Real f = d(j) > Real(0) ? d(j) / (d(j) + lambda) : Real(0);
            acc += f * f * std::norm(delta(j));
        }
        return std::sqrt(acc);
    };
    Real lambda = Real(0);
    if (radius > Real(0))
    {
        Real lo = Real(0);
        Real hi = std::max(d.maxCoeff(), Real(1));
        while (shrunk_norm(hi) > radius)
        {
            hi *= Real(2);
        }
        for (int it = 0; it < 200 && hi - lo > Real(1e-15) * hi; ++it)
        {
            const Real mid = Real(0.5) * (lo + hi);
            (shrunk_norm(mid) > radius ? lo : hi) = mid;
        }
        lambda = hi;
    }
    for (Index j = 0; j < m; ++j)
    {
        const Index n = idx[static_cast<std::size_t>(j)];
        const Real f  = (radius > Real(0) && d(j) > Real(0)) ? d(j) / (d(j) + lambda) : Real(0);
        g(n)          = center(j) + f * delta(j);
    }
}

/// Euclidean projection of the observed coordinates onto the ball.
template <typename Real>
void ball_projection(ComplexVector<Real>& g, const std::vector<Index>& idx,
                     const ComplexVector<Real>& center, Real radius)
{
    Real acc = Real(0);
    for (std::size_t j = 0; j < idx.size(); ++j)
    {
        acc += std::norm(g(idx[j]) - center(static_cast<Index>(j)));
    }
    const Real dist = std::sqrt(acc);
    if (dist <= radius)
    {
        return;
    }
    const Real f = radius / dist;
    for (std::size_t j = 0; j < idx.size(); ++j)
    {
        const Complex<Real> c = center(static_cast<Index>(j));
        g(idx[j])             = c + f * (g(idx[j]) - c);
    }
}

} // namespace detail

///
/// Complete the lifted signal from the observed entries in `omega`
/// (`omega.values` must hold the observations).
///
/// Observations are rescaled internally to unit RMS so that the default
/// penalty and tolerances are scale-free; the returned estimate, residuals
/// and objective are in the original units. In noiseless mode the observed
/// coordinates of the estimate are copied from the input, so the equality
/// constraint holds bit-exactly.
///
template <typename Real>
CompletionResult<Real> complete(const LiftingBasis<Real>& basis,
                                const WeightPair<Real>& weights,
                                const SampleSet<Real>& omega,
                                const CompletionMode<Real>& mode = CompletionMode<Real>::noiseless(),
                                const SolverConfig<Real>& config = SolverConfig<Real>{})
{
    config.validate();
    omega.validate();
    if (omega.size() == 0)
    {
        throw std::invalid_argument("complete: empty sample set");
    }
    if (omega.universe != basis.size())
    {
        throw std::invalid_argument("complete: sample set universe does not match basis");
    }
    if (omega.values.size() != omega.size())
    {
        throw std::invalid_argument("complete: sample set carries no observed values");
    }
    if (!omega.values.allFinite() || !std::isfinite(mode.eta) || mode.eta < Real(0))
    {
        throw std::invalid_argument("complete: non-finite observations or noise bound");
    }

    const Index n                      = basis.size();
    const detail::WeightedLift<Real> op(basis, weights);
    const std::vector<Index>& observed = omega.indices;
    const std::vector<Index> free      = omega.complement();

    for (Index k : free)
    {
        if (!(op.gram_diag()(k) > Real(0)))
        {
            throw NumericalError("complete: singular weighted normal equations "
                                 "(weights vanish on an unobserved sample)");
        }
    }

    // rescale observations to unit RMS
    Real scale = omega.values.norm() / std::sqrt(static_cast<Real>(omega.size()));
    if (!(scale > Real(0)))
    {
        scale = Real(1);
    }
    const ComplexVector<Real> obs = omega.values / scale;
    const Real radius =
        mode.noisy ? std::sqrt(static_cast<Real>(omega.size())) * mode.eta / scale : Real(0);

    ComplexVector<Real> g = ComplexVector<Real>::Zero(n);
    for (std::size_t j = 0; j < observed.size(); ++j)
    {
        g(observed[j]) = obs(static_cast<Index>(j));
    }

    Real rho                 = config.rho;
    ComplexMatrix<Real> z    = op.apply(g);
    ComplexMatrix<Real> dual = ComplexMatrix<Real>::Zero(z.rows(), z.cols());
    const Real lip           = op.diagonal() ? Real(0) : op.lipschitz();

    // g-update: minimize ||B(g) - target||_F^2 over the constraint set
    auto update_g = [&](const ComplexMatrix<Real>& target) {
        if (op.diagonal())
        {
            const ComplexVector<Real> rhs = op.adjoint(target);
            for (Index k : free)
            {
                g(k) = rhs(k) / op.gram_diag()(k);
            }
            if (mode.noisy)
            {
                for (Index k : observed)
                {
                    g(k) = rhs(k) / op.gram_diag()(k);
                }
                detail::weighted_ball_projection(g, observed, obs, op.gram_diag(), radius);
            }
            return;
        }
        if (!mode.noisy)
        {
            // CG on the free coordinates, warm-started from the current g
            auto restrict = [&](const ComplexVector<Real>& full) {
                ComplexVector<Real> out = ComplexVector<Real>::Zero(n);
                for (Index k : free)
                {
                    out(k) = full(k);
                }
                return out;
            };
            ComplexVector<Real> r = restrict(op.adjoint(target - op.apply(g)));
            ComplexVector<Real> p = r;
            Real rr               = r.squaredNorm();
            const Real stop       = Real(1e-28) * std::max(Real(1), op.adjoint(target).squaredNorm());
            for (Index it = 0; it < config.inner_iters && rr > stop; ++it)
            {
                const ComplexVector<Real> ap = restrict(op.adjoint(op.apply(p)));
                const Real pap               = std::real(p.dot(ap));
                if (!(pap > Real(0)))
                {
                    throw NumericalError("complete: singular weighted normal equations");
                }
                const Real alpha = rr / pap;
                g += alpha * p;
                r -= alpha * ap;
                const Real rr_next = r.squaredNorm();
                p                  = r + (rr_next / rr) * p;
                rr                 = rr_next;
            }
            return;
        }
        // accelerated projected gradient for the ball constraint
        const Real step        = Real(1) / lip;
        ComplexVector<Real> x  = g;
        ComplexVector<Real> yk = g;
        Real t                 = Real(1);
        for (Index it = 0; it < config.inner_iters; ++it)
        {
            ComplexVector<Real> next = yk - step * op.adjoint(op.apply(yk) - target);
            detail::ball_projection(next, observed, obs, radius);
            const Real t_next = Real(0.5) * (Real(1) + std::sqrt(Real(1) + Real(4) * t * t));
            yk                = next + ((t - Real(1)) / t_next) * (next - x);
            x                 = next;
            t                 = t_next;
        }
        g = x;
    };

    CompletionResult<Real> result;
    ComplexMatrix<Real> bg;
    Real primal = Real(0);
    Real dualr  = Real(0);
    Index iter  = 0;
    for (; iter < config.max_iters; ++iter)
    {
        update_g(z - dual);
        bg                         = op.apply(g);
        const ComplexMatrix<Real> z_prev = z;
        Real nuc                   = Real(0);
        z                          = svt(bg + dual, Real(1) / rho, &nuc);
        dual += bg - z;

        primal = (bg - z).norm();
        dualr  = rho * op.adjoint(z - z_prev).norm();
        if (config.record_trace)
        {
            result.objective_trace.push_back(nuc * scale);
        }

        const Real eps_pri  = config.abs_tol + config.rel_tol * std::max(bg.norm(), z.norm());
        const Real eps_dual = config.abs_tol + config.rel_tol * rho * op.adjoint(dual).norm();
        if (primal <= eps_pri && dualr <= eps_dual)
        {
            result.converged = true;
            ++iter;
            break;
        }
        if (config.adapt_rho)
        {
            if (primal > Real(10) * dualr)
            {
                rho *= Real(2);
                dual /= Real(2);
            }
            else if (dualr > Real(10) * primal)
            {
                rho /= Real(2);
                dual *= Real(2);
            }
        }
    }

    result.iterations      = iter;
    result.primal_residual = primal * scale;
    result.dual_residual   = dualr * scale;
    result.estimate        = g * scale;
    if (!mode.noisy)
    {
        for (std::size_t j = 0; j < observed.size(); ++j)
        {
            result.estimate(observed[j]) = omega.values(static_cast<Index>(j));
        }
    }
    else
    {
        detail::ball_projection(result.estimate, observed, omega.values,
                                std::sqrt(static_cast<Real>(omega.size())) * mode.eta);
    }
    result.objective = nuclear_norm<Real>(weights.apply(lift(basis, result.estimate)));
    return result;
}

} // namespace wli

#endif /* WLI_SOLVER_HPP */
