///
/// \file weights.hpp
///
/// Data-adaptive diagonal weights and the two-stage (identity, then tuned)
/// completion pipeline.
///
/// The tuned weights approximately minimize the total weighted leverage
/// score of the unobserved samples,
///
///     f(W_L, W_R) = sum_{n not in Omega} mu~_n(W_L, W_R),
///
/// over diagonal W_L, W_R with ||W_L||_F = ||W_R||_F = 1 and entries >= eps.
/// The signal subspace comes from a pilot estimate (an identity-weight
/// completion, or the true signal in oracle studies); for invertible W the
/// subspaces of W_L L(x) W_R^H are range(W_L U) and range(W_R V), so no SVD
/// is needed per objective evaluation.
///
/// Minimization is by multiplicative coordinate descent: every sweep tries to
/// scale each diagonal entry (left, right, and the pair left(i), right(i)
/// together) up or down by exp(step) and keeps strict improvements. The step
/// halves whenever a sweep improves f by less than `rel_decrease`, and the
/// search stops once it falls below `min_step`.
///
/// The weighted re-solve is not trusted blindly. Pushing f down tends to
/// drive weights on rows crowded with missing samples toward eps, and the
/// weighted program then prefers completions far from the signal. The
/// pipeline therefore keeps the stage-2 estimate only when its lift has
/// strictly lower numerical rank than the stage-1 lift, and skips stage 2
/// when stage 1 is already pinned down (2 * rank <= number of samples).
///
#ifndef WLI_WEIGHTS_HPP
#define WLI_WEIGHTS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <wli/lifting.hpp>
#include <wli/scores.hpp>
#include <wli/signal.hpp>
#include <wli/solver.hpp>
#include <wli/types.hpp>
#include <wli/weight_pair.hpp>

namespace wli
{

template <typename Real = double>
struct TuningConfig
{
    Index max_iters   = 30; // sweeps
    Real epsilon      = Real(1e-3);
    Real rel_decrease = Real(1e-6);
    Real initial_step = Real(0.6931471805599453); // log 2
    Real min_step     = Real(0.02);
    /// Relative singular-value threshold for the pilot subspace; must sit
    /// above the solver's accuracy so solver residue is not counted as rank.
    Real pilot_rank_tol = Real(1e-4);

    void validate() const
    {
        if (max_iters < 1 || !(epsilon > 0) || !(rel_decrease > 0) || !(initial_step > 0) ||
            !(min_step > 0) || !(pilot_rank_tol > 0))
        {
            throw std::invalid_argument("TuningConfig: all parameters must be positive");
        }
    }
};

template <typename Real = double>
struct TuningResult
{
    WeightPair<Real> weights;
    Real initial_objective = Real(0);
    Real final_objective   = Real(0);
    Index sweeps           = 0;
    bool improved          = false; // false: identity weights returned
    bool fell_back         = false; // singular Gram during evaluation
    std::vector<Real> trace;        // objective after each sweep
};

/// sum_{n in unobserved} mu~_n for diagonal weights, given the pilot subspace.
template <typename Real>
Real unobserved_score_sum(const LiftingBasis<Real>& basis, const WeightPair<Real>& weights,
                          const SubspacePair<Real>& pilot, const std::vector<Index>& unobserved)
{
    const auto subspace = reweighted_subspace(pilot, weights);
    const auto scores   = weighted_leverage_scores(basis, weights, subspace);
    Real total          = Real(0);
    for (Index n : unobserved)
    {
        total += scores(n);
    }
    return total;
}

template <typename Real>
TuningResult<Real> tune_diagonal_weights(const LiftingBasis<Real>& basis,
                                         const SampleSet<Real>& omega,
                                         const SubspacePair<Real>& pilot,
                                         const TuningConfig<Real>& config = TuningConfig<Real>{})
{
    config.validate();
    if (omega.universe != basis.size())
    {
        throw std::invalid_argument("tune_diagonal_weights: sample set does not match basis");
    }
    if (pilot.left.rows() != basis.rows() || pilot.right.rows() != basis.cols())
    {
        throw std::invalid_argument("tune_diagonal_weights: pilot subspace does not match basis");
    }

    const Index d1 = basis.rows();
    const Index d2 = basis.cols();
    TuningResult<Real> result;
    result.weights = identity_weights<Real>(d1, d2);

    const std::vector<Index> unobserved = omega.complement();
    if (unobserved.empty())
    {
        return result;
    }

    RealVector<Real> left  = RealVector<Real>::Constant(d1, Real(1) / std::sqrt(Real(d1)));
    RealVector<Real> right = RealVector<Real>::Constant(d2, Real(1) / std::sqrt(Real(d2)));

    auto objective = [&](const RealVector<Real>& l, const RealVector<Real>& r) {
        return unobserved_score_sum(basis, WeightPair<Real>::diagonal(l, r), pilot, unobserved);
    };

    try
    {
        Real f                   = objective(left, right);
        result.initial_objective = f;
        result.final_objective   = f;
        Real step                = config.initial_step;

        // scale entry i by `factor`, renormalize, and reject if any entry < eps
        auto propose = [&](const RealVector<Real>& v, Index i, Real factor,
                           RealVector<Real>& out) {
            out = v;
            out(i) *= factor;
            out.normalize();
            return out.minCoeff() >= config.epsilon;
        };

        RealVector<Real> cand_left;
        RealVector<Real> cand_right;
        const Index shared = std::min(d1, d2);
        for (Index sweep = 0; sweep < config.max_iters; ++sweep)
        {
            const Real f_start = f;
            // move 0 scales left(i), move 1 right(i), move 2 both; the joint
            // move matters because the score is a max of a left and a right
            // term, which coincide for symmetric lifts
            for (int move = 0; move < 3; ++move)
            {
                const Index count = move == 0 ? d1 : (move == 1 ? d2 : shared);
                for (Index i = 0; i < count; ++i)
                {
                    for (Real factor : {std::exp(step), std::exp(-step)})
                    {
                        bool ok    = true;
                        cand_left  = left;
                        cand_right = right;
                        if (move != 1)
                        {
                            ok = ok && propose(left, i, factor, cand_left);
                        }
                        if (move != 0)
                        {
                            ok = ok && propose(right, i, factor, cand_right);
                        }
                        if (!ok)
                        {
                            continue;
                        }
                        const Real fc = objective(cand_left, cand_right);
                        if (fc < f)
                        {
                            f     = fc;
                            left  = cand_left;
                            right = cand_right;
                            break;
                        }
                    }
                }
            }
            result.trace.push_back(f);
            result.sweeps = sweep + 1;
            if (f_start - f < config.rel_decrease * std::abs(f_start))
            {
                step *= Real(0.5);
                if (step < config.min_step)
                {
                    break;
                }
            }
        }

        if (f < result.initial_objective)
        {
            result.weights         = WeightPair<Real>::diagonal(left, right);
            result.final_objective = f;
            result.improved        = true;
        }
    }
    catch (const NumericalError&)
    {
        result         = TuningResult<Real>{};
        result.weights = identity_weights<Real>(d1, d2);
        result.fell_back = true;
    }
    return result;
}

template <typename Real = double>
struct TwoStageResult
{
    WeightPair<Real> weights;       // weights of the returned estimate
    CompletionResult<Real> result;  // returned estimate (stage 1 or stage 2)
    CompletionResult<Real> stage1;
    CompletionResult<Real> stage2;  // weighted re-solve; empty when skipped
    TuningResult<Real> tuning;
    Index stage1_rank     = 0;
    Index stage2_rank     = 0;
    bool stage2_solved    = false;
    bool stage2_accepted  = false;
};

/// Numerical rank of the lift of `x` at relative threshold `tol`.
template <typename Real>
Index lifted_rank(const LiftingBasis<Real>& basis, const ComplexVector<Real>& x, Real tol)
{
    const RealVector<Real> s = Eigen::BDCSVD<ComplexMatrix<Real>>(lift(basis, x)).singularValues();
    if (s.size() == 0 || s(0) == Real(0))
    {
        return 0;
    }
    return static_cast<Index>((s.array() > tol * s(0)).count());
}

///
/// Identity-weight completion, subspace extraction from its lift, weight
/// tuning, and a weighted re-solve. The stage-1 estimate is returned (with
/// identity weights) when tuning fails or finds no improvement, when stage 1
/// is already determined by the samples, or when the weighted estimate is
/// not of strictly lower rank.
///
template <typename Real>
TwoStageResult<Real> two_stage_pipeline(const LiftingBasis<Real>& basis,
                                        const SampleSet<Real>& omega,
                                        const CompletionMode<Real>& mode = CompletionMode<Real>::noiseless(),
                                        const SolverConfig<Real>& solver = SolverConfig<Real>{},
                                        const TuningConfig<Real>& tuning = TuningConfig<Real>{})
{
    tuning.validate();
    TwoStageResult<Real> out;
    const auto identity = identity_weights<Real>(basis.rows(), basis.cols());
    out.weights         = identity;
    out.stage1          = complete(basis, identity, omega, mode, solver);
    out.result          = out.stage1;

    SubspacePair<Real> pilot;
    try
    {
        pilot = subspace_of(basis, out.stage1.estimate, tuning.pilot_rank_tol);
    }
    catch (const NumericalError&)
    {
        out.tuning.fell_back = true;
        return out;
    }
    out.stage1_rank = pilot.rank();
    if (2 * out.stage1_rank <= omega.size())
    {
        return out;
    }

    out.tuning = tune_diagonal_weights(basis, omega, pilot, tuning);
    if (!out.tuning.improved)
    {
        return out;
    }
    try
    {
        out.stage2 = complete(basis, out.tuning.weights, omega, mode, solver);
    }
    catch (const NumericalError&)
    {
        out.tuning.fell_back = true;
        return out;
    }
    out.stage2_solved = true;
    out.stage2_rank   = lifted_rank(basis, out.stage2.estimate, tuning.pilot_rank_tol);
    if (out.stage2_rank < out.stage1_rank)
    {
        out.stage2_accepted = true;
        out.result          = out.stage2;
        out.weights         = out.tuning.weights;
    }
    return out;
}

} // namespace wli

#endif /* WLI_WEIGHTS_HPP */
