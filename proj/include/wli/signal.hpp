///
/// \file signal.hpp
///
/// Exponential mixtures, bounded noise and random sampling patterns.
///
/// A mixture of K complex exponentials sampled on the uniform grid
/// n = 1, ..., N is
///
///     y_n = sum_k b_k z_k^n.
///
/// Sample indices are stored 0-based in memory (index j holds y_{j+1});
/// the text formats in io.hpp use 1-based indices.
///
#ifndef WLI_SIGNAL_HPP
#define WLI_SIGNAL_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <wli/types.hpp>

namespace wli
{

template <typename Real = double>
struct Mixture
{
    Index n_samples = 0;
    ComplexVector<Real> coefficients; // b_k
    ComplexVector<Real> bases;        // z_k

    Index order() const
    {
        return coefficients.size();
    }

    void validate() const
    {
        if (n_samples < 1)
        {
            throw std::invalid_argument("mixture: n_samples must be >= 1");
        }
        if (coefficients.size() < 1)
        {
            throw std::invalid_argument("mixture: at least one component required");
        }
        if (coefficients.size() != bases.size())
        {
            throw std::invalid_argument("mixture: coefficient/base count mismatch");
        }
        for (Index k = 0; k < bases.size(); ++k)
        {
            const auto z = bases(k);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) ||
                z == Complex<Real>(0))
            {
                throw std::invalid_argument("mixture: bases must be finite and nonzero");
            }
        }
    }
};

template <typename Real = double>
struct NoiseSpec
{
    Real amplitude_bound = Real(0); // eta
    std::uint64_t seed   = 0;
};

template <typename Real = double>
struct SampleSet
{
    Index universe = 0;
    std::vector<Index> indices; // strictly increasing, 0-based
    std::optional<RealVector<Real>> probabilities;
    ComplexVector<Real> values;

    Index size() const
    {
        return static_cast<Index>(indices.size());
    }

    bool contains(Index n) const
    {
        return std::binary_search(indices.begin(), indices.end(), n);
    }

    /// Indices of the unobserved entries, increasing.
    std::vector<Index> complement() const
    {
        std::vector<Index> out;
        out.reserve(static_cast<std::size_t>(universe - size()));
        auto it = indices.begin();
        for (Index n = 0; n < universe; ++n)
        {
            if (it != indices.end() && *it == n)
            {
                ++it;
            }
            else
            {
                out.push_back(n);
            }
        }
        return out;
    }

    void validate() const
    {
        if (universe < 1)
        {
            throw std::invalid_argument("sample set: universe must be >= 1");
        }
        for (std::size_t j = 0; j < indices.size(); ++j)
        {
            if (indices[j] < 0 || indices[j] >= universe)
            {
                throw std::out_of_range("sample set: index out of range");
            }
            if (j > 0 && indices[j] <= indices[j - 1])
            {
                throw std::invalid_argument("sample set: indices must be strictly increasing");
            }
        }
        if (values.size() != 0 && values.size() != size())
        {
            throw std::invalid_argument("sample set: value count does not match index count");
        }
        if (probabilities)
        {
            if (probabilities->size() != universe)
            {
                throw std::invalid_argument("sample set: probability vector length mismatch");
            }
            for (Index n = 0; n < universe; ++n)
            {
                const Real p = (*probabilities)(n);
                if (!(p > Real(0) && p <= Real(1)))
                {
                    throw std::invalid_argument("sample set: probabilities must lie in (0, 1]");
                }
            }
        }
    }
};

//------------------------------------------------------------------------------
// Operations
//------------------------------------------------------------------------------

///
/// Evaluate y_n = sum_k b_k z_k^n for n = 1..N.
///
/// Powers are formed by repeated multiplication, which for |z| = 1 keeps the
/// error growth linear in N.
///
template <typename Real>
ComplexVector<Real> synthesize(const Mixture<Real>& mixture)
{
    mixture.validate();
    ComplexVector<Real> y = ComplexVector<Real>::Zero(mixture.n_samples);
    for (Index k = 0; k < mixture.order(); ++k)
    {
        const Complex<Real> z = mixture.bases(k);
        Complex<Real> power   = z;
        for (Index n = 0; n < mixture.n_samples; ++n)
        {
            y(n) += mixture.coefficients(k) * power;
            power *= z;
        }
    }
    return y;
}

///
/// Add noise drawn uniformly on the complex disk of radius eta.
///
template <typename Real>
ComplexVector<Real> add_noise(const ComplexVector<Real>& y,
                              const NoiseSpec<Real>& spec)
{
    if (!(spec.amplitude_bound >= Real(0)))
    {
        throw std::invalid_argument("add_noise: amplitude bound must be nonnegative");
    }
    ComplexVector<Real> out = y;
    if (spec.amplitude_bound == Real(0))
    {
        return out;
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<Real> unit(Real(0), Real(1));
    for (Index n = 0; n < out.size(); ++n)
    {
        // sqrt(u) makes the radius density uniform in area; u < 1 so |e| < eta
        const Real radius = spec.amplitude_bound * std::sqrt(unit(rng));
        const Real angle  = Real(2) * std::numbers::pi_v<Real> * unit(rng);
        out(n) += std::polar(radius, angle);
    }
    return out;
}

///
/// Include each index n independently with probability p_n.
///
template <typename Real>
SampleSet<Real> sample_bernoulli(const RealVector<Real>& probabilities,
                                 std::uint64_t seed)
{
    const Index n = probabilities.size();
    if (n < 1)
    {
        throw std::invalid_argument("sample_bernoulli: empty probability vector");
    }
    for (Index i = 0; i < n; ++i)
    {
        const Real p = probabilities(i);
        if (!(p > Real(0) && p <= Real(1)))
        {
            throw std::invalid_argument("sample_bernoulli: probabilities must lie in (0, 1]");
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> unit(Real(0), Real(1));

    SampleSet<Real> out;
    out.universe      = n;
    out.probabilities = probabilities;
    for (Index i = 0; i < n; ++i)
    {
        if (unit(rng) < probabilities(i))
        {
            out.indices.push_back(i);
        }
    }
    return out;
}

///
/// Uniformly random subset of fixed cardinality m out of {0..n-1}.
///
template <typename Real = double>
SampleSet<Real> sample_uniform_m(Index n, Index m, std::uint64_t seed)
{
    if (n < 1 || m < 1 || m > n)
    {
        throw std::invalid_argument("sample_uniform_m: require 1 <= m <= n");
    }
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index(0));
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates: the first m slots are a uniform m-subset
    for (Index i = 0; i < m; ++i)
    {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(all[static_cast<std::size_t>(i)],
                  all[static_cast<std::size_t>(pick(rng))]);
    }
    SampleSet<Real> out;
    out.universe = n;
    out.indices.assign(all.begin(), all.begin() + m);
    std::sort(out.indices.begin(), out.indices.end());
    out.probabilities =
        RealVector<Real>::Constant(n, static_cast<Real>(m) / static_cast<Real>(n));
    return out;
}

/// Keep the entries of y listed in omega, in increasing index order.
template <typename Real>
ComplexVector<Real> project(const ComplexVector<Real>& y,
                            const SampleSet<Real>& omega)
{
    ComplexVector<Real> out(omega.size());
    for (Index j = 0; j < omega.size(); ++j)
    {
        const Index n = omega.indices[static_cast<std::size_t>(j)];
        if (n < 0 || n >= y.size())
        {
            throw std::out_of_range("project: sample index out of range");
        }
        out(j) = y(n);
    }
    return out;
}

/// Place observed values back into a length-N vector, zeros elsewhere.
template <typename Real>
ComplexVector<Real> embed_zeros(const ComplexVector<Real>& values,
                                const SampleSet<Real>& omega)
{
    if (values.size() != omega.size())
    {
        throw std::invalid_argument("embed_zeros: value count mismatch");
    }
    ComplexVector<Real> out = ComplexVector<Real>::Zero(omega.universe);
    for (Index j = 0; j < omega.size(); ++j)
    {
        out(omega.indices[static_cast<std::size_t>(j)]) = values(j);
    }
    return out;
}

/// Copy of `omega` carrying the observed values of `y`.
template <typename Real>
SampleSet<Real> observe(const SampleSet<Real>& omega,
                        const ComplexVector<Real>& y)
{
    SampleSet<Real> out = omega;
    out.values          = project(y, omega);
    return out;
}

///
/// Draw K bases uniformly on the unit circle and unit-modulus coefficients
/// with uniform phase. A positive `min_separation` rejects frequency draws
/// closer than that (wrap-around distance on [0,1)).
///
template <typename Real = double>
Mixture<Real> random_unit_mixture(Index n, Index k, std::uint64_t seed,
                                  Real min_separation = Real(0))
{
    if (n < 1 || k < 1)
    {
        throw std::invalid_argument("random_unit_mixture: require n >= 1 and k >= 1");
    }
    if (min_separation * static_cast<Real>(k) >= Real(1))
    {
        throw std::invalid_argument("random_unit_mixture: separation too large for k");
    }
    constexpr Real two_pi = Real(2) * std::numbers::pi_v<Real>;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> unit(Real(0), Real(1));

    std::vector<Real> freqs;
    freqs.reserve(static_cast<std::size_t>(k));
    while (static_cast<Index>(freqs.size()) < k)
    {
        const Real f = unit(rng);
        bool ok      = true;
        for (Real g : freqs)
        {
            const Real dist = std::abs(f - g);
            if (std::min(dist, Real(1) - dist) < min_separation)
            {
                ok = false;
                break;
            }
        }
        if (ok)
        {
            freqs.push_back(f);
        }
    }

    Mixture<Real> mix;
    mix.n_samples    = n;
    mix.coefficients.resize(k);
    mix.bases.resize(k);
    for (Index i = 0; i < k; ++i)
    {
        mix.bases(i)        = std::polar(Real(1), two_pi * freqs[static_cast<std::size_t>(i)]);
        mix.coefficients(i) = std::polar(Real(1), two_pi * unit(rng));
    }
    return mix;
}

} // namespace wli

#endif /* WLI_SIGNAL_HPP */
