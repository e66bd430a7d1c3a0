#include <wli/experiments.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <wli/signal.hpp>

namespace wli
{

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// separate streams for the mixture and the sample set of one trial
constexpr std::uint64_t sample_stream = 0x5a3c1e0f7b2d4a69ULL;
constexpr std::uint64_t noise_stream  = 0x2f6b8d0e4c1a3957ULL;

} // namespace

std::string to_string(Weighting w)
{
    return w == Weighting::Identity ? "identity" : "two-stage";
}

Weighting weighting_from_string(const std::string& name)
{
    if (name == "identity")
    {
        return Weighting::Identity;
    }
    if (name == "two-stage" || name == "two_stage")
    {
        return Weighting::TwoStage;
    }
    throw std::invalid_argument("unknown weighting '" + name + "'");
}

void TrialSetup::validate() const
{
    if (n < 2 || d < 1 || d > n)
    {
        throw std::invalid_argument("TrialSetup: require n >= 2 and 1 <= d <= n");
    }
    if (structure == Structure::Custom)
    {
        throw std::invalid_argument("TrialSetup: structure must be hankel or double-hankel");
    }
    if (!(min_separation >= 0.0))
    {
        throw std::invalid_argument("TrialSetup: min_separation must be nonnegative");
    }
    solver.validate();
    tuning.validate();
}

Index default_pencil(Structure structure, Index n)
{
    if (n < 2)
    {
        throw std::invalid_argument("default_pencil: require n >= 2");
    }
    if (structure == Structure::DoubleHankel)
    {
        return (2 * (n + 1) + 1) / 3;
    }
    return (n + 1) / 2;
}

TrialInstance draw_instance(Index n, Index k, Index m, std::uint64_t seed, double min_separation)
{
    if (m < 0 || m > n)
    {
        throw std::invalid_argument("draw_instance: require 0 <= m <= n");
    }
    TrialInstance inst;
    inst.mixture = random_unit_mixture<double>(n, k, seed, min_separation);
    inst.signal  = synthesize(inst.mixture);
    inst.omega   = observe(sample_uniform_m<double>(n, m, splitmix64(seed ^ sample_stream)), inst.signal);
    return inst;
}

std::uint64_t noise_seed(std::uint64_t seed, Index trial)
{
    return splitmix64(seed ^ noise_stream ^ static_cast<std::uint64_t>(trial));
}

TrialOutcome run_trial(const TrialSetup& setup, Index m, Index k, std::uint64_t seed)
{
    if (m < 0 || m > setup.n)
    {
        throw std::invalid_argument("run_trial: require 0 <= m <= n");
    }
    if (k < 1)
    {
        throw std::invalid_argument("run_trial: require k >= 1");
    }

    TrialOutcome out;
    try
    {
        const auto basis = make_basis<double>(setup.structure, setup.n, setup.d);
        const auto inst  = draw_instance(setup.n, k, m, seed, setup.min_separation);
        const auto& y     = inst.signal;
        const auto& omega = inst.omega;

        CompletionResult<double> result;
        if (setup.weighting == Weighting::Identity)
        {
            result = complete(basis, identity_weights<double>(basis.rows(), basis.cols()), omega,
                              CompletionMode<double>::noiseless(), setup.solver);
        }
        else
        {
            auto two = two_stage_pipeline(basis, omega, CompletionMode<double>::noiseless(),
                                          setup.solver, setup.tuning);
            out.stage2_accepted = two.stage2_accepted;
            result              = std::move(two.result);
        }
        out.rel_error  = relative_error(y, result.estimate);
        out.iterations = result.iterations;
        out.success    = out.rel_error <= setup.solver.success_threshold;
    }
    catch (const NumericalError&)
    {
        out         = TrialOutcome{};
        out.status  = TrialStatus::Numerical;
        out.rel_error = std::numeric_limits<double>::infinity();
    }
    catch (const std::invalid_argument&)
    {
        throw;
    }
    catch (const std::exception&)
    {
        out           = TrialOutcome{};
        out.status    = TrialStatus::Failed;
        out.rel_error = std::numeric_limits<double>::infinity();
    }
    return out;
}

void PhaseGrid::validate() const
{
    setup.validate();
    if (trials < 1)
    {
        throw std::invalid_argument("PhaseGrid: trials must be >= 1");
    }
    if (sample_counts.empty() || sparsity_levels.empty())
    {
        throw std::invalid_argument("PhaseGrid: empty M or K list");
    }
    for (Index m : sample_counts)
    {
        if (m < 0 || m > setup.n)
        {
            throw std::invalid_argument("PhaseGrid: every M must lie in [0, n]");
        }
    }
    for (Index k : sparsity_levels)
    {
        if (k < 1)
        {
            throw std::invalid_argument("PhaseGrid: every K must be >= 1");
        }
    }
}

PhaseGrid PhaseGrid::desk()
{
    PhaseGrid g;
    for (Index m = 5; m <= 55; m += 5)
    {
        g.sample_counts.push_back(m);
    }
    for (Index k = 1; k <= 10; ++k)
    {
        g.sparsity_levels.push_back(k);
    }
    g.trials = 20;
    return g;
}

PhaseGrid PhaseGrid::full()
{
    PhaseGrid g;
    for (Index m = 2; m <= 56; m += 3)
    {
        g.sample_counts.push_back(m);
    }
    for (Index k = 1; k <= 20; ++k)
    {
        g.sparsity_levels.push_back(k);
    }
    g.trials = 100;
    return g;
}

std::uint64_t trial_seed(std::uint64_t base_seed, Index m, Index k, Index trial)
{
    std::uint64_t h = splitmix64(base_seed);
    h               = splitmix64(h ^ static_cast<std::uint64_t>(m));
    h               = splitmix64(h ^ static_cast<std::uint64_t>(k));
    return splitmix64(h ^ static_cast<std::uint64_t>(trial));
}

double SuccessSurface::rate(Index m, Index k) const
{
    const auto& ms = grid.sample_counts;
    const auto& ks = grid.sparsity_levels;
    const auto mi  = std::find(ms.begin(), ms.end(), m);
    const auto ki  = std::find(ks.begin(), ks.end(), k);
    if (mi == ms.end() || ki == ks.end())
    {
        throw std::out_of_range("SuccessSurface: cell not in grid");
    }
    return rates(ki - ks.begin(), mi - ms.begin());
}

unsigned default_thread_count()
{
    if (const char* env = std::getenv("WLI_THREADS"))
    {
        char* end        = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && value >= 1)
        {
            return static_cast<unsigned>(value);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SuccessSurface phase_transition(const PhaseGrid& grid, unsigned threads, const ProgressFn& progress)
{
    grid.validate();
    const Index n_m   = static_cast<Index>(grid.sample_counts.size());
    const Index n_k   = static_cast<Index>(grid.sparsity_levels.size());
    const Index total = n_m * n_k * grid.trials;

    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(total));
    std::atomic<Index> next{0};
    std::atomic<Index> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (Index task = next++; task < total; task = next++)
        {
            const Index cell  = task / grid.trials;
            const Index trial = task % grid.trials;
            const Index m     = grid.sample_counts[static_cast<std::size_t>(cell % n_m)];
            const Index k     = grid.sparsity_levels[static_cast<std::size_t>(cell / n_m)];
            outcomes[static_cast<std::size_t>(task)] =
                run_trial(grid.setup, m, k, trial_seed(grid.base_seed, m, k, trial));
            const Index finished = ++done;
            if (progress)
            {
                std::lock_guard<std::mutex> lock(progress_mutex);
                progress(finished, total);
            }
        }
    };

    const unsigned count = std::max(1u, std::min<unsigned>(threads == 0 ? default_thread_count() : threads,
                                                           static_cast<unsigned>(total)));
    if (count == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::jthread> pool;
        pool.reserve(count);
        for (unsigned t = 0; t < count; ++t)
        {
            pool.emplace_back(worker);
        }
    }

    SuccessSurface surface;
    surface.grid            = grid;
    surface.rates           = Eigen::MatrixXd::Zero(n_k, n_m);
    surface.errors          = Eigen::MatrixXi::Zero(n_k, n_m);
    surface.stage2_accepted = Eigen::MatrixXi::Zero(n_k, n_m);
    for (Index task = 0; task < total; ++task)
    {
        const Index cell = task / grid.trials;
        const Index mi   = cell % n_m;
        const Index ki   = cell / n_m;
        const auto& o    = outcomes[static_cast<std::size_t>(task)];
        surface.rates(ki, mi) += o.success ? 1.0 : 0.0;
        surface.errors(ki, mi) += o.status != TrialStatus::Ok ? 1 : 0;
        surface.stage2_accepted(ki, mi) += o.stage2_accepted ? 1 : 0;
    }
    surface.rates /= static_cast<double>(grid.trials);
    return surface;
}

void NoiseSweepSpec::validate() const
{
    if (n < 2 || d < 1 || d > n || k < 1 || m < 1 || m > n || trials < 1)
    {
        throw std::invalid_argument("NoiseSweepSpec: require 1 <= m <= n, 1 <= d <= n, k >= 1, trials >= 1");
    }
    if (etas.empty())
    {
        throw std::invalid_argument("NoiseSweepSpec: empty eta list");
    }
    for (double eta : etas)
    {
        if (!(eta >= 0.0) || !std::isfinite(eta))
        {
            throw std::invalid_argument("NoiseSweepSpec: eta must be finite and nonnegative");
        }
    }
    solver.validate();
}

SolverConfig<double> NoiseSweepSpec::precise_solver()
{
    SolverConfig<double> c;
    c.max_iters = 4000;
    c.abs_tol   = 1e-12;
    c.rel_tol   = 1e-9;
    return c;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size())
    {
        throw std::invalid_argument("loglog_slope: size mismatch");
    }
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        if (x[i] > 0.0 && y[i] > 0.0)
        {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.size() < 2)
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double count = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        mx += lx[i];
        my += ly[i];
    }
    mx /= count;
    my /= count;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

NoiseSweepResult noise_sweep(const NoiseSweepSpec& spec)
{
    spec.validate();
    const auto basis   = make_basis<double>(spec.structure, spec.n, spec.d);
    const auto inst    = draw_instance(spec.n, spec.k, spec.m, spec.seed);
    const auto& y      = inst.signal;
    const auto lifted  = lift(basis, y);
    const auto weights = identity_weights<double>(basis.rows(), basis.cols());

    NoiseSweepResult result;
    std::vector<double> xs;
    std::vector<double> ys;
    for (double eta : spec.etas)
    {
        NoiseSweepRow row;
        row.eta = eta;
        for (Index t = 0; t < spec.trials; ++t)
        {
            const NoiseSpec<double> noise{eta, noise_seed(spec.seed, t)};
            const auto omega = observe(inst.omega, add_noise(y, noise));
            const auto mode  = eta > 0.0 ? CompletionMode<double>::with_noise(eta)
                                         : CompletionMode<double>::noiseless();
            const auto r     = complete(basis, weights, omega, mode, spec.solver);
            const double err = (lift(basis, r.estimate) - lifted).norm();
            row.mean_error += err;
            row.max_error = std::max(row.max_error, err);
        }
        row.mean_error /= static_cast<double>(spec.trials);
        result.rows.push_back(row);
        xs.push_back(eta);
        ys.push_back(row.mean_error);
    }
    result.slope = loglog_slope(xs, ys);
    return result;
}

} // namespace wli
