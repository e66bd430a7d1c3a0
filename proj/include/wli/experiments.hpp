///
/// \file experiments.hpp
///
/// Monte-Carlo harness: single trials, (M, K) phase-transition grids and the
/// noise sweep. Runs in double precision.
///
#ifndef WLI_EXPERIMENTS_HPP
#define WLI_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <wli/lifting.hpp>
#include <wli/signal.hpp>
#include <wli/solver.hpp>
#include <wli/types.hpp>
#include <wli/weights.hpp>

namespace wli
{

enum class Weighting
{
    Identity,
    TwoStage
};

std::string to_string(Weighting w);
Weighting weighting_from_string(const std::string& name);

/// Everything a trial needs apart from (M, K, seed).
struct TrialSetup
{
    Index n                = 59;
    Structure structure    = Structure::Hankel;
    Index d                = 30;
    Weighting weighting    = Weighting::Identity;
    double min_separation  = 0.0; // frequency separation floor, 0 = none
    SolverConfig<double> solver;
    TuningConfig<double> tuning;

    void validate() const;
};

enum class TrialStatus
{
    Ok        = 0,
    Numerical = 1, // NumericalError inside the solve
    Failed    = 2  // any other exception
};

struct TrialOutcome
{
    bool success          = false;
    double rel_error      = 0.0;
    TrialStatus status    = TrialStatus::Ok;
    bool stage2_accepted  = false; // two-stage only
    Index iterations      = 0;
};

/// Square-ish default pencil: (n + 1) / 2 for Hankel, round(2 (n + 1) / 3)
/// for double-Hankel (30 and 40 at n = 59).
Index default_pencil(Structure structure, Index n);

struct TrialInstance
{
    Mixture<double> mixture;
    ComplexVector<double> signal;
    SampleSet<double> omega; // observed noiseless values
};

/// Random unit mixture and uniform M-subset, both derived from `seed`.
TrialInstance draw_instance(Index n, Index k, Index m, std::uint64_t seed, double min_separation = 0.0);

/// Seed for the noise realization that goes with draw_instance(..., seed).
std::uint64_t noise_seed(std::uint64_t seed, Index trial = 0);

/// Draw an instance from `seed`, complete, threshold the relative error.
TrialOutcome run_trial(const TrialSetup& setup, Index m, Index k, std::uint64_t seed);

struct PhaseGrid
{
    TrialSetup setup;
    std::vector<Index> sample_counts;   // M values
    std::vector<Index> sparsity_levels; // K values
    Index trials            = 20;
    std::uint64_t base_seed = 1;

    void validate() const;

    /// M in {5,10,...,55}, K in {1,...,10}, 20 trials.
    static PhaseGrid desk();
    /// M in {2,5,...,56} (19 columns), K in {1,...,20}, 100 trials.
    static PhaseGrid full();
};

/// Trial seed as a hash of (base seed, M, K, trial).
std::uint64_t trial_seed(std::uint64_t base_seed, Index m, Index k, Index trial);

struct SuccessSurface
{
    PhaseGrid grid;
    /// rates(ki, mi) for K = sparsity_levels[ki], M = sample_counts[mi]
    Eigen::MatrixXd rates;
    /// trials that ended in an exception, per cell (same layout)
    Eigen::MatrixXi errors;
    /// two-stage trials whose weighted estimate was kept, per cell
    Eigen::MatrixXi stage2_accepted;

    double rate(Index m, Index k) const;
};

/// Thread count from WLI_THREADS, else the hardware concurrency (>= 1).
unsigned default_thread_count();

using ProgressFn = std::function<void(Index done, Index total)>;

/// Deterministic in the grid; `threads == 0` picks default_thread_count().
SuccessSurface phase_transition(const PhaseGrid& grid, unsigned threads = 0,
                                const ProgressFn& progress = {});

struct NoiseSweepSpec
{
    Index n             = 59;
    Structure structure = Structure::Hankel;
    Index d             = 30;
    Index k             = 2;
    Index m             = 40;
    std::vector<double> etas{0.0, 1e-4, 1e-3, 1e-2};
    Index trials        = 20;
    std::uint64_t seed  = 7;
    SolverConfig<double> solver = precise_solver();

    void validate() const;

    /// Tighter tolerances than the phase-transition default; the eta = 0 row
    /// is compared against 1e-6 in the lifted domain.
    static SolverConfig<double> precise_solver();
};

struct NoiseSweepRow
{
    double eta        = 0.0;
    double mean_error = 0.0; // mean ||L(y_hat) - L(y)||_F
    double max_error  = 0.0;
};

struct NoiseSweepResult
{
    std::vector<NoiseSweepRow> rows;
    /// least-squares slope of log(mean_error) against log(eta) over eta > 0;
    /// NaN with fewer than two positive etas
    double slope = 0.0;
};

/// One instance (mixture and sample set) fixed across all etas; trials vary
/// the noise realization.
NoiseSweepResult noise_sweep(const NoiseSweepSpec& spec);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace wli

#endif /* WLI_EXPERIMENTS_HPP */
