// Acceptance suite: one PASS/FAIL line per criterion, exit status = number of
// failures. Set WLI_THREADS to control the worker pool of the sweeps.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <wli/experiments.hpp>
#include <wli/scores.hpp>
#include <wli/solver.hpp>

using namespace wli;
using cd = std::complex<double>;

namespace
{

// pinned tolerances
constexpr double lift_tol         = 1e-12;
constexpr double score_tol        = 1e-10;
constexpr double bound_slack      = 1e-10;
constexpr int easy_min_success    = 90; // of 100, (M, K) = (40, 2)
constexpr int hard_max_success    = 5;  // of 100, (M, K) = (5, 15)
constexpr Index band_trials       = 50;
constexpr double max_noise_slope  = 1.1;
constexpr double max_clean_error  = 1e-6;
constexpr double optimality_slack = 1e-6;
constexpr int perturbations       = 200;

struct Band
{
    Index m, k;
};
// K = ceil(M^2/200 + 0.5) +- 1 for M in {20, 30, 40}
const std::vector<Band> band = {{20, 2}, {20, 4}, {30, 4}, {30, 6}, {40, 8}, {40, 10}};

struct Verdict
{
    bool pass = false;
    std::string detail;
};

ComplexVector<double> random_vector(Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    ComplexVector<double> x(n);
    for (Index i = 0; i < n; ++i)
    {
        x(i) = {g(rng), g(rng)};
    }
    return x;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Verdict lifting_correctness()
{
    std::mt19937_64 rng(1);
    double worst = 0.0;
    bool valid   = true;
    for (const auto& b : {hankel_basis<double>(59, 30), double_hankel_basis<double>(59, 40)})
    {
        valid = valid && validate_basis(b).all_pass();
        for (int t = 0; t < 100; ++t)
        {
            const auto x = random_vector(59, rng);
            worst        = std::max(worst, (adjoint(b, lift(b, x)) - x).cwiseAbs().maxCoeff());
        }
    }
    return {valid && worst <= lift_tol, fmt("max |L+(L(x)) - x| = %.3e, basis checks ", worst) +
                                            (valid ? "pass" : "fail")};
}

Verdict leverage_equivalence()
{
    const auto b3   = hankel_basis<double>(3, 2);
    const auto mu3  = leverage_scores(b3, subspace_of(b3, ComplexVector<double>::Ones(3).eval()));
    const double e3 = (mu3.values.array() - 1.5).abs().maxCoeff();

    const auto b    = hankel_basis<double>(59, 30);
    const auto id   = identity_weights<double>(30, 30);
    double max_prod = 0.0;
    double max_diff = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s)
    {
        const Index k  = 1 + static_cast<Index>(s % 6);
        const auto sub = subspace_of(b, synthesize(random_unit_mixture<double>(59, k, s)));
        const auto mu  = leverage_scores(b, sub);
        const auto wmu = weighted_leverage_scores(b, id, sub);
        for (Index n = 0; n < 59; ++n)
        {
            max_prod = std::max(max_prod, mu(n) * static_cast<double>(b.support(n)));
        }
        max_diff = std::max(max_diff, (mu.values - wmu.values).cwiseAbs().maxCoeff());
    }
    const bool pass = e3 <= score_tol && max_prod <= 59.0 * (1 + bound_slack) && max_diff <= score_tol;
    return {pass, fmt("all-ones error %.3e, max mu*omega = %.4f (N = 59), weighted-unweighted %.3e", e3, max_prod,
                      max_diff)};
}

Verdict appendix_bounds()
{
    const auto b     = hankel_basis<double>(59, 30);
    const auto id    = identity_weights<double>(30, 30);
    const double rl  = lifting_coefficient(b);
    double worst_inf = 0.0;
    double worst_2   = 0.0; // ||F0||_{A,2}^2 / (2 K R_L)
    for (std::uint64_t s = 0; s < 50; ++s)
    {
        const Index k  = 1 + static_cast<Index>(s % 6);
        const auto sub = subspace_of(b, synthesize(random_unit_mixture<double>(59, k, 100 + s)));
        const auto mu  = weighted_leverage_scores(b, id, sub);
        const auto f0  = sign_matrix(id, sub);
        worst_inf      = std::max(worst_inf, a_norm_inf(b, mu, f0));
        const double a2 = a_norm_2(b, mu, f0);
        worst_2         = std::max(worst_2, a2 * a2 / (2.0 * static_cast<double>(sub.rank()) * rl));
    }
    return {worst_inf <= 1 + bound_slack && worst_2 <= 1 + bound_slack,
            fmt("max ||F0||_A,inf = %.4f, max ||F0||_A,2^2 / (2 K R_L) = %.4f", worst_inf, worst_2)};
}

SuccessSurface cell(const TrialSetup& setup, Index m, Index k, Index trials, std::uint64_t seed)
{
    PhaseGrid g;
    g.setup           = setup;
    g.sample_counts   = {m};
    g.sparsity_levels = {k};
    g.trials          = trials;
    g.base_seed       = seed;
    return phase_transition(g);
}

int successes(const SuccessSurface& s)
{
    return static_cast<int>(std::lround(s.rates(0, 0) * static_cast<double>(s.grid.trials)));
}

Verdict exact_recovery()
{
    TrialSetup setup;
    const int easy = successes(cell(setup, 40, 2, 100, 4));
    const int hard = successes(cell(setup, 5, 15, 100, 4));
    return {easy >= easy_min_success && hard <= hard_max_success,
            fmt("(40,2): %.0f/100 (need >= 90), (5,15): %.0f/100 (need <= 5)", easy, hard)};
}

struct BandCounts
{
    int hankel_identity  = 0;
    int hankel_two_stage = 0;
    int double_identity  = 0;
    int stage2_accepted  = 0;
    std::string per_cell;
};

BandCounts band_counts()
{
    BandCounts c;
    TrialSetup hankel;
    TrialSetup two_stage = hankel;
    two_stage.weighting  = Weighting::TwoStage;
    TrialSetup dh;
    dh.structure = Structure::DoubleHankel;
    dh.d         = default_pencil(Structure::DoubleHankel, dh.n);

    for (const auto& [m, k] : band)
    {
        const int a = successes(cell(hankel, m, k, band_trials, 11));
        const auto ts = cell(two_stage, m, k, band_trials, 11);
        const int b   = successes(ts);
        const int d   = successes(cell(dh, m, k, band_trials, 11));
        c.hankel_identity += a;
        c.hankel_two_stage += b;
        c.double_identity += d;
        c.stage2_accepted += ts.stage2_accepted(0, 0);
        char buf[128];
        std::snprintf(buf, sizeof buf, "    (M=%ld,K=%ld) identity %d, two-stage %d, double-hankel %d\n",
                      static_cast<long>(m), static_cast<long>(k), a, b, d);
        c.per_cell += buf;
    }
    return c;
}

Verdict noise_trend()
{
    const auto r        = noise_sweep(NoiseSweepSpec{});
    const double clean  = r.rows.front().eta == 0.0 ? r.rows.front().mean_error : NAN;
    std::string detail  = fmt("slope %.4f (need <= 1.1), eta=0 lifted error %.3e", r.slope, clean);
    for (const auto& row : r.rows)
    {
        detail += fmt("; eta %.0e: %.3e", row.eta, row.mean_error);
    }
    return {r.slope <= max_noise_slope && clean <= max_clean_error, detail};
}

Verdict constant_saturation()
{
    const auto b    = hankel_basis<double>(59, 30);
    const double rl = lifting_coefficient(b);
    double min_p    = 1.0;
    for (std::uint64_t s = 0; s < 20; ++s)
    {
        const auto sub = subspace_of(b, synthesize(random_unit_mixture<double>(59, 2, 200 + s)));
        const auto p   = probability_floor(leverage_scores(b, sub), rl, 59, 2, 3.0);
        min_p          = std::min(min_p, p.minCoeff());
    }
    return {min_p == 1.0, fmt("min p_n = %.6f over 20 mixtures (K=2, b1=3, R_L=%.4f)", min_p, rl)};
}

Verdict local_optimality()
{
    const auto b    = hankel_basis<double>(7, 4);
    const auto inst = draw_instance(7, 1, 5, 3);
    SolverConfig<double> cfg;
    cfg.max_iters = 20000;
    cfg.abs_tol   = 1e-12;
    cfg.rel_tol   = 1e-10;
    const auto r  = complete(b, identity_weights<double>(4, 4), inst.omega, CompletionMode<double>::noiseless(), cfg);
    const double f = nuclear_norm<double>(lift(b, r.estimate));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> log_scale(-4.0, 0.0);
    const auto free = inst.omega.complement();
    double worst    = std::numeric_limits<double>::infinity();
    for (int t = 0; t < perturbations; ++t)
    {
        ComplexVector<double> g = r.estimate;
        auto dir                = random_vector(static_cast<Index>(free.size()), rng);
        dir *= std::pow(10.0, log_scale(rng)) * r.estimate.norm() / dir.norm();
        for (std::size_t i = 0; i < free.size(); ++i)
        {
            g(free[i]) += dir(static_cast<Index>(i));
        }
        worst = std::min(worst, nuclear_norm<double>(lift(b, g)) - f);
    }
    return {worst >= -optimality_slack,
            fmt("objective %.6f, min perturbed - returned = %.3e over 200 feasible points", f, worst)};
}

int failures = 0;

void report(int id, const char* name, double budget_s, const std::function<Verdict()>& run, double prior_s = 0.0)
{
    const auto t0  = std::chrono::steady_clock::now();
    Verdict v      = run();
    const double s =
        prior_s + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok  = v.pass && s <= budget_s;
    failures += ok ? 0 : 1;
    std::printf("%s %d %s: %s [%.1f s, budget %.0f s]\n", ok ? "PASS" : "FAIL", id, name, v.detail.c_str(), s,
                budget_s);
    std::fflush(stdout);
}

} // namespace

int main()
{
    std::printf("acceptance suite, %u worker thread(s)\n", default_thread_count());
    report(1, "lifting correctness", 5, lifting_correctness);
    report(2, "leverage-score equivalence", 10, leverage_equivalence);
    report(3, "appendix bounds", 30, appendix_bounds);
    report(4, "exact recovery regression", 15 * 60, exact_recovery);

    BandCounts counts;
    double band_seconds = 0.0;
    {
        const auto t0 = std::chrono::steady_clock::now();
        counts        = band_counts();
        band_seconds  = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("boundary band, %ld trials per cell:\n%s", static_cast<long>(band_trials),
                    counts.per_cell.c_str());
    }
    report(5, "weighted vs unweighted", 45 * 60, [&] {
        return Verdict{counts.hankel_two_stage >= counts.hankel_identity,
                       fmt("two-stage %.0f vs identity %.0f successes; stage 2 kept in %.0f trials",
                           counts.hankel_two_stage, counts.hankel_identity, counts.stage2_accepted)};
    }, band_seconds);
    report(6, "structure comparison", 45 * 60, [&] {
        return Verdict{counts.double_identity >= counts.hankel_identity,
                       fmt("double-hankel %.0f vs hankel %.0f successes", counts.double_identity,
                           counts.hankel_identity)};
    }, band_seconds);
    report(7, "noise trend", 10 * 60, noise_trend);
    report(8, "sample-complexity constant saturates", 1, constant_saturation);
    report(9, "solver local optimality", 30, local_optimality);

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
