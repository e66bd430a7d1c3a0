#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <wli/experiments.hpp>
#include <wli/solver.hpp>

using namespace wli;
using cd = std::complex<double>;

TEST_CASE("svt")
{
    ComplexMatrix<double> d = ComplexMatrix<double>::Zero(2, 2);
    d(0, 0)                 = 3.0;
    d(1, 1)                 = 1.0;
    const auto s            = svt(d, 2.0);
    CHECK(std::abs(s(0, 0) - cd(1.0)) < 1e-12);
    CHECK(std::abs(s(1, 1)) < 1e-12);
    CHECK(std::abs(s(0, 1)) < 1e-12);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    ComplexMatrix<double> m(5, 4);
    for (Index i = 0; i < m.size(); ++i)
    {
        m.data()[i] = {g(rng), g(rng)};
    }
    CHECK((svt(m, 0.0) - m).norm() < 1e-12);
    CHECK(svt(m, 1e3).norm() == 0.0);

    double nuc = 0.0;
    const auto shrunk = svt(m, 0.5, &nuc);
    CHECK(nuc == doctest::Approx(nuclear_norm<double>(shrunk)).epsilon(1e-12));
}

TEST_CASE("relative_error")
{
    ComplexVector<double> y(3);
    y << cd(1, 2), cd(-1, 0), cd(0, 3);
    CHECK(relative_error(y, y) == 0.0);
    CHECK(relative_error(y, ComplexVector<double>::Zero(3).eval()) == doctest::Approx(1.0));
    ComplexVector<double> u(3);
    u << cd(0, 1), cd(3, 0), cd(-1, 1);
    u *= y.norm() / u.norm();
    CHECK(relative_error(y, (y + 1e-4 * u).eval()) == doctest::Approx(1e-4));
    CHECK_THROWS_AS(relative_error(ComplexVector<double>::Zero(3).eval(), y), std::invalid_argument);
}

TEST_CASE("complete: fully observed returns the data")
{
    for (const auto& b : {hankel_basis<double>(59, 30), double_hankel_basis<double>(59, 40)})
    {
        const auto inst = draw_instance(59, 4, 59, 9);
        const auto r    = complete(b, identity_weights<double>(b.rows(), b.cols()), inst.omega);
        CHECK(r.estimate == inst.signal);
        CHECK(r.iterations <= 5);
    }
}

TEST_CASE("complete: single exponential from 8 of 15 samples")
{
    const auto b = hankel_basis<double>(15, 8);
    int ok       = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        const auto inst = draw_instance(15, 1, 8, seed);
        const auto r    = complete(b, identity_weights<double>(8, 8), inst.omega);
        ok += relative_error(inst.signal, r.estimate) <= 1e-3 ? 1 : 0;
    }
    CHECK(ok == 10);
}

TEST_CASE("complete: noiseless constraint is bit-exact, residuals within tolerance")
{
    const auto b    = hankel_basis<double>(59, 30);
    const auto inst = draw_instance(59, 3, 30, 4);
    SolverConfig<double> cfg;
    const auto r = complete(b, identity_weights<double>(30, 30), inst.omega, CompletionMode<double>::noiseless(), cfg);
    CHECK(project(r.estimate, inst.omega) == inst.omega.values);
    if (r.converged)
    {
        CHECK(r.iterations < cfg.max_iters);
    }
    CHECK(r.objective == doctest::Approx(nuclear_norm<double>(lift(b, r.estimate))).epsilon(1e-9));
}

TEST_CASE("complete: noisy mode stays inside the ball")
{
    const auto b     = hankel_basis<double>(59, 30);
    const auto inst  = draw_instance(59, 2, 40, 6);
    const double eta = 1e-2;
    const auto noisy = observe(inst.omega, add_noise(inst.signal, NoiseSpec<double>{eta, 1}));
    SolverConfig<double> cfg;
    const auto r = complete(b, identity_weights<double>(30, 30), noisy, CompletionMode<double>::with_noise(eta), cfg);
    CHECK((project(r.estimate, noisy) - noisy.values).norm() <= std::sqrt(40.0) * eta + cfg.abs_tol);
    CHECK(relative_error(inst.signal, r.estimate) < 0.05);

    // eta = 0 in noisy mode matches the noiseless solve
    const auto r0 = complete(b, identity_weights<double>(30, 30), inst.omega, CompletionMode<double>::with_noise(0.0));
    const auto r1 = complete(b, identity_weights<double>(30, 30), inst.omega);
    CHECK(relative_error(r1.estimate, r0.estimate) < 1e-5);
}

TEST_CASE("complete: diagonal and general weight paths agree")
{
    const auto b    = hankel_basis<double>(21, 11);
    const auto inst = draw_instance(21, 2, 14, 2);
    RealVector<double> l = RealVector<double>::LinSpaced(11, 0.5, 1.5);
    RealVector<double> r = RealVector<double>::LinSpaced(11, 1.2, 0.7);
    const auto wd = WeightPair<double>::diagonal(l, r);
    const auto wg = WeightPair<double>::general(l.cast<cd>().asDiagonal(), r.cast<cd>().asDiagonal());
    SolverConfig<double> cfg;
    cfg.max_iters = 5000;
    const auto a  = complete(b, wd, inst.omega, CompletionMode<double>::noiseless(), cfg);
    const auto g  = complete(b, wg, inst.omega, CompletionMode<double>::noiseless(), cfg);
    CHECK(relative_error(a.estimate, g.estimate) < 1e-4);
}

TEST_CASE("complete: double-Hankel recovers a boundary instance")
{
    const auto b    = double_hankel_basis<double>(59, 40);
    const auto inst = draw_instance(59, 4, 20, 1001);
    const auto r    = complete(b, identity_weights<double>(40, 40), inst.omega);
    CHECK(relative_error(inst.signal, r.estimate) <= 1e-3);
}

TEST_CASE("complete: input checks")
{
    const auto b    = hankel_basis<double>(21, 11);
    auto inst       = draw_instance(21, 2, 10, 1);
    auto empty      = inst.omega;
    empty.indices.clear();
    empty.values.resize(0);
    CHECK_THROWS_AS(complete(b, identity_weights<double>(11, 11), empty), std::invalid_argument);

    auto nan_values      = inst.omega;
    nan_values.values(0) = cd(std::nan(""), 0);
    CHECK_THROWS_AS(complete(b, identity_weights<double>(11, 11), nan_values), std::invalid_argument);

    CHECK_THROWS_AS(complete(hankel_basis<double>(22, 11), identity_weights<double>(11, 12), inst.omega),
                    std::invalid_argument);

    SolverConfig<double> bad;
    bad.max_iters = 0;
    CHECK_THROWS_AS(complete(b, identity_weights<double>(11, 11), inst.omega, CompletionMode<double>::noiseless(), bad),
                    std::invalid_argument);
}

TEST_CASE("complete: iteration exhaustion is not an error")
{
    const auto b    = hankel_basis<double>(59, 30);
    const auto inst = draw_instance(59, 10, 20, 3);
    SolverConfig<double> cfg;
    cfg.max_iters = 3;
    const auto r  = complete(b, identity_weights<double>(30, 30), inst.omega, CompletionMode<double>::noiseless(), cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
}

TEST_CASE("complete: objective trace")
{
    const auto b    = hankel_basis<double>(21, 11);
    const auto inst = draw_instance(21, 2, 12, 5);
    SolverConfig<double> cfg;
    cfg.record_trace = true;
    const auto r     = complete(b, identity_weights<double>(11, 11), inst.omega, CompletionMode<double>::noiseless(), cfg);
    CHECK(static_cast<Index>(r.objective_trace.size()) == r.iterations);
}
