#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <wli/experiments.hpp>
#include <wli/io.hpp>

using namespace wli;

namespace
{

PhaseGrid small_grid(std::vector<Index> ms, std::vector<Index> ks, Index trials)
{
    PhaseGrid g       = PhaseGrid::desk();
    g.sample_counts   = std::move(ms);
    g.sparsity_levels = std::move(ks);
    g.trials          = trials;
    return g;
}

std::vector<double> ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();)
    {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]])
        {
            ++j;
        }
        for (std::size_t t = i; t <= j; ++t)
        {
            r[order[t]] = 0.5 * static_cast<double>(i + j);
        }
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b)
{
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < ra.size(); ++i)
    {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    return (da == 0 || db == 0) ? 1.0 : num / std::sqrt(da * db);
}

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("wli_test_" + name)).string();
}

} // namespace

TEST_CASE("default_pencil and names")
{
    CHECK(default_pencil(Structure::Hankel, 59) == 30);
    CHECK(default_pencil(Structure::DoubleHankel, 59) == 40);
    CHECK(weighting_from_string("two-stage") == Weighting::TwoStage);
    CHECK(weighting_from_string("two_stage") == Weighting::TwoStage);
    CHECK(to_string(Weighting::Identity) == "identity");
    CHECK_THROWS_AS(weighting_from_string("oracle"), std::invalid_argument);
}

TEST_CASE("grids")
{
    const auto desk = PhaseGrid::desk();
    CHECK(desk.sample_counts.size() == 11);
    CHECK(desk.sample_counts.front() == 5);
    CHECK(desk.sample_counts.back() == 55);
    CHECK(desk.sparsity_levels.size() == 10);
    CHECK(desk.trials == 20);

    const auto full = PhaseGrid::full();
    CHECK(full.sample_counts.size() == 19);
    CHECK(full.sparsity_levels.size() == 20);
    CHECK(full.trials == 100);

    auto bad          = desk;
    bad.sample_counts = {60};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("draw_instance and seeds are deterministic")
{
    const auto a = draw_instance(59, 3, 20, 11);
    const auto b = draw_instance(59, 3, 20, 11);
    CHECK(a.signal == b.signal);
    CHECK(a.omega.indices == b.omega.indices);
    CHECK(a.omega.values == project(a.signal, a.omega));
    CHECK(draw_instance(59, 3, 20, 12).omega.indices != a.omega.indices);

    CHECK(trial_seed(1, 5, 2, 0) == trial_seed(1, 5, 2, 0));
    CHECK(trial_seed(1, 5, 2, 0) != trial_seed(1, 2, 5, 0));
    CHECK(trial_seed(1, 5, 2, 0) != trial_seed(1, 5, 2, 1));
    CHECK(noise_seed(3, 0) != noise_seed(3, 1));
}

TEST_CASE("run_trial")
{
    TrialSetup s;
    const auto ok = run_trial(s, 59, 3, 4);
    CHECK(ok.success);
    CHECK(ok.status == TrialStatus::Ok);
    CHECK(ok.rel_error == 0.0);

    const auto easy = run_trial(s, 40, 2, 4);
    CHECK(easy.success);
    CHECK(easy.rel_error <= 1e-3);

    const auto hard = run_trial(s, 5, 15, 4);
    CHECK_FALSE(hard.success);

    CHECK_THROWS_AS(run_trial(s, 0, 2, 1), std::invalid_argument);
}

TEST_CASE("phase_transition: full observation and thread independence")
{
    const auto one = phase_transition(small_grid({59}, {1}, 1), 1);
    REQUIRE(one.rates.rows() == 1);
    REQUIRE(one.rates.cols() == 1);
    CHECK(one.rates(0, 0) == 1.0);
    CHECK(one.rate(59, 1) == 1.0);

    std::ostringstream out;
    write_dat(one, out);
    CHECK(out.str() == "M K C\n59 1 1.000000\n");

    const auto g  = small_grid({10, 30}, {1, 2, 4}, 3);
    const auto s1 = phase_transition(g, 1);
    const auto s3 = phase_transition(g, 3);
    CHECK(s1.rates == s3.rates);
    CHECK(s1.errors == s3.errors);
    CHECK(phase_transition(g, 2).rates == s1.rates);
}

TEST_CASE("phase_transition: rates fall with K along a row")
{
    const auto g = small_grid({30}, {1, 3, 5, 8, 10}, 6);
    const auto s = phase_transition(g, 0);
    std::vector<double> k, rate;
    for (Index i = 0; i < s.rates.rows(); ++i)
    {
        k.push_back(static_cast<double>(g.sparsity_levels[static_cast<std::size_t>(i)]));
        rate.push_back(s.rates(i, 0));
    }
    CHECK(spearman(k, rate) <= -0.8);
    CHECK(s.rates(0, 0) == 1.0);
}

TEST_CASE(".dat round trip and validation")
{
    const auto g = small_grid({10, 30}, {1, 2, 3}, 2);
    const auto s = phase_transition(g, 1);

    std::ostringstream out;
    write_dat(s, out);
    std::istringstream in(out.str());
    const auto back = read_dat(in);
    REQUIRE(back.rates.rows() == 3);
    REQUIRE(back.rates.cols() == 2);
    CHECK(back.grid.sample_counts == g.sample_counts);
    CHECK(back.grid.sparsity_levels == g.sparsity_levels);
    CHECK((back.rates - s.rates).cwiseAbs().maxCoeff() <= 5e-7);

    // K-major rows: six of them, K constant over each block of M
    std::istringstream lines(out.str());
    std::string header, line;
    std::getline(lines, header);
    CHECK(header == "M K C");
    int rows = 0;
    while (std::getline(lines, line))
    {
        ++rows;
    }
    CHECK(rows == 6);

    std::istringstream bad_header("M C K\n10 1 1.0\n");
    CHECK_THROWS_AS(read_dat(bad_header), IoError);
    std::istringstream missing("M K C\n10 1 1.0\n30 1 1.0\n10 2 1.0\n");
    CHECK_THROWS_AS(read_dat(missing), IoError);
    std::istringstream swapped("M K C\n10 1 1.0\n10 2 1.0\n30 1 1.0\n30 2 1.0\n");
    CHECK_THROWS_AS(read_dat(swapped), IoError);

    const auto path = temp_path("surface.dat");
    emit_dat(s, path);
    CHECK(std::filesystem::exists(meta_path(path)));
    const auto meta = read_json_file(meta_path(path));
    CHECK(meta.at("columns") == 2);
    CHECK(meta.at("trials") == g.trials);
    CHECK(meta.at("sample_counts") == json(g.sample_counts));
    CHECK(parse_dat(path).rates == back.rates);
    std::filesystem::remove(path);
    std::filesystem::remove(meta_path(path));
}

TEST_CASE("json configs round trip and reject unknown keys")
{
    PhaseGrid g                 = PhaseGrid::desk();
    g.setup.structure           = Structure::DoubleHankel;
    g.setup.d                   = 40;
    g.setup.weighting           = Weighting::TwoStage;
    g.setup.solver.max_iters    = 123;
    g.setup.tuning.epsilon      = 0.01;
    g.trials                    = 7;
    g.base_seed                 = 99;
    const auto back             = phase_grid_from_json(to_json(g));
    CHECK(to_json(back) == to_json(g));
    CHECK(back.setup.structure == Structure::DoubleHankel);
    CHECK(back.setup.solver.max_iters == 123);

    NoiseSweepSpec n;
    n.etas = {1e-3, 1e-2};
    CHECK(to_json(noise_sweep_from_json(to_json(n))) == to_json(n));

    auto j        = to_json(g);
    j["trailz"]   = 3;
    CHECK_THROWS_AS(phase_grid_from_json(j), std::invalid_argument);
    auto js               = to_json(SolverConfig<double>{});
    js["tolerance"]       = 1.0;
    CHECK_THROWS_AS(solver_config_from_json(js), std::invalid_argument);
}

TEST_CASE("mixture, indices and weights files")
{
    const auto m = random_unit_mixture<double>(17, 3, 5);
    std::stringstream s;
    write_mixture(m, s);
    const auto back = read_mixture(s);
    CHECK(back.n_samples == 17);
    CHECK(back.coefficients == m.coefficients);
    CHECK(back.bases == m.bases);

    const auto omega = sample_uniform_m<double>(17, 6, 2);
    std::stringstream si;
    write_indices(omega, si);
    const auto oback = read_indices(si, 17);
    CHECK(oback.indices == omega.indices);

    std::istringstream dup("3\n3\n");
    CHECK_THROWS_AS(read_indices(dup, 17), IoError);
    std::istringstream range("18\n");
    CHECK_THROWS_AS(read_indices(range, 17), IoError);
    std::istringstream zero("0\n");
    CHECK_THROWS_AS(read_indices(zero, 17), IoError);

    RealVector<double> l(2), r(3);
    l << 0.25, 1.5;
    r << 1.0, 2.0, 0.125;
    const auto w  = WeightPair<double>::diagonal(l, r);
    const auto wb = weights_from_json(weights_to_json(w));
    CHECK(wb.left_diag() == l);
    CHECK(wb.right_diag() == r);
}

TEST_CASE("loglog_slope")
{
    CHECK(loglog_slope({1e-3, 1e-2, 1e-1}, {2e-3, 2e-2, 2e-1}) == doctest::Approx(1.0));
    CHECK(loglog_slope({1.0, 10.0}, {1.0, 100.0}) == doctest::Approx(2.0));
    // zeros are dropped
    CHECK(loglog_slope({0.0, 1.0, 10.0}, {5.0, 1.0, 10.0}) == doctest::Approx(1.0));
    CHECK(std::isnan(loglog_slope({0.0, 1.0}, {0.0, 1.0})));
}

TEST_CASE("noise_sweep: small instance")
{
    NoiseSweepSpec spec;
    spec.etas   = {0.0, 1e-3, 1e-2};
    spec.trials = 1;
    const auto r = noise_sweep(spec);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].mean_error <= 1e-6);
    CHECK(r.rows[2].mean_error / r.rows[1].mean_error <= 15.0);
    CHECK(r.slope == doctest::Approx(1.0).epsilon(0.2));
}
