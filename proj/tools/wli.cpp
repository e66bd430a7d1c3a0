// wli: command-line front end for lifting, scores, completion and sweeps.
//
// Every subcommand resolves its parameters as
//     defaults <- --config FILE <- explicit flags <- --set key=value
// and, when an output path is given, writes the resolved parameters next to
// it as <out>.config.json. Feeding that file back with --config reproduces
// the run. Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include <wli/experiments.hpp>
#include <wli/io.hpp>
#include <wli/lifting.hpp>
#include <wli/scores.hpp>
#include <wli/signal.hpp>
#include <wli/solver.hpp>
#include <wli/weights.hpp>

using namespace wli;

namespace
{

std::string fmt_fixed(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

std::string fmt_sci(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", x);
    return buf;
}

struct UsageError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

// One subcommand: its defaults, the flags that map onto config keys, and the
// common --config/--set/--out options.
struct Command
{
    std::string name;
    CLI::App* app = nullptr;
    json defaults;
    std::vector<std::pair<std::string, std::string>> flag_keys; // (flag, json pointer)
    std::map<std::string, std::string> flag_values;
    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
    std::string echo_config;

    void flag(const std::string& option, const std::string& key, const std::string& help)
    {
        flag_keys.emplace_back(option, key);
        app->add_option(option, flag_values[option], help);
    }
};

json parse_value(const std::string& raw, const json& like)
{
    if (like.is_string())
    {
        return raw;
    }
    try
    {
        return json::parse(raw);
    }
    catch (const json::parse_error&)
    {
        throw UsageError("cannot parse value '" + raw + "'");
    }
}

void assign(json& config, const std::string& key, const std::string& raw)
{
    const json::json_pointer ptr("/" + [&] {
        std::string p = key;
        for (auto& c : p)
        {
            if (c == '.')
            {
                c = '/';
            }
        }
        return p;
    }());
    if (!config.contains(ptr))
    {
        throw UsageError("unknown key '" + key + "'");
    }
    config[ptr] = parse_value(raw, config[ptr]);
}

// Overlay `patch` on `base`; every key must already exist.
void overlay(json& base, const json& patch, const std::string& where)
{
    if (!patch.is_object())
    {
        throw UsageError(where + ": expected a JSON object");
    }
    for (const auto& item : patch.items())
    {
        if (!base.contains(item.key()))
        {
            throw UsageError(where + ": unknown key '" + item.key() + "'");
        }
        json& slot = base[item.key()];
        if (slot.is_object())
        {
            overlay(slot, item.value(), where + "." + item.key());
        }
        else
        {
            slot = item.value();
        }
    }
}

json resolve(const Command& cmd)
{
    json config = cmd.defaults;
    if (!cmd.config_path.empty())
    {
        overlay(config, read_json_file(cmd.config_path), cmd.config_path);
    }
    for (const auto& [option, key] : cmd.flag_keys)
    {
        if (cmd.app->count(option) > 0)
        {
            assign(config, key, cmd.flag_values.at(option));
        }
    }
    for (const auto& s : cmd.sets)
    {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
        {
            throw UsageError("--set expects key=value, got '" + s + "'");
        }
        assign(config, s.substr(0, eq), s.substr(eq + 1));
    }
    return config;
}

void echo(const Command& cmd, const json& config)
{
    if (!cmd.echo_config.empty())
    {
        write_json_file(config, cmd.echo_config);
    }
    else if (!cmd.out.empty())
    {
        write_json_file(config, cmd.out + ".config.json");
    }
}

// Output to --out if given, else stdout.
class Sink
{
public:
    explicit Sink(const std::string& path)
    {
        if (!path.empty())
        {
            m_file = std::make_unique<std::ofstream>(path);
            if (!*m_file)
            {
                throw IoError("cannot open '" + path + "' for writing");
            }
        }
    }
    std::ostream& stream()
    {
        return m_file ? *m_file : std::cout;
    }

private:
    std::unique_ptr<std::ofstream> m_file;
};

Index pencil_of(const json& c, Structure s, Index n)
{
    const Index d = c.at("d").get<Index>();
    return d > 0 ? d : default_pencil(s, n);
}

// Mixture, signal and sample set from either files or the seeded generator.
struct Instance
{
    Mixture<double> mixture;
    ComplexVector<double> signal;
    SampleSet<double> omega;
};

Instance make_instance(const json& c, bool need_samples)
{
    Instance inst;
    const auto seed = c.at("seed").get<std::uint64_t>();
    const auto path = c.at("mixture").get<std::string>();
    Index n         = c.at("n").get<Index>();
    const Index k   = c.at("k").get<Index>();
    Index m         = need_samples ? c.at("m").get<Index>() : n;
    if (path.empty())
    {
        auto drawn  = draw_instance(n, k, std::min(m, n), seed, c.value("min_separation", 0.0));
        inst.mixture = drawn.mixture;
        inst.signal  = drawn.signal;
        inst.omega   = drawn.omega;
    }
    else
    {
        std::ifstream in(path);
        if (!in)
        {
            throw IoError("cannot open '" + path + "' for reading");
        }
        inst.mixture = read_mixture(in, path);
        n            = inst.mixture.n_samples;
        inst.signal  = synthesize(inst.mixture);
        if (need_samples)
        {
            inst.omega = observe(sample_uniform_m<double>(n, std::min(m, n), seed), inst.signal);
        }
    }
    if (need_samples)
    {
        const auto samples = c.at("samples").get<std::string>();
        if (!samples.empty())
        {
            std::ifstream in(samples);
            if (!in)
            {
                throw IoError("cannot open '" + samples + "' for reading");
            }
            inst.omega = observe(read_indices(in, n, samples), inst.signal);
        }
        const double eta = c.at("eta").get<double>();
        if (eta > 0.0)
        {
            const auto noisy = add_noise(inst.signal, NoiseSpec<double>{eta, noise_seed(seed)});
            inst.omega       = observe(inst.omega, noisy);
        }
    }
    return inst;
}

json instance_defaults()
{
    return {{"structure", "hankel"}, {"n", 59}, {"d", 0},          {"k", 2},       {"m", 40},
            {"seed", 1},             {"eta", 0.0}, {"mixture", ""}, {"samples", ""}, {"min_separation", 0.0}};
}

void instance_flags(Command& cmd, bool samples)
{
    cmd.flag("--structure", "structure", "hankel | double-hankel");
    cmd.flag("--n", "n", "signal length N");
    cmd.flag("--d", "d", "pencil parameter (0 = square-ish default)");
    cmd.flag("--k", "k", "number of exponentials K");
    cmd.flag("--seed", "seed", "instance seed");
    cmd.flag("--mixture", "mixture", "mixture file instead of a random draw");
    cmd.flag("--min-separation", "min_separation", "frequency separation floor for random draws");
    if (samples)
    {
        cmd.flag("--m", "m", "number of samples M");
        cmd.flag("--eta", "eta", "noise amplitude bound (0 = noiseless)");
        cmd.flag("--samples", "samples", "file of 1-based sample indices");
    }
}

// --- subcommands ------------------------------------------------------------

int run_synth(const Command& cmd)
{
    const json c = resolve(cmd);
    echo(cmd, c);
    const auto seed = c.at("seed").get<std::uint64_t>();
    const auto n    = c.at("n").get<Index>();
    const auto k    = c.at("k").get<Index>();
    const auto m    = c.at("m").get<Index>();
    const auto inst = draw_instance(n, k, std::min(m, n), seed, c.at("min_separation").get<double>());

    Sink sink(cmd.out);
    write_mixture(inst.mixture, sink.stream());

    const auto signal_path = c.at("signal_out").get<std::string>();
    if (!signal_path.empty())
    {
        const double eta = c.at("eta").get<double>();
        const auto y     = eta > 0.0 ? add_noise(inst.signal, NoiseSpec<double>{eta, noise_seed(seed)}) : inst.signal;
        std::ofstream out(signal_path);
        if (!out)
        {
            throw IoError("cannot open '" + signal_path + "' for writing");
        }
        write_complex_vector(y, out);
    }
    const auto samples_path = c.at("samples_out").get<std::string>();
    if (!samples_path.empty())
    {
        std::ofstream out(samples_path);
        if (!out)
        {
            throw IoError("cannot open '" + samples_path + "' for writing");
        }
        write_indices(inst.omega, out);
    }
    return 0;
}

int run_scores(const Command& cmd)
{
    const json c = resolve(cmd);
    echo(cmd, c);
    const auto inst  = make_instance(c, false);
    const auto s     = structure_from_string(c.at("structure").get<std::string>());
    const Index n    = inst.mixture.n_samples;
    const auto basis = make_basis<double>(s, n, pencil_of(c, s, n));

    const auto weights_path = c.at("weights").get<std::string>();
    ScoreVector<double> scores;
    if (weights_path.empty())
    {
        scores = leverage_scores(basis, subspace_of(basis, inst.signal));
    }
    else
    {
        const auto w = weights_from_json(read_json_file(weights_path));
        scores       = weighted_leverage_scores(basis, w, weighted_subspace_of(basis, w, inst.signal));
    }
    Sink sink(cmd.out);
    auto& out = sink.stream();
    out << "# rank " << scores.rank_used << " max " << fmt_fixed(scores.values.maxCoeff()) << " R_L "
        << fmt_fixed(lifting_coefficient(basis)) << '\n';
    write_scores(scores.values, out);
    return 0;
}

int run_complete(const Command& cmd)
{
    const json c = resolve(cmd);
    echo(cmd, c);
    const auto inst   = make_instance(c, true);
    const auto s      = structure_from_string(c.at("structure").get<std::string>());
    const Index n     = inst.mixture.n_samples;
    const auto basis  = make_basis<double>(s, n, pencil_of(c, s, n));
    const auto solver = solver_config_from_json(c.at("solver"));
    const double eta  = c.at("eta").get<double>();
    const auto mode   = eta > 0.0 ? CompletionMode<double>::with_noise(eta) : CompletionMode<double>::noiseless();
    const auto weighting = weighting_from_string(c.at("weighting").get<std::string>());

    CompletionResult<double> result;
    bool accepted = false;
    if (weighting == Weighting::Identity)
    {
        result = complete(basis, identity_weights<double>(basis.rows(), basis.cols()), inst.omega, mode, solver);
    }
    else
    {
        auto two = two_stage_pipeline(basis, inst.omega, mode, solver,
                                      tuning_config_from_json(c.at("tuning")));
        accepted = two.stage2_accepted;
        result   = std::move(two.result);
    }
    const double err = relative_error(inst.signal, result.estimate);
    std::cout << "rel_error " << fmt_sci(err) << '\n'
              << "success " << (err <= solver.success_threshold ? "true" : "false") << '\n'
              << "iterations " << result.iterations << '\n'
              << "converged " << (result.converged ? "true" : "false") << '\n'
              << "objective " << fmt_fixed(result.objective) << '\n';
    if (weighting == Weighting::TwoStage)
    {
        std::cout << "stage2_accepted " << (accepted ? "true" : "false") << '\n';
    }
    if (!cmd.out.empty())
    {
        Sink sink(cmd.out);
        write_complex_vector(result.estimate, sink.stream());
    }
    return 0;
}

int run_tune(const Command& cmd)
{
    const json c = resolve(cmd);
    echo(cmd, c);
    const auto inst   = make_instance(c, true);
    const auto s      = structure_from_string(c.at("structure").get<std::string>());
    const Index n     = inst.mixture.n_samples;
    const auto basis  = make_basis<double>(s, n, pencil_of(c, s, n));
    const auto tuning = tuning_config_from_json(c.at("tuning"));
    const auto pilot_source = c.at("pilot").get<std::string>();

    SubspacePair<double> pilot;
    if (pilot_source == "oracle")
    {
        pilot = subspace_of(basis, inst.signal);
    }
    else if (pilot_source == "stage1")
    {
        const auto stage1 = complete(basis, identity_weights<double>(basis.rows(), basis.cols()), inst.omega,
                                     CompletionMode<double>::noiseless(), solver_config_from_json(c.at("solver")));
        pilot = subspace_of(basis, stage1.estimate, tuning.pilot_rank_tol);
    }
    else
    {
        throw UsageError("pilot must be 'stage1' or 'oracle'");
    }
    const auto result = tune_diagonal_weights(basis, inst.omega, pilot, tuning);
    std::cout << "pilot_rank " << pilot.rank() << '\n'
              << "initial_objective " << fmt_fixed(result.initial_objective) << '\n'
              << "final_objective " << fmt_fixed(result.final_objective) << '\n'
              << "sweeps " << result.sweeps << '\n'
              << "improved " << (result.improved ? "true" : "false") << '\n';
    if (result.fell_back)
    {
        std::cerr << "warning: singular Gram during tuning, identity weights returned\n";
    }
    if (!cmd.out.empty())
    {
        write_json_file(weights_to_json(result.weights), cmd.out);
    }
    return 0;
}

int run_phase(const Command& cmd, bool full, unsigned threads, bool quiet)
{
    Command local = cmd;
    if (full)
    {
        local.defaults      = to_json(PhaseGrid::full());
        local.defaults["d"] = 0;
    }
    json c = resolve(local);
    if (cmd.out.empty())
    {
        throw UsageError("phase requires --out");
    }
    // d = 0 means the default pencil for the chosen structure
    if (c.at("d").get<Index>() == 0)
    {
        c["d"] = default_pencil(structure_from_string(c.at("structure").get<std::string>()), c.at("n").get<Index>());
    }
    const auto grid = phase_grid_from_json(c);
    echo(cmd, c);
    ProgressFn progress;
    if (!quiet)
    {
        progress = [](Index done, Index total) {
            if (done == total || done % 50 == 0)
            {
                std::cerr << "\r" << done << "/" << total << (done == total ? "\n" : "") << std::flush;
            }
        };
    }
    const auto surface = phase_transition(grid, threads, progress);
    emit_dat(surface, cmd.out);
    return 0;
}

int run_noise_sweep(const Command& cmd)
{
    json c = resolve(cmd);
    if (c.at("d").get<Index>() == 0)
    {
        c["d"] = default_pencil(structure_from_string(c.at("structure").get<std::string>()), c.at("n").get<Index>());
    }
    const auto spec = noise_sweep_from_json(c);
    echo(cmd, c);
    const auto result = noise_sweep(spec);
    Sink sink(cmd.out);
    auto& out = sink.stream();
    out << "eta mean_error max_error\n";
    for (const auto& row : result.rows)
    {
        out << fmt_sci(row.eta) << ' ' << fmt_sci(row.mean_error) << ' ' << fmt_sci(row.max_error) << '\n';
    }
    out << "# slope " << fmt_fixed(result.slope) << '\n';
    return 0;
}

int run_validate_basis(const Command& cmd)
{
    const json c = resolve(cmd);
    echo(cmd, c);
    const auto s      = structure_from_string(c.at("structure").get<std::string>());
    const Index n     = c.at("n").get<Index>();
    const auto basis  = make_basis<double>(s, n, pencil_of(c, s, n));
    const auto report = validate_basis(basis, c.at("tol").get<double>());
    Sink sink(cmd.out);
    auto& out = sink.stream();
    for (const auto& check : report.checks)
    {
        out << (check.pass ? "PASS " : "FAIL ") << check.name;
        if (!check.pass && check.first_offender)
        {
            out << " (element " << *check.first_offender + 1 << ")";
        }
        out << '\n';
    }
    return report.all_pass() ? 0 : 2;
}

void common_options(Command& cmd)
{
    cmd.app->add_option("--config", cmd.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd.app->add_option("--set", cmd.sets, "override a config key, e.g. --set solver.max_iters=500");
    cmd.app->add_option("--out", cmd.out, "output path");
    cmd.app->add_option("--echo-config", cmd.echo_config, "write the resolved config here");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Weighted lifted completion for harmonic retrieval"};
    app.require_subcommand(1);

    std::map<std::string, Command> commands;
    auto add = [&](const std::string& name, const std::string& help, json defaults) -> Command& {
        Command& cmd = commands[name];
        cmd.name     = name;
        cmd.app      = app.add_subcommand(name, help);
        cmd.defaults = std::move(defaults);
        common_options(cmd);
        return cmd;
    };

    {
        json d = instance_defaults();
        d.erase("structure");
        d.erase("d");
        d.erase("mixture");
        d.erase("samples");
        d["signal_out"]  = "";
        d["samples_out"] = "";
        auto& cmd = add("synth", "draw a random unit mixture (written to --out or stdout)", d);
        cmd.flag("--n", "n", "signal length N");
        cmd.flag("--k", "k", "number of exponentials K");
        cmd.flag("--m", "m", "number of samples M for --samples-out");
        cmd.flag("--seed", "seed", "seed");
        cmd.flag("--eta", "eta", "noise amplitude bound for --signal-out");
        cmd.flag("--min-separation", "min_separation", "frequency separation floor");
        cmd.flag("--signal-out", "signal_out", "write the N samples (Re Im per line)");
        cmd.flag("--samples-out", "samples_out", "write M uniform 1-based sample indices");
    }
    {
        json d = instance_defaults();
        d.erase("m");
        d.erase("eta");
        d.erase("samples");
        d["weights"] = "";
        auto& cmd = add("scores", "leverage scores of a mixture's lift", d);
        instance_flags(cmd, false);
        cmd.flag("--weights", "weights", "JSON weight pair for weighted scores");
    }
    {
        json d        = instance_defaults();
        d["weighting"] = "identity";
        d["solver"]    = to_json(SolverConfig<double>{});
        d["tuning"]    = to_json(TuningConfig<double>{});
        auto& cmd = add("complete", "complete one instance and report the relative error", d);
        instance_flags(cmd, true);
        cmd.flag("--weighting", "weighting", "identity | two-stage");
        cmd.flag("--max-iters", "solver/max_iters", "solver iteration cap");
    }
    {
        json d     = instance_defaults();
        d["pilot"]  = "stage1";
        d["solver"] = to_json(SolverConfig<double>{});
        d["tuning"] = to_json(TuningConfig<double>{});
        auto& cmd = add("tune", "tune diagonal weights for one instance (JSON to --out)", d);
        instance_flags(cmd, true);
        cmd.flag("--pilot", "pilot", "stage1 | oracle");
    }
    bool full_grid = false;
    bool quiet     = false;
    unsigned threads = 0;
    {
        json d = to_json(PhaseGrid::desk());
        d["d"] = 0;
        auto& cmd = add("phase", "phase-transition sweep over (M, K), written as a .dat mesh", d);
        cmd.flag("--structure", "structure", "hankel | double-hankel");
        cmd.flag("--weighting", "weighting", "identity | two-stage");
        cmd.flag("--n", "n", "signal length N");
        cmd.flag("--d", "d", "pencil parameter (0 = default)");
        cmd.flag("--trials", "trials", "trials per cell");
        cmd.flag("--base-seed", "base_seed", "base seed");
        cmd.flag("--sample-counts", "sample_counts", "JSON list of M values");
        cmd.flag("--sparsity-levels", "sparsity_levels", "JSON list of K values");
        cmd.app->add_flag("--full", full_grid, "start from the full grid (19 M values, K up to 20, 100 trials)");
        cmd.app->add_option("--threads", threads, "worker threads (default: WLI_THREADS or all cores)");
        cmd.app->add_flag("--quiet", quiet, "no progress on stderr");
    }
    {
        json d = to_json(NoiseSweepSpec{});
        d["d"] = 0;
        auto& cmd = add("noise-sweep", "mean lifted-domain error against the noise bound", d);
        cmd.flag("--structure", "structure", "hankel | double-hankel");
        cmd.flag("--n", "n", "signal length N");
        cmd.flag("--d", "d", "pencil parameter (0 = default)");
        cmd.flag("--k", "k", "number of exponentials K");
        cmd.flag("--m", "m", "number of samples M");
        cmd.flag("--trials", "trials", "noise realizations per eta");
        cmd.flag("--seed", "seed", "instance seed");
        cmd.flag("--etas", "etas", "JSON list of noise bounds");
    }
    {
        json d = {{"structure", "hankel"}, {"n", 59}, {"d", 0}, {"tol", 1e-12}};
        auto& cmd = add("validate-basis", "check the lifting-basis conditions", d);
        cmd.flag("--structure", "structure", "hankel | double-hankel");
        cmd.flag("--n", "n", "signal length N");
        cmd.flag("--d", "d", "pencil parameter (0 = default)");
        cmd.flag("--tol", "tol", "tolerance");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try
    {
        for (auto& [name, cmd] : commands)
        {
            if (!cmd.app->parsed())
            {
                continue;
            }
            if (name == "synth")
                return run_synth(cmd);
            if (name == "scores")
                return run_scores(cmd);
            if (name == "complete")
                return run_complete(cmd);
            if (name == "tune")
                return run_tune(cmd);
            if (name == "phase")
                return run_phase(cmd, full_grid, threads, quiet);
            if (name == "noise-sweep")
                return run_noise_sweep(cmd);
            if (name == "validate-basis")
                return run_validate_basis(cmd);
        }
    }
    catch (const NumericalError& e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    catch (const json::exception& e)
    {
        std::cerr << "error: bad config value: " << e.what() << '\n';
        return 1;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
