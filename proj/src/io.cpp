#include <wli/io.hpp>

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <sstream>

namespace wli
{

namespace
{

void require_keys(const json& j, std::initializer_list<const char*> allowed, const char* what)
{
    if (!j.is_object())
    {
        throw std::invalid_argument(std::string(what) + ": expected a JSON object");
    }
    for (const auto& item : j.items())
    {
        bool known = false;
        for (const char* key : allowed)
        {
            known = known || item.key() == key;
        }
        if (!known)
        {
            throw std::invalid_argument(std::string(what) + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
void read_key(const json& j, const char* key, T& value)
{
    if (j.contains(key))
    {
        value = j.at(key).get<T>();
    }
}

std::string fixed6(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

std::string exact(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open '" + path + "' for reading");
    }
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
    {
        throw IoError("cannot open '" + path + "' for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out)
    {
        throw IoError("write to '" + path + "' failed");
    }
}

// Next line that is neither blank nor a '#' comment.
bool next_line(std::istream& in, std::string& line)
{
    while (std::getline(in, line))
    {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos != std::string::npos && line[pos] != '#')
        {
            return true;
        }
    }
    return false;
}

} // namespace

// --- configs -----------------------------------------------------------------

json to_json(const SolverConfig<double>& c)
{
    return {{"max_iters", c.max_iters},
            {"rho", c.rho},
            {"abs_tol", c.abs_tol},
            {"rel_tol", c.rel_tol},
            {"success_threshold", c.success_threshold},
            {"adapt_rho", c.adapt_rho},
            {"inner_iters", c.inner_iters}};
}

json to_json(const TuningConfig<double>& c)
{
    return {{"max_iters", c.max_iters},       {"epsilon", c.epsilon},
            {"rel_decrease", c.rel_decrease}, {"initial_step", c.initial_step},
            {"min_step", c.min_step},         {"pilot_rank_tol", c.pilot_rank_tol}};
}

json to_json(const TrialSetup& s)
{
    return {{"n", s.n},
            {"structure", to_string(s.structure)},
            {"d", s.d},
            {"weighting", to_string(s.weighting)},
            {"min_separation", s.min_separation},
            {"solver", to_json(s.solver)},
            {"tuning", to_json(s.tuning)}};
}

json to_json(const PhaseGrid& g)
{
    json j              = to_json(g.setup);
    j["sample_counts"]   = g.sample_counts;
    j["sparsity_levels"] = g.sparsity_levels;
    j["trials"]          = g.trials;
    j["base_seed"]       = g.base_seed;
    return j;
}

json to_json(const NoiseSweepSpec& s)
{
    return {{"n", s.n},     {"structure", to_string(s.structure)},
            {"d", s.d},     {"k", s.k},
            {"m", s.m},     {"etas", s.etas},
            {"trials", s.trials}, {"seed", s.seed},
            {"solver", to_json(s.solver)}};
}

SolverConfig<double> solver_config_from_json(const json& j)
{
    require_keys(j, {"max_iters", "rho", "abs_tol", "rel_tol", "success_threshold", "adapt_rho", "inner_iters"},
                 "solver config");
    SolverConfig<double> c;
    read_key(j, "max_iters", c.max_iters);
    read_key(j, "rho", c.rho);
    read_key(j, "abs_tol", c.abs_tol);
    read_key(j, "rel_tol", c.rel_tol);
    read_key(j, "success_threshold", c.success_threshold);
    read_key(j, "adapt_rho", c.adapt_rho);
    read_key(j, "inner_iters", c.inner_iters);
    c.validate();
    return c;
}

TuningConfig<double> tuning_config_from_json(const json& j)
{
    require_keys(j, {"max_iters", "epsilon", "rel_decrease", "initial_step", "min_step", "pilot_rank_tol"},
                 "tuning config");
    TuningConfig<double> c;
    read_key(j, "max_iters", c.max_iters);
    read_key(j, "epsilon", c.epsilon);
    read_key(j, "rel_decrease", c.rel_decrease);
    read_key(j, "initial_step", c.initial_step);
    read_key(j, "min_step", c.min_step);
    read_key(j, "pilot_rank_tol", c.pilot_rank_tol);
    c.validate();
    return c;
}

namespace
{

void read_setup_keys(const json& j, TrialSetup& s)
{
    read_key(j, "n", s.n);
    if (j.contains("structure"))
    {
        s.structure = structure_from_string(j.at("structure").get<std::string>());
    }
    read_key(j, "d", s.d);
    if (j.contains("weighting"))
    {
        s.weighting = weighting_from_string(j.at("weighting").get<std::string>());
    }
    read_key(j, "min_separation", s.min_separation);
    if (j.contains("solver"))
    {
        s.solver = solver_config_from_json(j.at("solver"));
    }
    if (j.contains("tuning"))
    {
        s.tuning = tuning_config_from_json(j.at("tuning"));
    }
}

} // namespace

TrialSetup trial_setup_from_json(const json& j)
{
    require_keys(j, {"n", "structure", "d", "weighting", "min_separation", "solver", "tuning"}, "trial setup");
    TrialSetup s;
    read_setup_keys(j, s);
    s.validate();
    return s;
}

PhaseGrid phase_grid_from_json(const json& j)
{
    require_keys(j,
                 {"n", "structure", "d", "weighting", "min_separation", "solver", "tuning", "sample_counts",
                  "sparsity_levels", "trials", "base_seed"},
                 "phase grid");
    PhaseGrid g = PhaseGrid::desk();
    read_setup_keys(j, g.setup);
    read_key(j, "sample_counts", g.sample_counts);
    read_key(j, "sparsity_levels", g.sparsity_levels);
    read_key(j, "trials", g.trials);
    read_key(j, "base_seed", g.base_seed);
    g.validate();
    return g;
}

NoiseSweepSpec noise_sweep_from_json(const json& j)
{
    require_keys(j, {"n", "structure", "d", "k", "m", "etas", "trials", "seed", "solver"}, "noise sweep");
    NoiseSweepSpec s;
    read_key(j, "n", s.n);
    if (j.contains("structure"))
    {
        s.structure = structure_from_string(j.at("structure").get<std::string>());
    }
    read_key(j, "d", s.d);
    read_key(j, "k", s.k);
    read_key(j, "m", s.m);
    read_key(j, "etas", s.etas);
    read_key(j, "trials", s.trials);
    read_key(j, "seed", s.seed);
    if (j.contains("solver"))
    {
        s.solver = solver_config_from_json(j.at("solver"));
    }
    s.validate();
    return s;
}

json read_json_file(const std::string& path)
{
    auto in = open_in(path);
    try
    {
        return json::parse(in, nullptr, true, true);
    }
    catch (const json::parse_error& e)
    {
        throw IoError("'" + path + "': " + e.what());
    }
}

void write_json_file(const json& j, const std::string& path)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

// --- phase-transition mesh ------------------------------------------------------

std::string meta_path(const std::string& dat_path)
{
    return dat_path + ".meta.json";
}

void write_dat(const SuccessSurface& surface, std::ostream& out)
{
    const auto& ms = surface.grid.sample_counts;
    const auto& ks = surface.grid.sparsity_levels;
    out << "M K C\n";
    for (std::size_t ki = 0; ki < ks.size(); ++ki)
    {
        for (std::size_t mi = 0; mi < ms.size(); ++mi)
        {
            out << ms[mi] << ' ' << ks[ki] << ' '
                << fixed6(surface.rates(static_cast<Index>(ki), static_cast<Index>(mi))) << '\n';
        }
    }
}

void emit_dat(const SuccessSurface& surface, const std::string& path)
{
    const auto& ms = surface.grid.sample_counts;
    const auto& ks = surface.grid.sparsity_levels;
    if (surface.rates.rows() != static_cast<Index>(ks.size()) ||
        surface.rates.cols() != static_cast<Index>(ms.size()))
    {
        throw std::invalid_argument("emit_dat: rate matrix does not match the grid");
    }
    auto out = open_out(path);
    write_dat(surface, out);
    finish(out, path);

    json meta       = to_json(surface.grid);
    meta["columns"] = ms.size();
    if (surface.errors.size() == surface.rates.size())
    {
        meta["failed_trials"] = surface.errors.sum();
    }
    if (surface.stage2_accepted.size() == surface.rates.size())
    {
        meta["stage2_accepted"] = surface.stage2_accepted.sum();
    }
    write_json_file(meta, meta_path(path));
}

SuccessSurface read_dat(std::istream& in, const std::string& name)
{
    std::string line;
    if (!next_line(in, line))
    {
        throw IoError("'" + name + "': empty file");
    }
    {
        std::istringstream head(line);
        std::string a, b, c;
        head >> a >> b >> c;
        if (a != "M" || b != "K" || c != "C")
        {
            throw IoError("'" + name + "': expected header 'M K C'");
        }
    }

    struct Row
    {
        Index m;
        Index k;
        double rate;
    };
    std::vector<Row> rows;
    Index line_no = 1;
    while (next_line(in, line))
    {
        ++line_no;
        std::istringstream fields(line);
        Row r{};
        if (!(fields >> r.m >> r.k >> r.rate))
        {
            throw IoError("'" + name + "': malformed row " + std::to_string(line_no));
        }
        rows.push_back(r);
    }

    SuccessSurface s;
    s.grid.sample_counts.clear();
    s.grid.sparsity_levels.clear();
    for (const Row& r : rows)
    {
        if (std::find(s.grid.sample_counts.begin(), s.grid.sample_counts.end(), r.m) == s.grid.sample_counts.end())
        {
            s.grid.sample_counts.push_back(r.m);
        }
        if (std::find(s.grid.sparsity_levels.begin(), s.grid.sparsity_levels.end(), r.k) ==
            s.grid.sparsity_levels.end())
        {
            s.grid.sparsity_levels.push_back(r.k);
        }
    }
    const std::size_t n_m = s.grid.sample_counts.size();
    const std::size_t n_k = s.grid.sparsity_levels.size();
    if (rows.empty() || rows.size() != n_m * n_k)
    {
        throw IoError("'" + name + "': rows do not form a complete mesh");
    }
    s.rates = Eigen::MatrixXd::Zero(static_cast<Index>(n_k), static_cast<Index>(n_m));
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        const std::size_t ki = i / n_m;
        const std::size_t mi = i % n_m;
        if (rows[i].m != s.grid.sample_counts[mi] || rows[i].k != s.grid.sparsity_levels[ki])
        {
            throw IoError("'" + name + "': rows are not in K-major mesh order");
        }
        s.rates(static_cast<Index>(ki), static_cast<Index>(mi)) = rows[i].rate;
    }
    s.errors          = Eigen::MatrixXi::Zero(s.rates.rows(), s.rates.cols());
    s.stage2_accepted = Eigen::MatrixXi::Zero(s.rates.rows(), s.rates.cols());
    return s;
}

SuccessSurface parse_dat(const std::string& path)
{
    auto in = open_in(path);
    return read_dat(in, path);
}

// --- signals and samples ------------------------------------------------------

void write_mixture(const Mixture<double>& mixture, std::ostream& out)
{
    mixture.validate();
    out << mixture.order() << ' ' << mixture.n_samples << '\n';
    for (Index k = 0; k < mixture.order(); ++k)
    {
        const auto b = mixture.coefficients(k);
        const auto z = mixture.bases(k);
        out << exact(b.real()) << ' ' << exact(b.imag()) << ' ' << exact(z.real()) << ' ' << exact(z.imag())
            << '\n';
    }
}

Mixture<double> read_mixture(std::istream& in, const std::string& name)
{
    std::string line;
    Index k = 0;
    Mixture<double> mixture;
    if (!next_line(in, line) || !(std::istringstream(line) >> k >> mixture.n_samples) || k < 1)
    {
        throw IoError("'" + name + "': expected 'K N' header");
    }
    mixture.coefficients.resize(k);
    mixture.bases.resize(k);
    for (Index i = 0; i < k; ++i)
    {
        double br = 0, bi = 0, zr = 0, zi = 0;
        if (!next_line(in, line) || !(std::istringstream(line) >> br >> bi >> zr >> zi))
        {
            throw IoError("'" + name + "': expected " + std::to_string(k) + " component lines");
        }
        mixture.coefficients(i) = {br, bi};
        mixture.bases(i)        = {zr, zi};
    }
    try
    {
        mixture.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw IoError("'" + name + "': " + e.what());
    }
    return mixture;
}

void write_indices(const SampleSet<double>& omega, std::ostream& out)
{
    for (Index n : omega.indices)
    {
        out << n + 1 << '\n';
    }
}

SampleSet<double> read_indices(std::istream& in, Index universe, const std::string& name)
{
    SampleSet<double> omega;
    omega.universe = universe;
    std::string line;
    while (next_line(in, line))
    {
        Index n = 0;
        if (!(std::istringstream(line) >> n) || n < 1 || n > universe)
        {
            throw IoError("'" + name + "': index out of range 1.." + std::to_string(universe) + ": " + line);
        }
        omega.indices.push_back(n - 1);
    }
    std::sort(omega.indices.begin(), omega.indices.end());
    if (std::adjacent_find(omega.indices.begin(), omega.indices.end()) != omega.indices.end())
    {
        throw IoError("'" + name + "': duplicate sample index");
    }
    return omega;
}

void write_complex_vector(const ComplexVector<double>& v, std::ostream& out)
{
    for (Index i = 0; i < v.size(); ++i)
    {
        out << exact(v(i).real()) << ' ' << exact(v(i).imag()) << '\n';
    }
}

void write_scores(const RealVector<double>& scores, std::ostream& out)
{
    for (Index i = 0; i < scores.size(); ++i)
    {
        out << i + 1 << ' ' << fixed6(scores(i)) << '\n';
    }
}

json weights_to_json(const WeightPair<double>& w)
{
    const auto& l = w.left_diag();
    const auto& r = w.right_diag();
    return {{"left", std::vector<double>(l.data(), l.data() + l.size())},
            {"right", std::vector<double>(r.data(), r.data() + r.size())}};
}

WeightPair<double> weights_from_json(const json& j)
{
    require_keys(j, {"left", "right"}, "weights");
    const auto l = j.at("left").get<std::vector<double>>();
    const auto r = j.at("right").get<std::vector<double>>();
    return WeightPair<double>::diagonal(Eigen::Map<const RealVector<double>>(l.data(), static_cast<Index>(l.size())),
                                        Eigen::Map<const RealVector<double>>(r.data(), static_cast<Index>(r.size())));
}

} // namespace wli
