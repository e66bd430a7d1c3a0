///
/// \file io.hpp
///
/// File formats: the whitespace `.dat` mesh of success rates with a JSON
/// sidecar, JSON experiment configs, mixtures, sample index lists, complex
/// vectors, score columns and weight pairs.
///
#ifndef WLI_IO_HPP
#define WLI_IO_HPP

#include <iosfwd>
#include <string>

#include <json.hpp>

#include <wli/experiments.hpp>
#include <wli/signal.hpp>
#include <wli/weight_pair.hpp>

namespace wli
{

using json = nlohmann::json;

/// Thrown for unreadable or malformed files; the message carries the path.
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// --- configs -----------------------------------------------------------------

json to_json(const SolverConfig<double>& c);
json to_json(const TuningConfig<double>& c);
json to_json(const TrialSetup& s);
json to_json(const PhaseGrid& g);
json to_json(const NoiseSweepSpec& s);

/// Missing keys keep their defaults; unknown keys throw std::invalid_argument.
SolverConfig<double> solver_config_from_json(const json& j);
TuningConfig<double> tuning_config_from_json(const json& j);
TrialSetup trial_setup_from_json(const json& j);
PhaseGrid phase_grid_from_json(const json& j);
NoiseSweepSpec noise_sweep_from_json(const json& j);

json read_json_file(const std::string& path);
void write_json_file(const json& j, const std::string& path);

// --- phase-transition mesh ------------------------------------------------------

/// Header "M K C", then one "m k rate" row per cell, K-major (M varies
/// fastest), rates with 6 decimals. Also writes `path + ".meta.json"`.
void emit_dat(const SuccessSurface& surface, const std::string& path);
void write_dat(const SuccessSurface& surface, std::ostream& out);

/// Grid lists and rates only; other grid fields keep their defaults.
SuccessSurface parse_dat(const std::string& path);
SuccessSurface read_dat(std::istream& in, const std::string& name = "<stream>");

std::string meta_path(const std::string& dat_path);

// --- signals and samples ------------------------------------------------------

/// First line "K N", then one "Re(b) Im(b) Re(z) Im(z)" line per component.
void write_mixture(const Mixture<double>& mixture, std::ostream& out);
Mixture<double> read_mixture(std::istream& in, const std::string& name = "<stream>");

/// One 1-based sample index per line.
void write_indices(const SampleSet<double>& omega, std::ostream& out);
SampleSet<double> read_indices(std::istream& in, Index universe, const std::string& name = "<stream>");

/// One "Re Im" line per entry.
void write_complex_vector(const ComplexVector<double>& v, std::ostream& out);

/// One "n score" line per entry (n 1-based), 6 decimals.
void write_scores(const RealVector<double>& scores, std::ostream& out);

json weights_to_json(const WeightPair<double>& w);
WeightPair<double> weights_from_json(const json& j);

} // namespace wli

#endif /* WLI_IO_HPP */
