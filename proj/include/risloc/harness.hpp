#ifndef RISLOC_HARNESS_HPP
#define RISLOC_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "risloc/anm.hpp"
#include "risloc/geometry.hpp"

namespace risloc::harness
{

enum class Scenario
{
    fig3,
    fig4,
    fig5,
    fig6,
    custom,
};

Scenario parse_scenario(const std::string& name);
std::string to_string(Scenario s);

/// One RIS-MS path: gain variance and the prior interval of its spatial
/// frequency (shared by the AoD at the RIS and the AoA at the MS).
struct PathSpec
{
    double gain_variance = 1.0;
    geometry::FrequencyInterval prior{0.2, 0.6};
};

/// Positions for scenarios whose LoS prior is derived from geometry.
struct GeometrySpec
{
    geometry::Position2D bs{0.0, 0.0};
    geometry::Position2D ris{0.0, 0.0};
    geometry::Position2D ms{0.0, 0.0};
    double epsilon = 0.0;     // location error bound, meters
    double orientation = 0.0; // known MS orientation, radians
};

struct ExperimentConfig
{
    Scenario scenario = Scenario::custom;
    std::vector<double> snr_db_grid;
    int trials = 1;
    std::uint64_t seed = 0;

    Index n_b = 16;
    Index n_r = 64;
    Index n_m = 16;
    Index p = 4; // MS combining beams
    Index t = 16; // RIS profiles

    /// paths[0] is the LoS path. With `geometry` set, its prior is replaced
    /// by the geometric one on every trial.
    std::vector<PathSpec> paths;
    std::optional<GeometrySpec> geometry;
    /// sin(phi_BR) used when no geometry is given.
    double sin_phi_br = 0.0;

    double coherence_length = 500.0;
    /// Defaults to P * T (single RF chain at the MS) when unset.
    std::optional<double> training_length;

    bool report_mse = true;
    bool report_se = true;

    anm::AnmConfig anm;
    std::string output_path;
    unsigned threads = 1;

    [[nodiscard]] double effective_training_length() const
    {
        return training_length.value_or(static_cast<double>(p * t));
    }
};

ExperimentConfig preset(Scenario scenario);

/// Checks ExperimentConfig invariants; throws std::invalid_argument.
void validate(const ExperimentConfig& cfg);

struct MetricRecord
{
    std::string scenario;
    std::string method;
    double snr_db = 0.0;
    std::string metric_name;
    double value = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
};

struct RunResult
{
    std::vector<MetricRecord> records;
    int solver_failures = 0;
    int attempted_trials = 0;
    std::map<std::string, int> failure_kinds; // exception message -> count
    double wall_time_s = 0.0;
};

/// Thrown by run() when too many trials fail; carries the partial result.
class RunFailure : public std::runtime_error
{
public:
    RunFailure(const std::string& what, RunResult result)
        : std::runtime_error(what), result_(std::move(result))
    {
    }
    [[nodiscard]] const RunResult& result() const noexcept { return result_; }

private:
    RunResult result_;
};

/// Per-trial seed, independent of execution order.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t snr_index, std::size_t trial_index);

/// Runs the Monte-Carlo experiment. Throws RunFailure when more than 2% of
/// the trials fail.
RunResult run(const ExperimentConfig& cfg);

/// Writes the CSV (metadata comments, header, records) to `os`.
void write_csv(const ExperimentConfig& cfg, const RunResult& result, std::ostream& os);

/// Writes via a temporary file renamed into place.
void write_csv_file(const ExperimentConfig& cfg, const RunResult& result,
                    const std::string& path);

/// Flat `key = value` configuration; '#' starts a comment. Keys mirror
/// ExperimentConfig (see README). Unknown keys throw std::invalid_argument.
/// Settings are applied on top of `base` in file order, so a `scenario`
/// line resets everything set before it.
ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = preset(Scenario::custom));
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = preset(Scenario::custom));

/// Applies one `key`, `value` pair to an existing configuration.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

std::vector<double> parse_number_list(const std::string& text);

} // namespace risloc::harness

#endif
