// Monte-Carlo driver: runs a scenario and writes the metrics CSV.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "risloc/format.hpp"
#include "risloc/harness.hpp"

namespace
{

void print_summary(const risloc::harness::RunResult& result)
{
    std::map<double, std::string> lines;
    for (const auto& r : result.records)
    {
        std::string& line = lines[r.snr_db];
        line += "  " + r.method + "/" + r.metric_name + "=" + risloc::format_double(r.value);
    }
    for (const auto& [snr, text] : lines)
    {
        std::cout << "snr_db=" << risloc::format_double(snr) << text << '\n';
    }
}

} // namespace

int main(int argc, char** argv)
{
    namespace h = risloc::harness;
    CLI::App app{"RIS-assisted channel estimation Monte-Carlo simulator"};

    std::optional<std::string> scenario;
    std::optional<std::string> snr_list;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> mu;
    std::optional<double> mu_scale;
    std::optional<double> tolerance;
    std::optional<unsigned> threads;
    std::optional<std::string> config;

    app.add_option("--scenario", scenario, "Preset: fig3, fig4, fig5, fig6 or custom")
        ->check(CLI::IsMember({"fig3", "fig4", "fig5", "fig6", "custom"}));
    app.add_option("--snr-list", snr_list, "Comma-separated SNR grid in dB");
    app.add_option("--trials", trials, "Monte-Carlo trials per SNR point")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Base RNG seed");
    app.add_option("--out", out, "Output CSV path");
    app.add_option("--mu", mu, "Regularization weight, or 'auto'");
    app.add_option("--mu-scale", mu_scale, "Multiplier on the automatic weight");
    app.add_option("--tolerance", tolerance, "Solver stopping tolerance");
    app.add_option("--threads", threads, "Worker threads for trials")->check(CLI::PositiveNumber);
    app.add_option("--config", config, "key = value configuration file")->check(CLI::ExistingFile);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (!scenario && !config)
    {
        std::cerr << "error: one of --scenario or --config is required\n" << app.help();
        return 1;
    }

    h::ExperimentConfig cfg;
    try
    {
        cfg = h::preset(h::parse_scenario(scenario.value_or("custom")));
        if (config) cfg = h::load_config(*config, cfg);
        if (snr_list) cfg.snr_db_grid = h::parse_number_list(*snr_list);
        if (trials) cfg.trials = *trials;
        if (seed) cfg.seed = *seed;
        if (out) cfg.output_path = *out;
        if (mu) h::apply_setting(cfg, "mu", *mu);
        if (mu_scale) cfg.anm.mu_scale = *mu_scale;
        if (tolerance) cfg.anm.solver_tolerance = *tolerance;
        if (threads) cfg.threads = *threads;
        h::validate(cfg);
        if (cfg.output_path.empty()) throw std::invalid_argument("an output path is required (--out)");
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try
    {
        const h::RunResult result = h::run(cfg);
        h::write_csv_file(cfg, result, cfg.output_path);
        print_summary(result);
        std::cout << "solver_failures=" << result.solver_failures << " of " << result.attempted_trials
                  << " wall_time_s=" << risloc::format_double(result.wall_time_s) << '\n';
    }
    catch (const h::RunFailure& e)
    {
        for (const auto& [what, count] : e.result().failure_kinds)
        {
            std::cerr << "failed trials (" << count << "): " << what << '\n';
        }
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
