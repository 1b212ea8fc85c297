#include "risloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "risloc/channel.hpp"
#include "risloc/codebook.hpp"
#include "risloc/evaluation.hpp"
#include "risloc/format.hpp"

namespace risloc::harness
{

using geometry::FrequencyInterval;

Scenario parse_scenario(const std::string& name)
{
    if (name == "fig3") return Scenario::fig3;
    if (name == "fig4") return Scenario::fig4;
    if (name == "fig5") return Scenario::fig5;
    if (name == "fig6") return Scenario::fig6;
    if (name == "custom") return Scenario::custom;
    throw std::invalid_argument("unknown scenario: " + name);
}

std::string to_string(Scenario s)
{
    switch (s)
    {
    case Scenario::fig3: return "fig3";
    case Scenario::fig4: return "fig4";
    case Scenario::fig5: return "fig5";
    case Scenario::fig6: return "fig6";
    case Scenario::custom: return "custom";
    }
    return "custom";
}

ExperimentConfig preset(Scenario scenario)
{
    ExperimentConfig cfg;
    cfg.scenario = scenario;
    cfg.snr_db_grid = {-20.0, -15.0, -10.0, -5.0, 0.0};
    cfg.trials = 100;
    cfg.seed = 1;
    cfg.n_b = 16;
    cfg.n_r = 64;
    cfg.n_m = 16;
    cfg.coherence_length = 500.0;

    switch (scenario)
    {
    case Scenario::fig3:
    case Scenario::fig4:
        cfg.p = 4;
        cfg.t = 16;
        cfg.paths = {{1.0, {0.2, 0.6}}};
        break;
    case Scenario::fig5:
    case Scenario::fig6:
        cfg.p = 6;
        cfg.t = 24;
        cfg.paths = {{1.0, {0.2, 0.6}}, {0.1, {0.7, 0.9}}};
        break;
    case Scenario::custom:
        cfg.p = 4;
        cfg.t = 16;
        cfg.paths = {{1.0, {0.2, 0.6}}};
        break;
    }
    const bool se = scenario == Scenario::fig4 || scenario == Scenario::fig6;
    const bool mse = scenario == Scenario::fig3 || scenario == Scenario::fig5;
    if (scenario != Scenario::custom)
    {
        cfg.report_mse = mse;
        cfg.report_se = se;
    }
    cfg.training_length = static_cast<double>(cfg.p * cfg.t);
    return cfg;
}

void validate(const ExperimentConfig& cfg)
{
    if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (cfg.snr_db_grid.empty()) throw std::invalid_argument("SNR grid must be non-empty");
    if (cfg.paths.empty()) throw std::invalid_argument("at least one path is required");
    if (cfg.paths.size() > 6) throw std::invalid_argument("at most 6 paths are supported");
    if (cfg.n_b < 1 || cfg.n_r < 2 || cfg.n_m < 2 || cfg.p < 1 || cfg.t < 1)
        throw std::invalid_argument("array sizes and beam counts must be positive");
    if (static_cast<Index>(cfg.paths.size()) > std::min(cfg.n_r, cfg.n_m))
        throw std::invalid_argument("number of paths exceeds min(N_R, N_M)");
    if (static_cast<Index>(cfg.paths.size()) > std::min(cfg.p, cfg.t))
        throw std::invalid_argument("each prior interval needs at least one beam");
    for (const auto& p : cfg.paths)
    {
        geometry::make_frequency_interval(p.prior.a, p.prior.b);
        if (!(p.gain_variance > 0.0)) throw std::invalid_argument("gain variance must be positive");
    }
    if (cfg.effective_training_length() < 0.0 ||
        cfg.effective_training_length() > cfg.coherence_length)
        throw std::invalid_argument("training length must lie in [0, T_c]");
    if (!cfg.report_mse && !cfg.report_se)
        throw std::invalid_argument("nothing to report");
    if (cfg.geometry && cfg.geometry->epsilon < 0.0)
        throw std::invalid_argument("epsilon must be >= 0");
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t snr_index, std::size_t trial_index)
{
    // splitmix64 finalizer over a combined key
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ static_cast<std::uint64_t>(snr_index)) ^
               static_cast<std::uint64_t>(trial_index));
}

namespace
{

constexpr const char* kMseMethods[] = {"anm_with_prior", "anm_no_prior"};
constexpr const char* kMseMetrics[] = {"mse_aoa", "mse_diff", "crlb_aoa", "crlb_diff"};
constexpr const char* kSeMethods[] = {"proposed", "benchmark1", "benchmark2", "anm_no_prior"};

// Splits `total` beams over intervals in proportion to their widths
// (largest remainder, at least one beam each).
std::vector<Index> allocate_beams(const std::vector<FrequencyInterval>& bands, Index total)
{
    const auto n = static_cast<Index>(bands.size());
    std::vector<Index> counts(bands.size(), 1);
    Index left = total - n;
    double width_sum = 0.0;
    for (const auto& b : bands) width_sum += b.width();
    if (left <= 0) return counts;
    if (!(width_sum > 0.0))
    {
        for (Index i = 0; left > 0; i = (i + 1) % n, --left) ++counts[static_cast<std::size_t>(i)];
        return counts;
    }
    std::vector<double> remainder(bands.size());
    for (std::size_t i = 0; i < bands.size(); ++i)
    {
        const double share = static_cast<double>(total) * bands[i].width() / width_sum - 1.0;
        const auto whole = std::clamp<Index>(static_cast<Index>(std::floor(std::max(share, 0.0))), 0, left);
        counts[i] += whole;
        left -= whole;
        remainder[i] = share - static_cast<double>(whole);
    }
    std::vector<std::size_t> order(bands.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; left > 0; i = (i + 1) % order.size(), --left) ++counts[order[i]];
    return counts;
}

codebook::Codebook banded_codebook(Index num_antennas, const std::vector<FrequencyInterval>& bands,
                                   Index total_beams, bool constant_modulus)
{
    const std::vector<Index> counts = allocate_beams(bands, total_beams);
    codebook::Codebook cb;
    cb.beams.resize(num_antennas, total_beams);
    cb.constant_modulus = constant_modulus;
    cb.covered = bands.front();
    Index col = 0;
    for (std::size_t i = 0; i < bands.size(); ++i)
    {
        FrequencyInterval band = bands[i];
        if (band.width() <= 0.0)
        {
            // a zero-width prior still needs a non-empty selection block
            band = {std::max(-1.0, band.a - 1e-3), std::min(1.0, band.b + 1e-3)};
        }
        const codebook::Codebook part =
            codebook::design_codebook({num_antennas, 0, band, counts[i], constant_modulus});
        cb.beams.middleCols(col, counts[i]) = part.beams;
        col += counts[i];
        cb.covered.a = std::min(cb.covered.a, band.a);
        cb.covered.b = std::max(cb.covered.b, band.b);
    }
    cb.per_beam_width = cb.covered.width() / static_cast<double>(total_beams);
    return cb;
}

FrequencyInterval hull(const std::vector<FrequencyInterval>& bands)
{
    FrequencyInterval h = bands.front();
    for (const auto& b : bands)
    {
        h.a = std::min(h.a, b.a);
        h.b = std::max(h.b, b.b);
    }
    return h;
}

// RIS codebook target for AoD prior [a, b]: the profiles must respond to
// f_diff = s_br - sin(theta), and alpha(f)^T omega = alpha(-f)^H omega.
FrequencyInterval ris_target(const FrequencyInterval& aod_prior, double sin_phi_br)
{
    return {std::clamp(aod_prior.a - sin_phi_br, -1.0, 1.0),
            std::clamp(aod_prior.b - sin_phi_br, -1.0, 1.0)};
}

struct TrainingBeams
{
    codebook::Codebook ms;
    codebook::Codebook ris;
    FrequencyInterval ms_hull;
    FrequencyInterval ris_hull;
};

TrainingBeams prior_beams(const ExperimentConfig& cfg, const std::vector<FrequencyInterval>& aoa_priors,
                          const std::vector<FrequencyInterval>& aod_priors, double sin_phi_br)
{
    std::vector<FrequencyInterval> ris_bands;
    for (const auto& b : aod_priors) ris_bands.push_back(ris_target(b, sin_phi_br));
    TrainingBeams tb;
    tb.ms = banded_codebook(cfg.n_m, aoa_priors, cfg.p, false);
    tb.ris = banded_codebook(cfg.n_r, ris_bands, cfg.t, true);
    tb.ms_hull = hull(aoa_priors);
    tb.ris_hull = hull(ris_bands);
    return tb;
}

TrainingBeams uniform_beams(const ExperimentConfig& cfg)
{
    const std::vector<FrequencyInterval> full{{-1.0, 1.0}};
    TrainingBeams tb;
    tb.ms = banded_codebook(cfg.n_m, full, cfg.p, false);
    tb.ris = banded_codebook(cfg.n_r, full, cfg.t, true);
    tb.ms_hull = full.front();
    tb.ris_hull = full.front();
    return tb;
}

struct MethodMetrics
{
    double mse_aoa = 0.0;
    double mse_diff = 0.0;
    double crlb_aoa = 0.0;
    double crlb_diff = 0.0;
};

struct TrialOutcome
{
    bool failed = false;
    std::string failure;
    MethodMetrics mse[2]; // with prior, no prior
    double se[4] = {0.0, 0.0, 0.0, 0.0};
};

Complex complex_normal(std::mt19937_64& rng, double variance)
{
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

// Average squared error over paths after matching estimated to true paths.
std::pair<double, double> matched_mse(const anm::EstimationResult& est,
                                      const std::vector<evaluation::PathTruth>& truth)
{
    std::vector<std::size_t> perm(truth.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    std::pair<double, double> out{0.0, 0.0};
    do
    {
        std::vector<double> ea, ed, ta, td;
        for (std::size_t l = 0; l < truth.size(); ++l)
        {
            ea.push_back(est.aoa_freqs[perm[l]]);
            ed.push_back(est.diff_freqs[perm[l]]);
            ta.push_back(truth[l].aoa_freq);
            td.push_back(truth[l].diff_freq);
        }
        const double ma = evaluation::mse_frequency(ea, ta);
        const double md = evaluation::mse_frequency(ed, td);
        if (ma + md < best)
        {
            best = ma + md;
            out = {ma, md};
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

anm::EstimationResult estimate(const CMatrix& y, const TrainingBeams& tb, Index paths,
                               const anm::AnmConfig& cfg)
{
    if (paths == 1)
    {
        return anm::estimate_single_path(y, tb.ms.beams, tb.ris.beams, cfg);
    }
    return anm::estimate_multipath(y, tb.ms.beams, tb.ris.beams, paths, cfg);
}

void score_trial(const ExperimentConfig& cfg, const anm::EstimationResult (&est)[2], const CMatrix (&y)[2],
                 const TrainingBeams* const (&setups)[2], const TrainingBeams& with_prior,
                 const std::vector<evaluation::PathTruth>& truth, const CMatrix& h_br, const CMatrix& h_rm,
                 const CVector& f, double noise_variance, TrialOutcome& out);

struct SharedBeams
{
    std::optional<TrainingBeams> with_prior; // absent when priors vary per trial
    TrainingBeams no_prior;
};

TrialOutcome simulate_trial(const ExperimentConfig& cfg, const SharedBeams& shared,
                            double noise_variance, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto num_paths = static_cast<Index>(cfg.paths.size());

    std::vector<FrequencyInterval> aoa_priors;
    std::vector<FrequencyInterval> aod_priors;
    for (const auto& p : cfg.paths)
    {
        aoa_priors.push_back(p.prior);
        aod_priors.push_back(p.prior);
    }

    double phi_br = std::asin(std::clamp(cfg.sin_phi_br, 0.0, 1.0));
    double theta_br = kPi - phi_br;
    std::vector<double> aoa_freq(cfg.paths.size());
    std::vector<double> aod_freq(cfg.paths.size());

    if (cfg.geometry)
    {
        const GeometrySpec& g = *cfg.geometry;
        std::tie(theta_br, phi_br) = geometry::bearing_angles(g.bs, g.ris);
        const double theta_rm = geometry::bearing_angles(g.ris, g.ms).first;
        // uniform draw in the epsilon-disk
        const double r = g.epsilon * std::sqrt(unit(rng));
        const double ang = 2.0 * kPi * unit(rng);
        const geometry::LocationPrior prior{{g.ms.x + r * std::cos(ang), g.ms.y + r * std::sin(ang)},
                                            g.epsilon};
        const geometry::LosPrior lp = geometry::los_prior(g.ris, prior, g.orientation);
        aoa_priors[0] = lp.aoa_frequency;
        aod_priors[0] = lp.aod_frequency;
        aoa_freq[0] = std::sin(kPi - theta_rm - g.orientation);
        aod_freq[0] = std::sin(theta_rm);
    }
    else
    {
        const double x = aoa_priors[0].a + aoa_priors[0].width() * unit(rng);
        aoa_freq[0] = x;
        aod_freq[0] = x;
    }
    for (std::size_t l = 1; l < cfg.paths.size(); ++l)
    {
        aoa_freq[l] = aoa_priors[l].a + aoa_priors[l].width() * unit(rng);
        aod_freq[l] = aod_priors[l].a + aod_priors[l].width() * unit(rng);
    }
    const double sin_phi_br = std::sin(phi_br);

    const Complex rho_br = complex_normal(rng, 1.0);
    channel::MultipathChannel ch;
    ch.tx_array = {cfg.n_r};
    ch.rx_array = {cfg.n_m};
    std::vector<evaluation::PathTruth> truth;
    const double xi_scale = static_cast<double>(cfg.n_r) * std::sqrt(static_cast<double>(cfg.n_b * cfg.n_m));
    for (std::size_t l = 0; l < cfg.paths.size(); ++l)
    {
        const Complex rho = complex_normal(rng, cfg.paths[l].gain_variance);
        const double aod = std::asin(std::clamp(aod_freq[l], -1.0, 1.0));
        const double aoa = std::asin(std::clamp(aoa_freq[l], -1.0, 1.0));
        ch.paths.push_back({rho, aod, aoa});
        truth.push_back({aoa_freq[l], channel::effective_frequency_diff(aod, phi_br),
                         xi_scale * rho_br * rho});
    }
    const std::uint64_t noise_seed = rng();

    const CMatrix h_br = channel::bs_ris_channel(rho_br, theta_br, phi_br, {cfg.n_b}, {cfg.n_r});
    const CMatrix h_rm = channel::ris_ms_channel(ch);
    const CVector f = channel::ula_response({cfg.n_b}, theta_br);

    const TrainingBeams with_prior = shared.with_prior
                                         ? *shared.with_prior
                                         : prior_beams(cfg, aoa_priors, aod_priors, sin_phi_br);
    const TrainingBeams* setups[2] = {&with_prior, &shared.no_prior};

    anm::AnmConfig anm_cfg = cfg.anm;
    anm_cfg.noise_std = std::sqrt(noise_variance);

    TrialOutcome out;
    anm::EstimationResult est[2];
    CMatrix y[2];
    try
    {
        for (int m = 0; m < 2; ++m)
        {
            channel::TrainingSetup setup{f, setups[m]->ms.beams, setups[m]->ris.beams, noise_variance};
            y[m] = channel::training_observation(setup, h_br, h_rm, noise_seed);
            est[m] = estimate(y[m], *setups[m], num_paths, anm_cfg);
        }
    }
    catch (const anm::AnmError& e)
    {
        out.failed = true;
        out.failure = e.what();
        return out;
    }
    catch (const std::domain_error& e)
    {
        out.failed = true;
        out.failure = e.what();
        return out;
    }
    try
    {
        score_trial(cfg, est, y, setups, with_prior, truth, h_br, h_rm, f, noise_variance, out);
    }
    catch (const std::domain_error& e)
    {
        out.failed = true;
        out.failure = e.what();
    }
    return out;
}

void score_trial(const ExperimentConfig& cfg, const anm::EstimationResult (&est)[2], const CMatrix (&y)[2],
                 const TrainingBeams* const (&setups)[2], const TrainingBeams& with_prior,
                 const std::vector<evaluation::PathTruth>& truth, const CMatrix& h_br, const CMatrix& h_rm,
                 const CVector& f, double noise_variance, TrialOutcome& out)
{
    if (cfg.report_mse)
    {
        for (int m = 0; m < 2; ++m)
        {
            const auto [ma, md] = matched_mse(est[m], truth);
            out.mse[m].mse_aoa = ma;
            out.mse[m].mse_diff = md;
            // averaged over paths, like the MSE
            const auto bounds = evaluation::crlb_all_paths(truth, setups[m]->ms.beams,
                                                           setups[m]->ris.beams, noise_variance);
            for (const auto& c : bounds)
            {
                out.mse[m].crlb_aoa += c.aoa / static_cast<double>(bounds.size());
                out.mse[m].crlb_diff += c.diff / static_cast<double>(bounds.size());
            }
        }
    }
    if (cfg.report_se)
    {
        evaluation::SeConfig se{cfg.coherence_length, cfg.effective_training_length(), noise_variance};
        evaluation::SeConfig se_free = se;
        se_free.training_length = 0.0;

        const auto proposed = evaluation::design_receiver(est[0], cfg.n_m, cfg.n_r);
        const auto bench1 = evaluation::benchmark_beam_alignment(y[0], with_prior.ms, with_prior.ris);
        const auto bench2 = evaluation::benchmark_wide_beam(with_prior.ms_hull, with_prior.ris_hull,
                                                            cfg.n_m, cfg.n_r);
        const auto no_prior = evaluation::design_receiver(est[1], cfg.n_m, cfg.n_r);
        out.se[0] = evaluation::effective_se(proposed, h_br, h_rm, f, se);
        out.se[1] = evaluation::effective_se(bench1, h_br, h_rm, f, se);
        out.se[2] = evaluation::effective_se(bench2, h_br, h_rm, f, se_free);
        out.se[3] = evaluation::effective_se(no_prior, h_br, h_rm, f, se);
    }
}

std::vector<TrialOutcome> simulate_point(const ExperimentConfig& cfg, const SharedBeams& shared,
                                         double noise_variance, std::size_t snr_index)
{
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k < outcomes.size(); k = next++)
        {
            outcomes[k] = simulate_trial(cfg, shared, noise_variance, trial_seed(cfg.seed, snr_index, k));
        }
    };
    const unsigned n_threads = std::max(1u, cfg.threads);
    if (n_threads == 1)
    {
        worker();
        return outcomes;
    }
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i)
    {
        pool.emplace_back(worker);
    }
    pool.clear();
    return outcomes;
}

} // namespace

RunResult run(const ExperimentConfig& cfg)
{
    validate(cfg);
    const auto start = std::chrono::steady_clock::now();

    SharedBeams shared;
    shared.no_prior = uniform_beams(cfg);
    if (!cfg.geometry)
    {
        std::vector<FrequencyInterval> priors;
        for (const auto& p : cfg.paths) priors.push_back(p.prior);
        shared.with_prior = prior_beams(cfg, priors, priors, std::clamp(cfg.sin_phi_br, 0.0, 1.0));
    }

    RunResult result;
    const std::string scenario = to_string(cfg.scenario);
    for (std::size_t si = 0; si < cfg.snr_db_grid.size(); ++si)
    {
        const double snr_db = cfg.snr_db_grid[si];
        const double noise_variance = std::pow(10.0, -snr_db / 10.0);
        const std::vector<TrialOutcome> outcomes = simulate_point(cfg, shared, noise_variance, si);

        // reduce in trial order so the sums do not depend on scheduling
        TrialOutcome sum;
        int ok = 0;
        for (const auto& o : outcomes)
        {
            ++result.attempted_trials;
            if (o.failed)
            {
                ++result.solver_failures;
                ++result.failure_kinds[o.failure];
                continue;
            }
            ++ok;
            for (int m = 0; m < 2; ++m)
            {
                sum.mse[m].mse_aoa += o.mse[m].mse_aoa;
                sum.mse[m].mse_diff += o.mse[m].mse_diff;
                sum.mse[m].crlb_aoa += o.mse[m].crlb_aoa;
                sum.mse[m].crlb_diff += o.mse[m].crlb_diff;
            }
            for (int m = 0; m < 4; ++m) sum.se[m] += o.se[m];
        }
        const double denom = ok > 0 ? static_cast<double>(ok) : 1.0;
        auto emit = [&](const char* method, const char* metric, double total) {
            result.records.push_back({scenario, method, snr_db, metric, total / denom, ok, cfg.seed});
        };
        if (cfg.report_mse)
        {
            for (int m = 0; m < 2; ++m)
            {
                const double vals[4] = {sum.mse[m].mse_aoa, sum.mse[m].mse_diff, sum.mse[m].crlb_aoa,
                                        sum.mse[m].crlb_diff};
                for (int k = 0; k < 4; ++k) emit(kMseMethods[m], kMseMetrics[k], vals[k]);
            }
        }
        if (cfg.report_se)
        {
            for (int m = 0; m < 4; ++m) emit(kSeMethods[m], "effective_se", sum.se[m]);
        }
    }
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (result.solver_failures * 50 > result.attempted_trials)
    {
        const std::string what = "solver failure rate above 2% (" + std::to_string(result.solver_failures) +
                                 " of " + std::to_string(result.attempted_trials) + " trials)";
        throw RunFailure(what, std::move(result));
    }
    return result;
}

namespace
{

std::string interval_text(const FrequencyInterval& iv)
{
    return format_double(iv.a) + ":" + format_double(iv.b);
}

std::string join_numbers(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

} // namespace

void write_csv(const ExperimentConfig& cfg, const RunResult& result, std::ostream& os)
{
    os << "# scenario=" << to_string(cfg.scenario) << " trials=" << cfg.trials << " seed=" << cfg.seed
       << " snr_list=" << join_numbers(cfg.snr_db_grid) << '\n';
    os << "# n_b=" << cfg.n_b << " n_r=" << cfg.n_r << " n_m=" << cfg.n_m << " p=" << cfg.p << " t=" << cfg.t
       << " coherence_length=" << format_double(cfg.coherence_length)
       << " training_length=" << format_double(cfg.effective_training_length())
       << " sin_phi_br=" << format_double(cfg.sin_phi_br) << '\n';
    os << "# paths=";
    for (std::size_t l = 0; l < cfg.paths.size(); ++l)
    {
        os << (l ? ";" : "") << format_double(cfg.paths[l].gain_variance) << ':'
           << interval_text(cfg.paths[l].prior);
    }
    os << " mu=" << (cfg.anm.mu ? format_double(*cfg.anm.mu) : std::string("auto"))
       << " mu_scale=" << format_double(cfg.anm.mu_scale)
       << " tolerance=" << format_double(cfg.anm.solver_tolerance) << '\n';
    if (cfg.geometry)
    {
        const GeometrySpec& g = *cfg.geometry;
        os << "# geometry bs=" << format_double(g.bs.x) << ',' << format_double(g.bs.y)
           << " ris=" << format_double(g.ris.x) << ',' << format_double(g.ris.y)
           << " ms=" << format_double(g.ms.x) << ',' << format_double(g.ms.y)
           << " epsilon=" << format_double(g.epsilon) << " orientation=" << format_double(g.orientation)
           << '\n';
    }
    os << "# solver_failures=" << result.solver_failures << " attempted_trials=" << result.attempted_trials
       << '\n';
    os << "scenario,method,snr_db,metric_name,value,trials,seed\n";
    for (const auto& r : result.records)
    {
        os << r.scenario << ',' << r.method << ',' << format_double(r.snr_db) << ',' << r.metric_name << ','
           << format_double(r.value) << ',' << r.trials << ',' << r.seed << '\n';
    }
}

void write_csv_file(const ExperimentConfig& cfg, const RunResult& result, const std::string& path)
{
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        write_csv(cfg, result, os);
        os.flush();
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        std::size_t used = 0;
        const std::string trimmed = item.substr(b);
        const double v = std::stod(trimmed, &used);
        if (trimmed.find_first_not_of(" \t", used) != std::string::npos)
            throw std::invalid_argument("bad number: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty number list");
    return out;
}

namespace
{

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v)
{
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("bad number: " + v);
    return d;
}

long long to_integer(const std::string& v)
{
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("bad integer: " + v);
    return d;
}

geometry::Position2D to_position(const std::string& v)
{
    const auto xy = parse_number_list(v);
    if (xy.size() != 2) throw std::invalid_argument("position needs x,y: " + v);
    return {xy[0], xy[1]};
}

// "var:a:b;var:a:b"
std::vector<PathSpec> to_paths(const std::string& v)
{
    std::vector<PathSpec> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';'))
    {
        item = trim(item);
        if (item.empty()) continue;
        std::vector<double> parts;
        std::stringstream is(item);
        std::string p;
        while (std::getline(is, p, ':')) parts.push_back(to_double(trim(p)));
        if (parts.size() != 3) throw std::invalid_argument("path needs variance:a:b: " + item);
        out.push_back({parts[0], geometry::make_frequency_interval(parts[1], parts[2])});
    }
    if (out.empty()) throw std::invalid_argument("empty path list");
    return out;
}

GeometrySpec& geometry_of(ExperimentConfig& cfg)
{
    if (!cfg.geometry) cfg.geometry.emplace();
    return *cfg.geometry;
}

} // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    const std::string v = trim(value);
    if (key == "scenario")
    {
        // a preset resets every field it owns
        const ExperimentConfig base = preset(parse_scenario(v));
        const std::string out = cfg.output_path;
        cfg = base;
        cfg.output_path = out;
    }
    else if (key == "snr_list") cfg.snr_db_grid = parse_number_list(v);
    else if (key == "trials") cfg.trials = static_cast<int>(to_integer(v));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_integer(v));
    else if (key == "n_b") cfg.n_b = to_integer(v);
    else if (key == "n_r") cfg.n_r = to_integer(v);
    else if (key == "n_m") cfg.n_m = to_integer(v);
    else if (key == "p") cfg.p = to_integer(v);
    else if (key == "t") cfg.t = to_integer(v);
    else if (key == "paths") cfg.paths = to_paths(v);
    else if (key == "sin_phi_br") cfg.sin_phi_br = to_double(v);
    else if (key == "coherence_length") cfg.coherence_length = to_double(v);
    else if (key == "training_length") cfg.training_length = to_double(v);
    else if (key == "report_mse") cfg.report_mse = to_integer(v) != 0;
    else if (key == "report_se") cfg.report_se = to_integer(v) != 0;
    else if (key == "mu")
    {
        if (v == "auto") cfg.anm.mu.reset();
        else cfg.anm.mu = to_double(v);
    }
    else if (key == "mu_scale") cfg.anm.mu_scale = to_double(v);
    else if (key == "tolerance") cfg.anm.solver_tolerance = to_double(v);
    else if (key == "max_iterations") cfg.anm.max_iterations = static_cast<int>(to_integer(v));
    else if (key == "admm_penalty") cfg.anm.admm_penalty = to_double(v);
    else if (key == "output") cfg.output_path = v;
    else if (key == "threads") cfg.threads = static_cast<unsigned>(to_integer(v));
    else if (key == "bs") geometry_of(cfg).bs = to_position(v);
    else if (key == "ris") geometry_of(cfg).ris = to_position(v);
    else if (key == "ms") geometry_of(cfg).ms = to_position(v);
    else if (key == "epsilon") geometry_of(cfg).epsilon = to_double(v);
    else if (key == "orientation") geometry_of(cfg).orientation = to_double(v);
    else throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig parse_config(std::istream& is, ExperimentConfig base)
{
    ExperimentConfig cfg = std::move(base);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base)
{
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path);
    return parse_config(is, std::move(base));
}

} // namespace risloc::harness
