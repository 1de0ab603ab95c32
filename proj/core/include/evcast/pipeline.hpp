#pragma once

#include "evcast/aeppo.hpp"
#include "evcast/lstm.hpp"
#include "evcast/metrics.hpp"
#include "evcast/sessions.hpp"
#include "evcast/transformer.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evcast {

/// Everything one run needs, with defaults matching the reference
/// hyperparameter table. Serialized as flat JSON; a config file may give any
/// subset of keys and unknown keys are rejected.
struct RunConfig {
    std::string sessions_path;
    std::string artifacts_dir = "artifacts";

    std::size_t n_h = 12;
    std::size_t hidden = 32;
    double lstm_lr = 0.001;
    std::size_t lstm_epochs = 200;
    std::size_t patience = 20;

    double actor_lr = 0.0001;
    double critic_lr = 0.0001;
    double clip = 0.1;
    double gamma = 0.99;
    std::size_t n_e = 10000;
    std::size_t t_ep = 168;
    std::size_t n_a = 32;
    std::size_t state_batch = 16;
    double zeta = 0.75;

    std::size_t pso_population = 20;
    std::size_t pso_iterations = 100;
    double pso_cognitive = 2.0;
    double pso_social = 2.0;
    double pso_inertia = 0.7;

    std::vector<int> pis = {30, 60, 90};
    std::uint64_t seed = 0;
    /// "aeppo" trains with the adaptive sampling scale, "ppo" with the
    /// actor's own scale head.
    std::string mode = "aeppo";
    bool strict_paper = false;
    bool literal_returns = false;

    /// Season grouping for evaluation reports; the origin anchors hour 0 of
    /// the frame timeline to a UTC instant.
    bool group_seasons = false;
    long long origin_epoch_seconds = 0;
};

/// Flat JSON round trip. Parsing starts from defaults, so a file may give
/// any subset of keys; an unknown key or a wrongly typed value is an error.
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

/// Range checks shared by every entry point that consumes a config.
void validate_config(const RunConfig& cfg);

/// FNV-1a over the bytes; stable fingerprint for configs and artifacts.
std::uint64_t digest64(std::string_view text);

/// A trained forecaster: frozen LSTM, its input normalizer, the RL actor
/// and critic, and the chronological boundaries of the data it was fitted
/// on. Boundaries are hour values of the frame timeline: training targets
/// lie in (train_begin_t, train_end_t], validation targets in
/// (train_end_t, valid_end_t], test targets in (valid_end_t, test_end_t].
struct ModelBundle {
    std::string mode = "lstm-aeppo";
    /// Decimal digest64 of the config JSON the bundle was trained from.
    std::string config_digest;
    std::size_t n_h = 0;
    double zeta = 0.75;
    long train_begin_t = 0;
    long train_end_t = 0;
    long valid_end_t = 0;
    long test_end_t = 0;
    Normalizer normalizer;
    LstmParams lstm;
    MlpParams actor;
    MlpParams critic;
};

/// Versioned JSON serialization; parsing rejects version, mode, or shape
/// mismatches.
std::string serialize_bundle(const ModelBundle& bundle);
ModelBundle parse_bundle(const std::string& text);

/// A full training run: the bundle plus the per-stage logs behind it.
struct TrainingRun {
    ModelBundle bundle;
    std::vector<EpochLoss> lstm_history;
    std::size_t lstm_best_epoch = 0;
    std::vector<AeppoIterationLog> rl_history;
};

/// Hourly frames for the whole span a session set touches, aggregated with
/// the config's boundary handling.
std::vector<FeatureFrame> frames_from_sessions(const std::vector<ChargingSession>& sessions,
                                               const RunConfig& cfg);

/// Trains on contiguous hourly frames: fits the normalizer on the training
/// span, trains the LSTM on the windows, extracts cell states over the
/// training span, and trains the RL agent on them. Deterministic in
/// cfg.seed. Errors carry the failing stage's name.
TrainingRun train_from_frames(const std::vector<FeatureFrame>& frames, const RunConfig& cfg);

/// frames_from_sessions followed by train_from_frames.
TrainingRun run_training(const std::vector<ChargingSession>& sessions, const RunConfig& cfg);

/// Trains only the RL stage against an already trained LSTM, rebuilding the
/// normalizer and split boundaries from the frames exactly as
/// train_from_frames would.
TrainingRun train_rl_from_lstm(const LstmParams& lstm, const std::vector<FeatureFrame>& frames,
                               const RunConfig& cfg);

/// One-step probabilistic forecast from the last n_h of the given frames:
/// the mean comes from the LSTM readout and the scale from the actor mean
/// through the action-to-scale map, both denormalized.
GaussianForecast forecast_next(const ModelBundle& bundle,
                               const std::vector<FeatureFrame>& recent);

/// One scored forecast: target hour, realized energy, and the forecast made
/// from the n_h preceding hours.
struct ForecastRow {
    long t = 0;
    double y = 0.0;
    GaussianForecast forecast;
};

/// Rolling one-step forecasts with true history for every hour of the
/// frames that has a full window before it.
std::vector<ForecastRow> rolling_forecasts(const ModelBundle& bundle,
                                           const std::vector<FeatureFrame>& frames);

struct EvalOptions {
    std::vector<int> pis = {30, 60, 90};
    bool group_seasons = false;
    long long origin_epoch_seconds = 0;
};

/// Mean Winkler and pinball scores for one (season, interval) group.
struct SeasonPiScore {
    std::string season;
    int pi = 0;
    double winkler = 0.0;
    double pinball = 0.0;
};

struct PiCoverage {
    int pi = 0;
    double coverage = 0.0;
};

/// Per-hour aggregated evaluation: scores per season and interval, overall
/// CRPS, and empirical interval coverage.
struct MetricsReport {
    std::vector<SeasonPiScore> rows;
    std::vector<PiCoverage> coverage;
    double crps = 0.0;
    std::size_t n_targets = 0;
};

/// Scores already-made forecasts. Winkler uses the interval's own miss rate
/// alpha = (100 - p)/100; pinball averages the interval's two quantiles.
MetricsReport score_rows(const std::vector<ForecastRow>& rows, const EvalOptions& opts);

/// Rolling forecasts over the frames, keeping only targets strictly after
/// the bundle's validation boundary. Targets inside the training or
/// validation ranges are dropped; if none remain the test range overlaps
/// training and the call fails.
MetricsReport evaluate(const ModelBundle& bundle, const std::vector<FeatureFrame>& frames,
                       const EvalOptions& opts);

/// CSV renderings of the artifacts. The report carries one header row
/// (season,PI,winkler,pinball), data rows, and trailing comment lines with
/// the CRPS/coverage summary. Bands columns follow the requested intervals:
/// t,y,mu,lower30,upper30,... by default.
std::string report_to_csv(const MetricsReport& report);
std::string bands_to_csv(const std::vector<ForecastRow>& rows, const std::vector<int>& pis);
std::string rl_log_to_csv(const std::vector<AeppoIterationLog>& history);
std::string lstm_log_to_csv(const std::vector<EpochLoss>& history);

} // namespace evcast
