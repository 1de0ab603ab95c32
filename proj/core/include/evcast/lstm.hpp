#pragma once

#include "evcast/numerics.hpp"
#include "evcast/transformer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evcast {

/// Single-layer LSTM parameters. Gate matrices act on the concatenation
/// [h, x] of the previous hidden state and the current input row. The scalar
/// forecast is read out linearly from the final hidden state; readout=false
/// reproduces the bare formulation where the forecast IS the hidden state,
/// which forces hidden == 1.
struct LstmParams {
    std::size_t hidden = 0;
    std::size_t input = 0;
    bool readout = true;
    Matrix w_i, w_f, w_o, w_c;
    Tensor b_i, b_f, b_o, b_c;
    Tensor w_y;
    double b_y = 0.0;
};

struct LstmState {
    Tensor h;
    Tensor c;
};

/// Everything the backward pass needs about one forward step.
struct LstmStepCache {
    Tensor z;
    Tensor i, f, o, g;
    Tensor c_prev, c, h;
};

/// Gradients of the loss with respect to every parameter tensor, in the same
/// shapes as LstmParams.
struct LstmGrads {
    Matrix w_i, w_f, w_o, w_c;
    Tensor b_i, b_f, b_o, b_c;
    Tensor w_y;
    double b_y = 0.0;
};

/// Weights uniform in +-1/sqrt(hidden + input); biases zero except the
/// forget gate, which starts at 1 so early training does not erase memory.
LstmParams init_lstm(std::size_t hidden, std::size_t input, RngStream& rng,
                     bool readout = true);

LstmState zero_state(const LstmParams& p);

/// One recurrence step. If cache is non-null, the step's intermediates are
/// appended for a later backward pass.
LstmState forward_step(const LstmParams& p, std::span<const double> x, const LstmState& state,
                       std::vector<LstmStepCache>* cache = nullptr);

struct WindowResult {
    double y_hat = 0.0;
    LstmState state;
};

/// Runs the window rows through the recurrence from a zero state and reads
/// out the scalar forecast.
WindowResult predict_window(const LstmParams& p, const Matrix& x,
                            std::vector<LstmStepCache>* cache = nullptr);

/// Backpropagation through time for the squared-error loss
/// L = 0.5 (y_hat - target)^2 over one window cache.
LstmGrads backward_window(const LstmParams& p, const std::vector<LstmStepCache>& cache,
                          double target);

struct LstmTrainConfig {
    double lr = 0.001;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
    double train_frac = 0.8;
    double valid_frac = 0.1;
    double test_frac = 0.1;
    std::size_t hidden = 32;
    std::size_t patience = 20;
    bool readout = true;
};

struct EpochLoss {
    double train_mse = 0.0;
    double valid_mse = 0.0;
};

struct LstmTrainResult {
    LstmParams params;
    std::vector<EpochLoss> history;
    std::size_t best_epoch = 0;
    std::size_t train_count = 0;
    std::size_t valid_count = 0;
    std::size_t test_count = 0;
};

/// Chronological train/valid/test split, per-sample Adam updates with a
/// seeded shuffle each epoch, early stopping on validation MSE. Returns the
/// parameters of the best validation epoch. train_mse is averaged over the
/// losses seen during the epoch's pass; valid_mse is evaluated after it.
LstmTrainResult train_lstm(const std::vector<WindowedSample>& samples,
                           const LstmTrainConfig& cfg);

/// The RL-facing view of a trained forecaster: for every hour t whose
/// successor exists in the frame sequence, the final cell vector of the
/// window ending at t and the point forecast for t+1.
struct CellRecord {
    long t = 0;
    Tensor cell;
    double y_hat_next = 0.0;
};

std::vector<CellRecord> extract_cell_states(const LstmParams& p,
                                            const std::vector<FeatureFrame>& frames,
                                            std::size_t n_h);

/// Versioned JSON weight serialization; parsing rejects version or shape
/// mismatches.
std::string serialize_lstm(const LstmParams& p);
LstmParams parse_lstm(const std::string& text);

} // namespace evcast
