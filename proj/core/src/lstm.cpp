#include "evcast/lstm.hpp"

#include "evcast/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace evcast {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double uniform_pm(RngStream& rng, double bound) {
    return (2.0 * rng.next_unit() - 1.0) * bound;
}

void check_shapes(const LstmParams& p) {
    const std::size_t cols = p.hidden + p.input;
    auto ok_matrix = [&](const Matrix& m) { return m.rows == p.hidden && m.cols == cols; };
    if (p.hidden == 0 || p.input == 0 || !ok_matrix(p.w_i) || !ok_matrix(p.w_f) ||
        !ok_matrix(p.w_o) || !ok_matrix(p.w_c) || p.b_i.size() != p.hidden ||
        p.b_f.size() != p.hidden || p.b_o.size() != p.hidden || p.b_c.size() != p.hidden ||
        p.w_y.size() != p.hidden) {
        throw ValidationError("lstm: parameter shapes are inconsistent");
    }
    if (!p.readout && p.hidden != 1)
        throw ValidationError("lstm: the no-readout formulation requires hidden == 1");
}

double readout_of(const LstmParams& p, const Tensor& h) {
    if (!p.readout) return h[0];
    double y = p.b_y;
    for (std::size_t k = 0; k < p.hidden; ++k) y += p.w_y[k] * h[k];
    return y;
}

} // namespace

LstmParams init_lstm(std::size_t hidden, std::size_t input, RngStream& rng, bool readout) {
    if (hidden == 0 || input == 0)
        throw ValidationError("init_lstm: hidden and input sizes must be positive");
    if (!readout && hidden != 1)
        throw ValidationError("init_lstm: the no-readout formulation requires hidden == 1");

    LstmParams p;
    p.hidden = hidden;
    p.input = input;
    p.readout = readout;
    const std::size_t cols = hidden + input;
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));

    for (Matrix* m : {&p.w_i, &p.w_f, &p.w_o, &p.w_c}) {
        *m = Matrix(hidden, cols);
        for (double& w : m->a) w = uniform_pm(rng, bound);
    }
    p.b_i.assign(hidden, 0.0);
    p.b_f.assign(hidden, 1.0);
    p.b_o.assign(hidden, 0.0);
    p.b_c.assign(hidden, 0.0);

    p.w_y.assign(hidden, 0.0);
    p.b_y = 0.0;
    if (readout) {
        const double ry = 1.0 / std::sqrt(static_cast<double>(hidden));
        for (double& w : p.w_y) w = uniform_pm(rng, ry);
    }
    return p;
}

LstmState zero_state(const LstmParams& p) {
    return {Tensor(p.hidden, 0.0), Tensor(p.hidden, 0.0)};
}

LstmState forward_step(const LstmParams& p, std::span<const double> x, const LstmState& state,
                       std::vector<LstmStepCache>* cache) {
    check_shapes(p);
    if (x.size() != p.input) throw ValidationError("forward_step: input size mismatch");
    if (state.h.size() != p.hidden || state.c.size() != p.hidden)
        throw ValidationError("forward_step: state size mismatch");

    const std::size_t H = p.hidden;
    Tensor z(H + p.input);
    std::copy(state.h.begin(), state.h.end(), z.begin());
    std::copy(x.begin(), x.end(), z.begin() + static_cast<std::ptrdiff_t>(H));

    Tensor ai(H), af(H), ao(H), ac(H);
    matvec(p.w_i, z, ai);
    matvec(p.w_f, z, af);
    matvec(p.w_o, z, ao);
    matvec(p.w_c, z, ac);

    LstmState next{Tensor(H), Tensor(H)};
    Tensor gi(H), gf(H), go(H), gg(H);
    for (std::size_t k = 0; k < H; ++k) {
        gi[k] = sigmoid(ai[k] + p.b_i[k]);
        gf[k] = sigmoid(af[k] + p.b_f[k]);
        go[k] = sigmoid(ao[k] + p.b_o[k]);
        gg[k] = std::tanh(ac[k] + p.b_c[k]);
        next.c[k] = gf[k] * state.c[k] + gi[k] * gg[k];
        next.h[k] = go[k] * std::tanh(next.c[k]);
        if (!std::isfinite(next.c[k]) || !std::isfinite(next.h[k]))
            throw NumericError("forward_step: non-finite state component");
    }

    if (cache) {
        LstmStepCache entry;
        entry.z = std::move(z);
        entry.i = std::move(gi);
        entry.f = std::move(gf);
        entry.o = std::move(go);
        entry.g = std::move(gg);
        entry.c_prev = state.c;
        entry.c = next.c;
        entry.h = next.h;
        cache->push_back(std::move(entry));
    }
    return next;
}

WindowResult predict_window(const LstmParams& p, const Matrix& x,
                            std::vector<LstmStepCache>* cache) {
    check_shapes(p);
    if (x.rows == 0) throw ValidationError("predict_window: empty window");
    if (x.cols != p.input) throw ValidationError("predict_window: column count mismatch");

    LstmState state = zero_state(p);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const std::span<const double> row(x.a.data() + r * x.cols, x.cols);
        try {
            state = forward_step(p, row, state, cache);
        } catch (const NumericError& e) {
            throw NumericError("predict_window: step " + std::to_string(r) + ": " + e.what());
        }
    }

    WindowResult out;
    out.y_hat = readout_of(p, state.h);
    out.state = std::move(state);
    if (!std::isfinite(out.y_hat)) throw NumericError("predict_window: non-finite forecast");
    return out;
}

LstmGrads backward_window(const LstmParams& p, const std::vector<LstmStepCache>& cache,
                          double target) {
    check_shapes(p);
    if (cache.empty()) throw ValidationError("backward_window: empty cache");
    const std::size_t H = p.hidden;
    const std::size_t cols = H + p.input;

    LstmGrads g;
    g.w_i = Matrix(H, cols);
    g.w_f = Matrix(H, cols);
    g.w_o = Matrix(H, cols);
    g.w_c = Matrix(H, cols);
    g.b_i.assign(H, 0.0);
    g.b_f.assign(H, 0.0);
    g.b_o.assign(H, 0.0);
    g.b_c.assign(H, 0.0);
    g.w_y.assign(H, 0.0);

    const Tensor& h_final = cache.back().h;
    const double y_hat = readout_of(p, h_final);
    const double dy = y_hat - target;

    Tensor dh(H, 0.0), dc(H, 0.0);
    if (p.readout) {
        g.b_y = dy;
        for (std::size_t k = 0; k < H; ++k) {
            g.w_y[k] = dy * h_final[k];
            dh[k] = dy * p.w_y[k];
        }
    } else {
        dh[0] = dy;
    }

    Tensor dai(H), daf(H), dao(H), dac(H), dz(cols);
    for (std::size_t t = cache.size(); t-- > 0;) {
        const LstmStepCache& s = cache[t];
        for (std::size_t k = 0; k < H; ++k) {
            const double tc = std::tanh(s.c[k]);
            const double do_k = dh[k] * tc;
            dao[k] = do_k * s.o[k] * (1.0 - s.o[k]);
            const double dck = dc[k] + dh[k] * s.o[k] * (1.0 - tc * tc);
            dai[k] = dck * s.g[k] * s.i[k] * (1.0 - s.i[k]);
            daf[k] = dck * s.c_prev[k] * s.f[k] * (1.0 - s.f[k]);
            dac[k] = dck * s.i[k] * (1.0 - s.g[k] * s.g[k]);
            dc[k] = dck * s.f[k];
            g.b_i[k] += dai[k];
            g.b_f[k] += daf[k];
            g.b_o[k] += dao[k];
            g.b_c[k] += dac[k];
        }
        outer_add(g.w_i, dai, s.z);
        outer_add(g.w_f, daf, s.z);
        outer_add(g.w_o, dao, s.z);
        outer_add(g.w_c, dac, s.z);

        std::fill(dz.begin(), dz.end(), 0.0);
        matvec_transpose_add(p.w_i, dai, dz);
        matvec_transpose_add(p.w_f, daf, dz);
        matvec_transpose_add(p.w_o, dao, dz);
        matvec_transpose_add(p.w_c, dac, dz);
        std::copy(dz.begin(), dz.begin() + static_cast<std::ptrdiff_t>(H), dh.begin());
    }
    return g;
}

namespace {

std::vector<Tensor*> lstm_param_tensors(LstmParams& p, Tensor& b_y_slot) {
    b_y_slot.assign(1, p.b_y);
    return {&p.w_i.a, &p.w_f.a, &p.w_o.a, &p.w_c.a, &p.b_i, &p.b_f,
            &p.b_o,   &p.b_c,   &p.w_y,   &b_y_slot};
}

std::vector<const Tensor*> lstm_grad_tensors(const LstmGrads& g, Tensor& gb_y_slot) {
    gb_y_slot.assign(1, g.b_y);
    return {&g.w_i.a, &g.w_f.a, &g.w_o.a, &g.w_c.a, &g.b_i, &g.b_f,
            &g.b_o,   &g.b_c,   &g.w_y,   &gb_y_slot};
}

double mse_over(const LstmParams& p, const std::vector<WindowedSample>& samples,
                std::size_t begin, std::size_t end) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double d = predict_window(p, samples[i].x).y_hat - samples[i].target;
        acc += d * d;
    }
    return acc / static_cast<double>(end - begin);
}

} // namespace

LstmTrainResult train_lstm(const std::vector<WindowedSample>& samples,
                           const LstmTrainConfig& cfg) {
    if (!(cfg.lr > 0.0)) throw ValidationError("train_lstm: lr must be positive");
    if (std::fabs(cfg.train_frac + cfg.valid_frac + cfg.test_frac - 1.0) > 1e-9)
        throw ValidationError("train_lstm: split fractions must sum to 1");
    if (!(cfg.train_frac > 0.0 && cfg.valid_frac > 0.0 && cfg.test_frac > 0.0))
        throw ValidationError("train_lstm: split fractions must be positive");

    const std::size_t n = samples.size();
    const std::size_t n_train = static_cast<std::size_t>(std::floor(cfg.train_frac * n));
    const std::size_t n_valid = static_cast<std::size_t>(std::floor(cfg.valid_frac * n));
    const std::size_t n_test = n - n_train - n_valid;
    if (n_train < 2 || n_valid < 2 || n_test < 2)
        throw ValidationError("train_lstm: every chronological split needs at least 2 samples");
    const std::size_t input = samples.front().x.cols;

    RngStream init_rng = RngStream(cfg.seed, 101);
    LstmTrainResult result;
    result.params = init_lstm(cfg.hidden, input, init_rng, cfg.readout);
    result.train_count = n_train;
    result.valid_count = n_valid;
    result.test_count = n_test;

    LstmParams& p = result.params;
    LstmParams best = p;
    double best_valid = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;

    AdamState adam;
    RngStream shuffle_root(cfg.seed, 102);
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0u);
    std::vector<LstmStepCache> cache;
    Tensor b_y_slot, gb_y_slot;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        RngStream shuffle = shuffle_root.split(epoch);
        for (std::size_t i = n_train; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }

        double train_acc = 0.0;
        for (const std::size_t idx : order) {
            cache.clear();
            const WindowedSample& s = samples[idx];
            const WindowResult r = predict_window(p, s.x, &cache);
            const double d = r.y_hat - s.target;
            train_acc += d * d;
            const LstmGrads grads = backward_window(p, cache, s.target);
            auto params = lstm_param_tensors(p, b_y_slot);
            auto gradient = lstm_grad_tensors(grads, gb_y_slot);
            adam_step(params, gradient, adam, cfg.lr);
            p.b_y = b_y_slot[0];
        }

        EpochLoss loss;
        loss.train_mse = train_acc / static_cast<double>(n_train);
        loss.valid_mse = mse_over(p, samples, n_train, n_train + n_valid);
        if (!std::isfinite(loss.train_mse) || !std::isfinite(loss.valid_mse))
            throw NumericError("train_lstm: non-finite loss at epoch " + std::to_string(epoch));
        result.history.push_back(loss);

        if (loss.valid_mse < best_valid) {
            best_valid = loss.valid_mse;
            best = p;
            best_epoch = epoch;
        } else if (epoch - best_epoch > cfg.patience) {
            break;
        }
    }

    result.params = best;
    result.best_epoch = best_epoch;
    return result;
}

std::vector<CellRecord> extract_cell_states(const LstmParams& p,
                                            const std::vector<FeatureFrame>& frames,
                                            std::size_t n_h) {
    if (n_h == 0) throw ValidationError("extract_cell_states: n_h must be positive");
    if (frames.size() <= n_h)
        throw ValidationError("extract_cell_states: need more than n_h frames");

    std::vector<CellRecord> out;
    out.reserve(frames.size() - n_h);
    Matrix x(n_h, 3);
    for (std::size_t j = n_h - 1; j + 1 < frames.size(); ++j) {
        for (std::size_t r = 0; r < n_h; ++r) {
            const FeatureFrame& f = frames[j + 1 - n_h + r];
            x(r, 0) = f.energy_kwh;
            x(r, 1) = f.charger_hours;
            x(r, 2) = f.satisfaction_pct;
        }
        const WindowResult r = predict_window(p, x);
        CellRecord rec;
        rec.t = frames[j].t;
        rec.cell = r.state.c;
        rec.y_hat_next = r.y_hat;
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}};
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols, const char* name) {
    Matrix m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.a = j.at("data").get<Tensor>();
    if (m.rows != rows || m.cols != cols || m.a.size() != rows * cols)
        throw ValidationError(std::string("parse_lstm: shape mismatch in ") + name);
    return m;
}

Tensor vector_from_json(const json& j, std::size_t size, const char* name) {
    Tensor v = j.get<Tensor>();
    if (v.size() != size)
        throw ValidationError(std::string("parse_lstm: shape mismatch in ") + name);
    return v;
}

} // namespace

std::string serialize_lstm(const LstmParams& p) {
    check_shapes(p);
    json j;
    j["format"] = "evcast-lstm";
    j["version"] = 1;
    j["hidden"] = p.hidden;
    j["input"] = p.input;
    j["readout"] = p.readout;
    j["w_i"] = matrix_to_json(p.w_i);
    j["w_f"] = matrix_to_json(p.w_f);
    j["w_o"] = matrix_to_json(p.w_o);
    j["w_c"] = matrix_to_json(p.w_c);
    j["b_i"] = p.b_i;
    j["b_f"] = p.b_f;
    j["b_o"] = p.b_o;
    j["b_c"] = p.b_c;
    j["w_y"] = p.w_y;
    j["b_y"] = p.b_y;
    return j.dump();
}

LstmParams parse_lstm(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("parse_lstm: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "evcast-lstm")
            throw ValidationError("parse_lstm: unrecognized format tag");
        if (j.at("version").get<int>() != 1)
            throw ValidationError("parse_lstm: unsupported version");

        LstmParams p;
        p.hidden = j.at("hidden").get<std::size_t>();
        p.input = j.at("input").get<std::size_t>();
        p.readout = j.at("readout").get<bool>();
        const std::size_t cols = p.hidden + p.input;
        p.w_i = matrix_from_json(j.at("w_i"), p.hidden, cols, "w_i");
        p.w_f = matrix_from_json(j.at("w_f"), p.hidden, cols, "w_f");
        p.w_o = matrix_from_json(j.at("w_o"), p.hidden, cols, "w_o");
        p.w_c = matrix_from_json(j.at("w_c"), p.hidden, cols, "w_c");
        p.b_i = vector_from_json(j.at("b_i"), p.hidden, "b_i");
        p.b_f = vector_from_json(j.at("b_f"), p.hidden, "b_f");
        p.b_o = vector_from_json(j.at("b_o"), p.hidden, "b_o");
        p.b_c = vector_from_json(j.at("b_c"), p.hidden, "b_c");
        p.w_y = vector_from_json(j.at("w_y"), p.hidden, "w_y");
        p.b_y = j.at("b_y").get<double>();
        check_shapes(p);
        return p;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("parse_lstm: malformed weight file: ") + e.what());
    }
}

} // namespace evcast
