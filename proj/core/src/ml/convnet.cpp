#include "ddx/ml/convnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "ddx/parallel.hpp"
#include "ddx/simulator.hpp"

namespace ddx {

using nlohmann::json;

void ConvNetConfig::validate() const {
    if (seq_len < 1) fail("config", "seq_len must be >= 1");
    if (embed_dim < 1) fail("config", "embed_dim must be >= 1");
    for (int f : filters) {
        if (f < 1) fail("config", "conv filter counts must be >= 1");
    }
    if (kernel < 1 || kernel % 2 == 0) fail("config", "kernel must be odd for same padding");
    if (fc_hidden < 1) fail("config", "fc_hidden must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail("config", "dropout must be in [0,1)");
    if (vocab_size < 1) fail("config", "vocab_size must be >= 1");
    if (n_classes < 2) fail("config", "n_classes must be >= 2");
}

json ConvNetConfig::to_json() const {
    json j;
    j["seq_len"] = seq_len;
    j["embed_dim"] = embed_dim;
    j["filters"] = filters;
    j["kernel"] = kernel;
    j["fc_hidden"] = fc_hidden;
    j["dropout"] = dropout;
    j["vocab_size"] = vocab_size;
    j["n_classes"] = n_classes;
    return j;
}

ConvNetConfig ConvNetConfig::from_json(const json& j) {
    static const std::vector<std::string> allowed = {"seq_len",   "embed_dim", "filters",
                                                     "kernel",    "fc_hidden", "dropout",
                                                     "vocab_size", "n_classes"};
    if (!j.is_object()) fail("config", "convnet config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            fail("config", "unknown convnet config key '" + it.key() + "'");
    }
    ConvNetConfig c;
    if (j.contains("seq_len")) c.seq_len = j.at("seq_len").get<int>();
    if (j.contains("embed_dim")) c.embed_dim = j.at("embed_dim").get<int>();
    if (j.contains("filters")) {
        const json& arr = j.at("filters");
        if (!arr.is_array() || arr.size() != 3) fail("config", "filters must be an array of 3 counts");
        for (int i = 0; i < 3; ++i) c.filters[static_cast<std::size_t>(i)] = arr[static_cast<std::size_t>(i)].get<int>();
    }
    if (j.contains("kernel")) c.kernel = j.at("kernel").get<int>();
    if (j.contains("fc_hidden")) c.fc_hidden = j.at("fc_hidden").get<int>();
    if (j.contains("dropout")) c.dropout = j.at("dropout").get<double>();
    if (j.contains("vocab_size")) c.vocab_size = j.at("vocab_size").get<int>();
    if (j.contains("n_classes")) c.n_classes = j.at("n_classes").get<int>();
    return c;
}

template <typename S>
ConvNetT<S> init_convnet(const ConvNetConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ConvNetT<S> m;
    m.cfg = cfg;
    Rng rng = Rng::derive(seed, 0x1417);

    auto glorot = [&](std::vector<S>& w, std::size_t n, int fan_in, int fan_out) {
        double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        w.resize(n);
        for (auto& x : w) x = static_cast<S>(rng.uniform(-r, r));
    };

    auto rows = static_cast<std::size_t>(cfg.vocab_size) + 1;
    m.embedding.resize(rows * static_cast<std::size_t>(cfg.embed_dim));
    for (auto& x : m.embedding) x = static_cast<S>(rng.uniform(-0.05, 0.05));

    int cin = cfg.embed_dim;
    for (int l = 0; l < 3; ++l) {
        int cout = cfg.filters[static_cast<std::size_t>(l)];
        glorot(m.conv_w[static_cast<std::size_t>(l)],
               static_cast<std::size_t>(cout) * static_cast<std::size_t>(cfg.kernel * cin),
               cfg.kernel * cin, cfg.kernel * cout);
        m.conv_b[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(cout), S(0));
        cin = cout;
    }
    glorot(m.fc1_w, static_cast<std::size_t>(cfg.fc_hidden) * static_cast<std::size_t>(cfg.flat_dim()),
           cfg.flat_dim(), cfg.fc_hidden);
    m.fc1_b.assign(static_cast<std::size_t>(cfg.fc_hidden), S(0));
    glorot(m.fc2_w, static_cast<std::size_t>(cfg.n_classes) * static_cast<std::size_t>(cfg.fc_hidden),
           cfg.fc_hidden, cfg.n_classes);
    m.fc2_b.assign(static_cast<std::size_t>(cfg.n_classes), S(0));
    return m;
}

namespace {

template <typename S>
void conv1d_relu_forward(const S* in, int seq, int cin, const S* w, const S* b, int cout, int kernel,
                         S* out) {
    const int pad = kernel / 2;
    const int patch = kernel * cin;
    for (int t = 0; t < seq; ++t) {
        const int lo = t - pad;
        S* out_row = out + static_cast<std::ptrdiff_t>(t) * cout;
        const bool interior = lo >= 0 && lo + kernel <= seq;
        if (interior) {
            // rows lo..lo+kernel-1 are contiguous, matching the weight layout
            const S* x = in + static_cast<std::ptrdiff_t>(lo) * cin;
            for (int o = 0; o < cout; ++o) {
                const S* wr = w + static_cast<std::ptrdiff_t>(o) * patch;
                S acc = b[o];
                for (int p = 0; p < patch; ++p) acc += wr[p] * x[p];
                out_row[o] = acc > S(0) ? acc : S(0);
            }
        } else {
            for (int o = 0; o < cout; ++o) {
                const S* wr = w + static_cast<std::ptrdiff_t>(o) * patch;
                S acc = b[o];
                for (int j = 0; j < kernel; ++j) {
                    int s = lo + j;
                    if (s < 0 || s >= seq) continue;
                    const S* x = in + static_cast<std::ptrdiff_t>(s) * cin;
                    const S* wj = wr + static_cast<std::ptrdiff_t>(j) * cin;
                    for (int i = 0; i < cin; ++i) acc += wj[i] * x[i];
                }
                out_row[o] = acc > S(0) ? acc : S(0);
            }
        }
    }
}

// dz is already ReLU-gated. Accumulates gw/gb and writes dx (caller zeroes).
template <typename S>
void conv1d_backward(const S* in, const S* dz, int seq, int cin, const S* w, int cout, int kernel,
                     S* gw, S* gb, S* dx) {
    const int pad = kernel / 2;
    const int patch = kernel * cin;
    for (int t = 0; t < seq; ++t) {
        const int lo = t - pad;
        const S* dzr = dz + static_cast<std::ptrdiff_t>(t) * cout;
        const bool interior = lo >= 0 && lo + kernel <= seq;
        for (int o = 0; o < cout; ++o) {
            const S g = dzr[o];
            if (g == S(0)) continue;
            gb[o] += g;
            S* gwr = gw + static_cast<std::ptrdiff_t>(o) * patch;
            const S* wr = w + static_cast<std::ptrdiff_t>(o) * patch;
            if (interior) {
                const S* x = in + static_cast<std::ptrdiff_t>(lo) * cin;
                S* dxp = dx + static_cast<std::ptrdiff_t>(lo) * cin;
                for (int p = 0; p < patch; ++p) {
                    gwr[p] += g * x[p];
                    dxp[p] += g * wr[p];
                }
            } else {
                for (int j = 0; j < kernel; ++j) {
                    int s = lo + j;
                    if (s < 0 || s >= seq) continue;
                    const S* x = in + static_cast<std::ptrdiff_t>(s) * cin;
                    S* dxp = dx + static_cast<std::ptrdiff_t>(s) * cin;
                    const S* wj = wr + static_cast<std::ptrdiff_t>(j) * cin;
                    S* gwj = gwr + static_cast<std::ptrdiff_t>(j) * cin;
                    for (int i = 0; i < cin; ++i) {
                        gwj[i] += g * x[i];
                        dxp[i] += g * wj[i];
                    }
                }
            }
        }
    }
}

template <typename S>
void relu_gate(const std::vector<S>& activation, std::vector<S>& grad) {
    for (std::size_t i = 0; i < activation.size(); ++i) {
        if (!(activation[i] > S(0))) grad[i] = S(0);
    }
}

} // namespace

template <typename S>
std::vector<std::pair<std::string, std::vector<int>>>
ConvActivations<S>::shape_trace(const ConvNetConfig& cfg) const {
    auto cols = [&](const std::vector<S>& v) { return static_cast<int>(v.size()) / cfg.seq_len; };
    return {
        {"embedding", {cfg.seq_len, cols(embedded)}},
        {"conv1", {cfg.seq_len, cols(conv_out[0])}},
        {"conv2", {cfg.seq_len, cols(conv_out[1])}},
        {"conv3", {cfg.seq_len, cols(conv_out[2])}},
        {"flatten", {static_cast<int>(conv_out[2].size())}},
        {"fc1", {static_cast<int>(fc1_out.size())}},
        {"fc2", {static_cast<int>(probs.size())}},
    };
}

template <typename S>
void convnet_forward(const ConvNetT<S>& model, const std::vector<int>& token_ids, bool train_mode,
                     Rng* rng, ConvActivations<S>& acts) {
    const ConvNetConfig& cfg = model.cfg;
    if (static_cast<int>(token_ids.size()) != cfg.seq_len)
        fail("shape_mismatch", "expected a sequence of length " + std::to_string(cfg.seq_len));
    if (train_mode && rng == nullptr) fail("config", "train-mode forward needs an rng for dropout");

    const int seq = cfg.seq_len;
    const int E = cfg.embed_dim;
    acts.embedded.resize(static_cast<std::size_t>(seq) * static_cast<std::size_t>(E));
    for (int t = 0; t < seq; ++t) {
        int id = token_ids[static_cast<std::size_t>(t)];
        if (id < 0 || id > cfg.vocab_size)
            fail("shape_mismatch", "token id " + std::to_string(id) + " outside the embedding table");
        const S* row = model.embedding.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(E);
        std::memcpy(acts.embedded.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(E), row,
                    sizeof(S) * static_cast<std::size_t>(E));
    }

    const S* in = acts.embedded.data();
    int cin = E;
    for (int l = 0; l < 3; ++l) {
        int cout = cfg.filters[static_cast<std::size_t>(l)];
        acts.conv_out[static_cast<std::size_t>(l)].resize(static_cast<std::size_t>(seq) *
                                                          static_cast<std::size_t>(cout));
        conv1d_relu_forward(in, seq, cin, model.conv_w[static_cast<std::size_t>(l)].data(),
                            model.conv_b[static_cast<std::size_t>(l)].data(), cout, cfg.kernel,
                            acts.conv_out[static_cast<std::size_t>(l)].data());
        in = acts.conv_out[static_cast<std::size_t>(l)].data();
        cin = cout;
    }

    const std::size_t flat_n = acts.conv_out[2].size();
    acts.flat_dropped.resize(flat_n);
    if (train_mode) {
        // inverted dropout: survivors are scaled by 1/(1-p) so eval needs no scaling
        const double keep = 1.0 - cfg.dropout;
        const S scale = static_cast<S>(1.0 / keep);
        acts.mask_flat.resize(flat_n);
        for (std::size_t i = 0; i < flat_n; ++i) {
            acts.mask_flat[i] = rng->bernoulli(keep) ? scale : S(0);
            acts.flat_dropped[i] = acts.conv_out[2][i] * acts.mask_flat[i];
        }
    } else {
        acts.mask_flat.clear();
        std::copy(acts.conv_out[2].begin(), acts.conv_out[2].end(), acts.flat_dropped.begin());
    }

    const int H = cfg.fc_hidden;
    acts.fc1_out.resize(static_cast<std::size_t>(H));
    for (int i = 0; i < H; ++i) {
        const S* wr = model.fc1_w.data() + static_cast<std::size_t>(i) * flat_n;
        S acc = model.fc1_b[static_cast<std::size_t>(i)];
        for (std::size_t p = 0; p < flat_n; ++p) acc += wr[p] * acts.flat_dropped[p];
        acts.fc1_out[static_cast<std::size_t>(i)] = acc > S(0) ? acc : S(0);
    }

    acts.fc1_dropped.resize(static_cast<std::size_t>(H));
    if (train_mode) {
        const double keep = 1.0 - cfg.dropout;
        const S scale = static_cast<S>(1.0 / keep);
        acts.mask_fc1.resize(static_cast<std::size_t>(H));
        for (int i = 0; i < H; ++i) {
            acts.mask_fc1[static_cast<std::size_t>(i)] = rng->bernoulli(keep) ? scale : S(0);
            acts.fc1_dropped[static_cast<std::size_t>(i)] =
                acts.fc1_out[static_cast<std::size_t>(i)] * acts.mask_fc1[static_cast<std::size_t>(i)];
        }
    } else {
        acts.mask_fc1.clear();
        std::copy(acts.fc1_out.begin(), acts.fc1_out.end(), acts.fc1_dropped.begin());
    }

    const int K = cfg.n_classes;
    std::vector<double> logits(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const S* wr = model.fc2_w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(H);
        double acc = static_cast<double>(model.fc2_b[static_cast<std::size_t>(k)]);
        for (int i = 0; i < H; ++i)
            acc += static_cast<double>(wr[i]) * static_cast<double>(acts.fc1_dropped[static_cast<std::size_t>(i)]);
        logits[static_cast<std::size_t>(k)] = acc;
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    acts.probs.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        acts.probs[static_cast<std::size_t>(k)] = std::exp(logits[static_cast<std::size_t>(k)] - mx);
        total += acts.probs[static_cast<std::size_t>(k)];
    }
    for (double& p : acts.probs) p /= total;
}

template <typename S>
std::vector<double> convnet_predict(const ConvNetT<S>& model, const std::vector<int>& token_ids) {
    ConvActivations<S> acts;
    convnet_forward(model, token_ids, false, nullptr, acts);
    return acts.probs;
}

template <typename S>
ConvGrads<S>::ConvGrads(const ConvNetT<S>& model) {
    embedding.assign(model.embedding.size(), S(0));
    for (int l = 0; l < 3; ++l) {
        conv_w[static_cast<std::size_t>(l)].assign(model.conv_w[static_cast<std::size_t>(l)].size(), S(0));
        conv_b[static_cast<std::size_t>(l)].assign(model.conv_b[static_cast<std::size_t>(l)].size(), S(0));
    }
    fc1_w.assign(model.fc1_w.size(), S(0));
    fc1_b.assign(model.fc1_b.size(), S(0));
    fc2_w.assign(model.fc2_w.size(), S(0));
    fc2_b.assign(model.fc2_b.size(), S(0));
}

template <typename S>
void ConvGrads<S>::zero() {
    for (auto* g : param_groups()) std::fill(g->begin(), g->end(), S(0));
}

template <typename S>
void ConvGrads<S>::add(const ConvGrads<S>& other) {
    auto mine = param_groups();
    auto theirs = const_cast<ConvGrads<S>&>(other).param_groups();
    for (std::size_t g = 0; g < mine.size(); ++g) {
        for (std::size_t i = 0; i < mine[g]->size(); ++i) (*mine[g])[i] += (*theirs[g])[i];
    }
}

template <typename S>
double convnet_backward(const ConvNetT<S>& model, const std::vector<int>& token_ids, int label,
                        const ConvActivations<S>& acts, ConvGrads<S>& grads) {
    const ConvNetConfig& cfg = model.cfg;
    const int K = cfg.n_classes;
    const int H = cfg.fc_hidden;
    const int seq = cfg.seq_len;
    if (label < 0 || label >= K) fail("shape_mismatch", "label outside the class range");
    const bool train_mode = !acts.mask_flat.empty();

    // softmax + NLL
    std::vector<S> dlogits(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
        dlogits[static_cast<std::size_t>(k)] =
            static_cast<S>(acts.probs[static_cast<std::size_t>(k)] - (k == label ? 1.0 : 0.0));

    // fc2
    std::vector<S> dd2(static_cast<std::size_t>(H), S(0));
    for (int k = 0; k < K; ++k) {
        const S g = dlogits[static_cast<std::size_t>(k)];
        grads.fc2_b[static_cast<std::size_t>(k)] += g;
        S* gw = grads.fc2_w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(H);
        const S* w = model.fc2_w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(H);
        for (int i = 0; i < H; ++i) {
            gw[i] += g * acts.fc1_dropped[static_cast<std::size_t>(i)];
            dd2[static_cast<std::size_t>(i)] += g * w[i];
        }
    }

    // dropout 2 + ReLU
    std::vector<S> dh = std::move(dd2);
    if (train_mode) {
        for (int i = 0; i < H; ++i) dh[static_cast<std::size_t>(i)] *= acts.mask_fc1[static_cast<std::size_t>(i)];
    }
    relu_gate(acts.fc1_out, dh);

    // fc1
    const std::size_t flat_n = acts.flat_dropped.size();
    std::vector<S> dd1(flat_n, S(0));
    for (int i = 0; i < H; ++i) {
        const S g = dh[static_cast<std::size_t>(i)];
        grads.fc1_b[static_cast<std::size_t>(i)] += g;
        if (g == S(0)) continue;
        S* gw = grads.fc1_w.data() + static_cast<std::size_t>(i) * flat_n;
        const S* w = model.fc1_w.data() + static_cast<std::size_t>(i) * flat_n;
        for (std::size_t p = 0; p < flat_n; ++p) {
            gw[p] += g * acts.flat_dropped[p];
            dd1[p] += g * w[p];
        }
    }

    // dropout 1 + ReLU into conv3 output
    std::vector<S> dz = std::move(dd1);
    if (train_mode) {
        for (std::size_t p = 0; p < flat_n; ++p) dz[p] *= acts.mask_flat[p];
    }
    relu_gate(acts.conv_out[2], dz);

    // conv stack
    for (int l = 2; l >= 0; --l) {
        const int cin = l == 0 ? cfg.embed_dim : cfg.filters[static_cast<std::size_t>(l - 1)];
        const int cout = cfg.filters[static_cast<std::size_t>(l)];
        const S* input = l == 0 ? acts.embedded.data() : acts.conv_out[static_cast<std::size_t>(l - 1)].data();
        std::vector<S> dx(static_cast<std::size_t>(seq) * static_cast<std::size_t>(cin), S(0));
        conv1d_backward(input, dz.data(), seq, cin, model.conv_w[static_cast<std::size_t>(l)].data(), cout,
                        cfg.kernel, grads.conv_w[static_cast<std::size_t>(l)].data(),
                        grads.conv_b[static_cast<std::size_t>(l)].data(), dx.data());
        dz = std::move(dx);
        if (l > 0) relu_gate(acts.conv_out[static_cast<std::size_t>(l - 1)], dz);
    }

    // embedding rows; repeated ids (pads) accumulate
    const int E = cfg.embed_dim;
    for (int t = 0; t < seq; ++t) {
        int id = token_ids[static_cast<std::size_t>(t)];
        S* row = grads.embedding.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(E);
        const S* g = dz.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(E);
        for (int e = 0; e < E; ++e) row[e] += g[e];
    }

    double p = acts.probs[static_cast<std::size_t>(label)];
    return -std::log(std::max(p, 1e-300));
}

double convnet_top1(const ConvNet& model, const EncodedDataset& data) {
    if (data.items.empty()) return 0.0;
    std::vector<int> preds(data.items.size());
    parallel_for(data.items.size(), [&](std::size_t i) {
        std::vector<double> p = convnet_predict(model, data.items[i].token_ids);
        int best = 0;
        for (int k = 1; k < model.cfg.n_classes; ++k) {
            if (p[static_cast<std::size_t>(k)] > p[static_cast<std::size_t>(best)]) best = k;
        }
        preds[i] = best;
    });
    long long hits = 0;
    for (std::size_t i = 0; i < data.items.size(); ++i) {
        if (preds[i] == data.items[i].label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.items.size());
}

namespace {

constexpr std::size_t kGradBlocks = 8; // fixed so float accumulation order never depends on threads

template <typename S>
void nesterov_step(std::vector<S>& theta, std::vector<S>& vel, const std::vector<S>& grad, S lr,
                   S mu, S scale) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        S g = grad[i] * scale;
        vel[i] = mu * vel[i] + g;
        theta[i] -= lr * (g + mu * vel[i]);
    }
}

} // namespace

ConvTrainResult convnet_train_provider(const EpochDataFn& provider, const EncodedDataset& val,
                                       const ConvNetConfig& arch, const TrainConfig& config) {
    config.validate();
    const EncodedDataset& ref = provider(-1);
    if (ref.items.empty()) fail("empty_request", "training set is empty");
    if (ref.seq_len != arch.seq_len || ref.vocab_size != arch.vocab_size ||
        ref.n_classes != arch.n_classes)
        fail("shape_mismatch", "encoded dataset does not match the convnet architecture");

    ConvNet model = init_convnet<float>(arch, config.seed);
    ConvGrads<float> velocity(model);
    ConvGrads<float> total(model);
    std::vector<ConvGrads<float>> block_grads(kGradBlocks, ConvGrads<float>(model));
    std::vector<ConvActivations<float>> block_acts(kGradBlocks);
    std::vector<double> block_loss(kGradBlocks, 0.0);

    ConvNet best = model;
    double best_val = -1.0;
    int best_epoch = -1;
    double last_finite = 0.0;
    TrainReport report;

    std::vector<std::size_t> order(ref.items.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto lr = static_cast<float>(config.learning_rate);
    const auto mu = static_cast<float>(config.momentum);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const EncodedDataset& data = provider(epoch);
        if (data.items.size() != order.size()) {
            order.resize(data.items.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
        }
        Rng shuffle_rng = Rng::derive(config.seed, 0xA11 + static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const std::size_t batch = end - start;
            const std::size_t chunk = (batch + kGradBlocks - 1) / kGradBlocks;

            parallel_for(kGradBlocks, [&](std::size_t b) {
                block_grads[b].zero();
                block_loss[b] = 0.0;
                const std::size_t lo = start + b * chunk;
                const std::size_t hi = std::min(end, lo + chunk);
                for (std::size_t pos = lo; pos < hi && pos >= start; ++pos) {
                    const EncodedCase& e = data.items[order[pos]];
                    // dropout keyed by (seed, epoch, position): scheduling-free
                    Rng dropout_rng = Rng(derive_seed(
                        derive_seed(config.seed, 0xD120 + static_cast<std::uint64_t>(epoch)), pos));
                    convnet_forward(model, e.token_ids, true, &dropout_rng, block_acts[b]);
                    block_loss[b] += convnet_backward(model, e.token_ids, e.label, block_acts[b],
                                                      block_grads[b]);
                }
            });

            total.zero();
            double batch_loss = 0.0;
            for (std::size_t b = 0; b < kGradBlocks; ++b) {
                total.add(block_grads[b]);
                batch_loss += block_loss[b];
            }
            const auto scale = static_cast<float>(1.0 / static_cast<double>(batch));
            auto params = model.param_groups();
            auto vels = velocity.param_groups();
            auto gs = total.param_groups();
            for (std::size_t g = 0; g < params.size(); ++g)
                nesterov_step(*params[g], *vels[g], *gs[g], lr, mu, scale);

            double mean_loss = batch_loss / static_cast<double>(batch);
            if (!std::isfinite(mean_loss))
                fail("diverged", "training loss left the finite range; last finite loss " +
                                     std::to_string(last_finite));
            last_finite = mean_loss;
            epoch_loss += batch_loss;
        }

        double val_top1 = val.items.empty() ? 0.0 : convnet_top1(model, val);
        report.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
        report.epoch_val_top1.push_back(val_top1);
        if (val_top1 > best_val) {
            best_val = val_top1;
            best = model;
            best_epoch = epoch;
        }
    }
    report.best_epoch = best_epoch;
    report.best_val_top1 = best_val;
    return {val.items.empty() ? std::move(model) : std::move(best), std::move(report)};
}

ConvTrainResult convnet_train(const EncodedDataset& train, const EncodedDataset& val,
                              const ConvNetConfig& arch, const TrainConfig& config) {
    return convnet_train_provider([&](int) -> const EncodedDataset& { return train; }, val, arch,
                                  config);
}

ConvTrainResult convnet_train_cases(const Dataset& train, const Dataset& val,
                                    const KnowledgeBase& kb, const Vocabulary& vocab,
                                    const LabelMap& labels, const std::vector<int>& pool,
                                    const ConvNetConfig& arch, const TrainConfig& config) {
    KbIndex index(kb);
    EncodedDataset val_enc = encode_dataset(vocab, labels, val, kb, arch.seq_len);
    EncodedDataset base = encode_dataset(vocab, labels, train, kb, arch.seq_len);
    if (config.noise_augment == 0 && !config.shuffle_tokens)
        return convnet_train(base, val_enc, arch, config);
    if (config.noise_augment > 0 && pool.empty())
        fail("config", "noise_augment needs a prevalent pool");

    EncodedDataset scratch = base;
    auto provider = [&](int epoch) -> const EncodedDataset& {
        if (epoch < 0) return base;
        parallel_for(train.cases.size(), [&](std::size_t i) {
            Case c = train.cases[i];
            if (config.noise_augment > 0) {
                Rng rng = Rng(derive_seed(
                    derive_seed(config.seed, 0xA06 + static_cast<std::uint64_t>(epoch)), i));
                c = corrupt_case(c, NoiseMode::prevalent_add, config.noise_augment, pool, index, rng);
            }
            EncodedCase e = encode_case(vocab, labels, c, index, arch.seq_len);
            if (config.shuffle_tokens) {
                Rng rng = Rng(derive_seed(
                    derive_seed(config.seed, 0x517 + static_cast<std::uint64_t>(epoch)), i));
                int n_real = 0;
                while (n_real < arch.seq_len && e.token_ids[static_cast<std::size_t>(n_real)] != 0)
                    ++n_real;
                std::vector<int> prefix(e.token_ids.begin(), e.token_ids.begin() + n_real);
                rng.shuffle(prefix);
                std::copy(prefix.begin(), prefix.end(), e.token_ids.begin());
            }
            scratch.items[i] = std::move(e);
        });
        return scratch;
    };
    return convnet_train_provider(provider, val_enc, arch, config);
}

// explicit instantiations
template ConvNetT<float> init_convnet<float>(const ConvNetConfig&, std::uint64_t);
template ConvNetT<double> init_convnet<double>(const ConvNetConfig&, std::uint64_t);
template struct ConvGrads<float>;
template struct ConvGrads<double>;
template struct ConvActivations<float>;
template struct ConvActivations<double>;
template void convnet_forward<float>(const ConvNetT<float>&, const std::vector<int>&, bool, Rng*,
                                     ConvActivations<float>&);
template void convnet_forward<double>(const ConvNetT<double>&, const std::vector<int>&, bool, Rng*,
                                      ConvActivations<double>&);
template std::vector<double> convnet_predict<float>(const ConvNetT<float>&, const std::vector<int>&);
template std::vector<double> convnet_predict<double>(const ConvNetT<double>&, const std::vector<int>&);
template double convnet_backward<float>(const ConvNetT<float>&, const std::vector<int>&, int,
                                        const ConvActivations<float>&, ConvGrads<float>&);
template double convnet_backward<double>(const ConvNetT<double>&, const std::vector<int>&, int,
                                         const ConvActivations<double>&, ConvGrads<double>&);

} // namespace ddx
