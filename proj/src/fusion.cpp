#include "endovqa/fusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "endovqa/error.hpp"

namespace endovqa::fusion {

std::vector<double> question_features(int question_id) {
    if (question_id < 0 || question_id >= kQuestionFeatureDim) {
        throw std::invalid_argument("question id " + std::to_string(question_id) + " out of range");
    }
    std::vector<double> f(kQuestionFeatureDim, 0.0);
    f[static_cast<std::size_t>(question_id)] = 1.0;
    return f;
}

std::vector<double> image_features(const RasterImage& img) {
    if (img.empty()) throw std::invalid_argument("image_features: empty image");
    std::vector<double> f(kImageFeatureDim, 0.0);
    const int w = img.width();
    const int h = img.height();
    auto span_of = [](int cell, int extent) {
        const int lo = cell * extent / kThumbnailSide;
        const int hi = std::max((cell + 1) * extent / kThumbnailSide, lo + 1);
        return std::pair{std::min(lo, extent - 1), std::min(hi, extent)};
    };
    for (int cy = 0; cy < kThumbnailSide; ++cy) {
        const auto [y0, y1] = span_of(cy, h);
        for (int cx = 0; cx < kThumbnailSide; ++cx) {
            const auto [x0, x1] = span_of(cx, w);
            double sum[3] = {0.0, 0.0, 0.0};
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    for (int c = 0; c < 3; ++c) sum[c] += img.at(x, y, img.channels() == 3 ? c : 0);
                }
            }
            const double n = static_cast<double>((y1 - y0) * (x1 - x0)) * 255.0;
            for (int c = 0; c < 3; ++c) {
                f[static_cast<std::size_t>((cy * kThumbnailSide + cx) * 3 + c)] = sum[c] / n;
            }
        }
    }
    return f;
}

std::vector<double> concat_features(std::span<const double> image, std::span<const double> question) {
    std::vector<double> x(image.begin(), image.end());
    x.insert(x.end(), question.begin(), question.end());
    return x;
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
}

Parameters Parameters::zeros_like() const {
    Parameters p;
    p.w1.assign(w1.size(), 0.0);
    p.b1.assign(b1.size(), 0.0);
    p.w2.assign(w2.size(), 0.0);
    p.b2.assign(b2.size(), 0.0);
    return p;
}

FusionModel FusionModel::zeros(int outputs, int hidden, int input_dim) {
    if (outputs < 1 || hidden < 1 || input_dim < 1) throw std::invalid_argument("model dimensions must be positive");
    FusionModel m;
    m.input_dim = input_dim;
    m.hidden = hidden;
    m.outputs = outputs;
    m.params.w1.assign(static_cast<std::size_t>(hidden) * input_dim, 0.0);
    m.params.b1.assign(static_cast<std::size_t>(hidden), 0.0);
    m.params.w2.assign(static_cast<std::size_t>(outputs) * hidden, 0.0);
    m.params.b2.assign(static_cast<std::size_t>(outputs), 0.0);
    return m;
}

FusionModel FusionModel::initialized(int outputs, std::uint64_t seed, int hidden, int input_dim) {
    FusionModel m = zeros(outputs, hidden, input_dim);
    Rng rng(seed);
    auto fill = [&rng](std::vector<double>& v, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (auto& x : v) x = (2.0 * rng.uniform() - 1.0) * bound;
    };
    fill(m.params.w1, input_dim);
    fill(m.params.b1, input_dim);
    fill(m.params.w2, hidden);
    fill(m.params.b2, hidden);
    return m;
}

void FusionModel::validate() const {
    if (input_dim < 1 || hidden < 1 || outputs < 1) throw std::invalid_argument("model dimensions must be positive");
    if (params.w1.size() != static_cast<std::size_t>(hidden) * input_dim ||
        params.b1.size() != static_cast<std::size_t>(hidden) ||
        params.w2.size() != static_cast<std::size_t>(outputs) * hidden ||
        params.b2.size() != static_cast<std::size_t>(outputs)) {
        throw std::invalid_argument("model tensor sizes do not match its dimensions");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0,1)");
}

bool FusionModel::finite() const {
    for (auto t : params.tensors()) {
        if (!std::all_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); })) return false;
    }
    return true;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> forward(const FusionModel& model, std::span<const double> x, bool training, Rng* rng,
                            ForwardCache* cache) {
    if (x.size() != static_cast<std::size_t>(model.input_dim)) {
        throw std::invalid_argument("forward: input has " + std::to_string(x.size()) + " features, model expects " +
                                    std::to_string(model.input_dim));
    }
    if (training && model.dropout_rate > 0.0 && rng == nullptr) {
        throw std::invalid_argument("forward: training mode needs an rng for dropout");
    }
    const auto& p = model.params;
    const std::size_t H = static_cast<std::size_t>(model.hidden);
    const std::size_t D = static_cast<std::size_t>(model.input_dim);
    const std::size_t V = static_cast<std::size_t>(model.outputs);

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.pre.assign(H, 0.0);
    c.hidden.assign(H, 0.0);
    c.keep.assign(H, 1.0);
    const double scale = 1.0 / (1.0 - model.dropout_rate);
    for (std::size_t j = 0; j < H; ++j) {
        const double* row = &p.w1[j * D];
        double a = p.b1[j];
        for (std::size_t k = 0; k < D; ++k) a += row[k] * x[k];
        c.pre[j] = a;
        if (training && model.dropout_rate > 0.0) c.keep[j] = rng->uniform() < model.dropout_rate ? 0.0 : scale;
        c.hidden[j] = std::max(a, 0.0) * c.keep[j];
    }

    std::vector<double> logits(V);
    for (std::size_t i = 0; i < V; ++i) {
        const double* row = &p.w2[i * H];
        double z = p.b2[i];
        for (std::size_t j = 0; j < H; ++j) z += row[j] * c.hidden[j];
        logits[i] = z;
    }
    return logits;
}

std::vector<double> forward(const FusionModel& model, std::span<const double> question, std::span<const double> image,
                            bool training, Rng* rng) {
    return forward(model, concat_features(image, question), training, rng);
}

double bce_with_logits(std::span<const double> z, std::span<const double> y) {
    if (z.size() != y.size()) throw std::invalid_argument("bce_with_logits: size mismatch");
    if (z.empty()) throw std::invalid_argument("bce_with_logits: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!(y[i] >= 0.0 && y[i] <= 1.0)) throw std::invalid_argument("bce_with_logits: target outside [0,1]");
        sum += std::max(z[i], 0.0) - z[i] * y[i] + std::log1p(std::exp(-std::abs(z[i])));
    }
    return sum / static_cast<double>(z.size());
}

LossAndGradient loss_and_gradient(const FusionModel& model, std::span<const Sample> samples,
                                  std::span<const std::size_t> indices, bool training, Rng* rng) {
    model.validate();
    if (indices.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    const auto& p = model.params;
    const std::size_t H = static_cast<std::size_t>(model.hidden);
    const std::size_t D = static_cast<std::size_t>(model.input_dim);
    const std::size_t V = static_cast<std::size_t>(model.outputs);
    const double norm = 1.0 / static_cast<double>(indices.size() * V);

    LossAndGradient out;
    out.grad = p.zeros_like();
    auto& g = out.grad;
    ForwardCache cache;
    std::vector<double> dh(H);
    double loss_sum = 0.0;

    for (const std::size_t idx : indices) {
        const Sample& s = samples[idx];
        if (s.target.size() != V) throw std::invalid_argument("loss_and_gradient: target size mismatch");
        const auto logits = forward(model, s.input, training, rng, &cache);
        loss_sum += bce_with_logits(logits, s.target) * static_cast<double>(V);

        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t i = 0; i < V; ++i) {
            const double dz = (sigmoid(logits[i]) - s.target[i]) * norm;
            g.b2[i] += dz;
            double* grow = &g.w2[i * H];
            const double* wrow = &p.w2[i * H];
            for (std::size_t j = 0; j < H; ++j) {
                grow[j] += dz * cache.hidden[j];
                dh[j] += dz * wrow[j];
            }
        }
        for (std::size_t j = 0; j < H; ++j) {
            if (cache.pre[j] <= 0.0 || cache.keep[j] == 0.0) continue;
            const double da = dh[j] * cache.keep[j];
            g.b1[j] += da;
            double* grow = &g.w1[j * D];
            for (std::size_t k = 0; k < D; ++k) grow[k] += da * s.input[k];
        }
    }
    out.loss = loss_sum * norm;
    return out;
}

LossAndGradient loss_and_gradient(const FusionModel& model, std::span<const Sample> batch, bool training, Rng* rng) {
    std::vector<std::size_t> indices(batch.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    return loss_and_gradient(model, batch, indices, training, rng);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(lr0 > 0.0)) throw std::invalid_argument("lr0 must be > 0");
    if (lr_decay_per_epoch < 0.0) throw std::invalid_argument("lr_decay_per_epoch must be >= 0");
    if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
    if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must be in (0,1)");
    if (hidden < 1) throw std::invalid_argument("hidden must be >= 1");
}

double lr_schedule(int epoch, const TrainConfig& cfg) {
    return cfg.lr0 * std::max(0.0, 1.0 - cfg.lr_decay_per_epoch * epoch);
}

void adamw_update(std::span<double> theta, std::span<const double> grad, std::span<double> m, std::span<double> v,
                  long step, double lr, double weight_decay, double beta1, double beta2, double eps) {
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        theta[i] -= lr * (m_hat / (std::sqrt(v_hat) + eps) + weight_decay * theta[i]);
    }
}

void adamw_step(Parameters& params, const Parameters& grads, AdamState& state, double lr, const TrainConfig& cfg) {
    if (state.m.w1.size() != params.w1.size()) {
        state.m = params.zeros_like();
        state.v = params.zeros_like();
        state.step = 0;
    }
    ++state.step;
    auto theta = params.tensors();
    const auto g = grads.tensors();
    auto m = state.m.tensors();
    auto v = state.v.tensors();
    for (std::size_t t = 0; t < theta.size(); ++t) {
        adamw_update(theta[t], g[t], m[t], v[t], state.step, lr, cfg.weight_decay, cfg.beta1, cfg.beta2, cfg.eps);
    }
}

dataprep::LabelVector threshold_logits(std::span<const double> logits, double threshold) {
    dataprep::LabelVector bits(logits.size(), 0);
    for (std::size_t i = 0; i < logits.size(); ++i) bits[i] = sigmoid(logits[i]) >= threshold ? 1 : 0;
    return bits;
}

dataprep::LabelVector predict_bits(const FusionModel& model, std::span<const double> x, double threshold) {
    return threshold_logits(forward(model, x), threshold);
}

dataprep::AnswerSet predict(const FusionModel& model, std::span<const double> x, const dataprep::AnswerVocabulary& vocab,
                            double threshold) {
    if (vocab.size() != static_cast<std::size_t>(model.outputs)) {
        throw std::invalid_argument("predict: vocabulary size does not match the model");
    }
    return dataprep::debinarize(predict_bits(model, x, threshold), vocab);
}

Evaluation evaluate(const FusionModel& model, std::span<const Sample> samples, double threshold) {
    if (samples.empty()) throw std::invalid_argument("evaluate: empty sample set");
    Evaluation ev;
    std::vector<metrics::ScoredSample> scored;
    scored.reserve(samples.size());
    double loss = 0.0;
    for (const auto& s : samples) {
        const auto logits = forward(model, s.input);
        loss += bce_with_logits(logits, s.target);
        dataprep::LabelVector truth(s.target.size());
        std::transform(s.target.begin(), s.target.end(), truth.begin(), [](double t) { return t >= 0.5 ? 1 : 0; });
        scored.push_back({s.question_id, metrics::sample_score(truth, threshold_logits(logits, threshold))});
    }
    ev.loss = loss / static_cast<double>(samples.size());
    ev.report = metrics::aggregate(scored);
    return ev;
}

TrainResult train(FusionModel model, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");
    if (val_set.empty()) throw std::invalid_argument("train: empty validation set");

    Rng rng(cfg.seed);
    AdamState adam;
    TrainResult result;
    double best_f1 = -1.0;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, cfg);
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(start + batch, order.size());
            const std::span<const std::size_t> idx(order.data() + start, end - start);
            auto lg = loss_and_gradient(model, train_set, idx, /*training=*/true, &rng);
            loss_sum += lg.loss * static_cast<double>(idx.size());
            adamw_step(model.params, lg.grad, adam, lr, cfg);
        }

        const Evaluation ev = evaluate(model, val_set, cfg.threshold);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.train_loss = loss_sum / static_cast<double>(train_set.size());
        rec.val_loss = ev.loss;
        rec.val = ev.report.overall;
        result.history.push_back(rec);
        if (rec.val.f1 > best_f1) {
            best_f1 = rec.val.f1;
            result.best = model;
            result.best_epoch = epoch;
        }
    }
    return result;
}

namespace {

constexpr char kMagic[8] = {'E', 'V', 'Q', 'A', 'F', 'U', 'S', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    unsigned char buf[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) {
        throw DataError("checkpoint '" + path.string() + "' is truncated");
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

}  // namespace

void save_checkpoint(const FusionModel& model, std::uint64_t vocab_hash, const std::filesystem::path& path) {
    model.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
    out.write(kMagic, sizeof kMagic);
    put_le(out, kVersion);
    put_le(out, static_cast<std::uint32_t>(model.input_dim));
    put_le(out, static_cast<std::uint32_t>(model.hidden));
    put_le(out, static_cast<std::uint32_t>(model.outputs));
    put_le(out, vocab_hash);
    put_le(out, static_cast<float>(model.dropout_rate));
    for (auto t : model.params.tensors()) {
        for (double v : t) put_le(out, static_cast<float>(v));
    }
    if (!out) throw DataError("failed writing checkpoint '" + path.string() + "'");
}

FusionModel load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_vocab_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw DataError("'" + path.string() + "' is not a fusion checkpoint");
    }
    const auto version = get_le<std::uint32_t>(in, path);
    if (version != kVersion) {
        throw DataError("checkpoint '" + path.string() + "' has unsupported version " + std::to_string(version));
    }
    const auto input_dim = get_le<std::uint32_t>(in, path);
    const auto hidden = get_le<std::uint32_t>(in, path);
    const auto outputs = get_le<std::uint32_t>(in, path);
    const auto hash = get_le<std::uint64_t>(in, path);
    if (hash != expected_vocab_hash) {
        throw DataError("checkpoint '" + path.string() + "' was trained with a different answer vocabulary");
    }
    if (input_dim == 0 || hidden == 0 || outputs == 0 || input_dim > (1u << 20) || hidden > (1u << 20) ||
        outputs > (1u << 20)) {
        throw DataError("checkpoint '" + path.string() + "' has implausible dimensions");
    }
    FusionModel model = FusionModel::zeros(static_cast<int>(outputs), static_cast<int>(hidden), static_cast<int>(input_dim));
    model.dropout_rate = get_le<float>(in, path);
    for (auto t : model.params.tensors()) {
        for (double& v : t) v = get_le<float>(in, path);
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DataError("checkpoint '" + path.string() + "' has trailing bytes");
    }
    model.validate();
    return model;
}

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "epoch,lr,train_loss,val_loss,val_accuracy,val_precision,val_recall,val_f1\n";
    out.precision(10);
    for (const auto& r : history) {
        out << r.epoch << ',' << r.lr << ',' << r.train_loss << ',' << r.val_loss << ',' << r.val.accuracy << ','
            << r.val.precision << ',' << r.val.recall << ',' << r.val.f1 << '\n';
    }
}

}  // namespace endovqa::fusion
