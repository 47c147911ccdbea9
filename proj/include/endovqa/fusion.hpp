#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "endovqa/dataprep.hpp"
#include "endovqa/metrics.hpp"
#include "endovqa/raster.hpp"

/**
 * @file fusion.hpp
 *
 * @brief Concatenation-fusion multi-label classifier and its trainer.
 *
 * Image and question features are concatenated, passed through one hidden
 * ReLU layer with dropout, and mapped to one logit per answer in the global
 * vocabulary. Training minimizes mean binary cross-entropy on the logits
 * with AdamW and a linearly decaying learning rate, keeping the epoch with
 * the best validation F1.
 *
 * The encoders here are deliberately small: a one-hot question id and an
 * 8x8 mean-pooled RGB thumbnail.
 */

namespace endovqa::fusion {

inline constexpr int kThumbnailSide = 8;
inline constexpr int kImageFeatureDim = kThumbnailSide * kThumbnailSide * 3;
inline constexpr int kQuestionFeatureDim = dataprep::kQuestionCount;
inline constexpr int kInputDim = kImageFeatureDim + kQuestionFeatureDim;

/// One-hot over question ids. @throws std::invalid_argument if out of range.
std::vector<double> question_features(int question_id);

/// 8x8 mean-pooled thumbnail in [0,1], RGB interleaved; gray input is
/// replicated into all three channels.
std::vector<double> image_features(const RasterImage& img);

/// Image features followed by question features.
std::vector<double> concat_features(std::span<const double> image, std::span<const double> question);

/// Deterministic generator; draws do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n);
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

/// Weights of both layers; also used for gradients and optimizer moments.
struct Parameters {
    std::vector<double> w1;  ///< hidden x input, row-major
    std::vector<double> b1;  ///< hidden
    std::vector<double> w2;  ///< outputs x hidden, row-major
    std::vector<double> b2;  ///< outputs

    std::array<std::span<double>, 4> tensors() { return {w1, b1, w2, b2}; }
    std::array<std::span<const double>, 4> tensors() const { return {w1, b1, w2, b2}; }
    Parameters zeros_like() const;

    bool operator==(const Parameters&) const = default;
};

struct FusionModel {
    int input_dim = kInputDim;
    int hidden = 256;
    int outputs = 0;
    double dropout_rate = 0.5;
    Parameters params;

    /// All-zero parameters.
    static FusionModel zeros(int outputs, int hidden = 256, int input_dim = kInputDim);
    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
    static FusionModel initialized(int outputs, std::uint64_t seed, int hidden = 256, int input_dim = kInputDim);

    /// Throws std::invalid_argument if tensor sizes disagree with the dims.
    void validate() const;
    bool finite() const;

    bool operator==(const FusionModel&) const = default;
};

/// Activations kept by forward() for backward().
struct ForwardCache {
    std::vector<double> pre;      ///< W1 x + b1
    std::vector<double> hidden;   ///< ReLU output after dropout
    std::vector<double> keep;     ///< dropout multiplier per unit: 0 or 1/(1-rate); 1 at inference
};

/**
 * logits = W2 * dropout(ReLU(W1 x + b1)) + b2. In training mode units are
 * dropped with probability `dropout_rate` using `rng` and survivors scaled by
 * 1/(1 - rate); inference applies no dropout and no scaling.
 *
 * @throws std::invalid_argument on a dimension mismatch, or training without rng.
 */
std::vector<double> forward(const FusionModel& model, std::span<const double> x, bool training = false,
                            Rng* rng = nullptr, ForwardCache* cache = nullptr);

std::vector<double> forward(const FusionModel& model, std::span<const double> question,
                            std::span<const double> image, bool training, Rng* rng);

/// Mean over elements of max(z,0) - z*y + log(1 + exp(-|z|)).
/// @throws std::invalid_argument if sizes differ or a target is outside [0,1].
double bce_with_logits(std::span<const double> logits, std::span<const double> targets);

double sigmoid(double z);

struct Sample {
    std::vector<double> input;     ///< concat_features(image, question)
    std::vector<double> target;    ///< 0/1 per answer
    int question_id = 0;
};

struct LossAndGradient {
    double loss = 0.0;
    Parameters grad;
};

/// Mean BCE over the batch and its exact gradient. With `training` the
/// dropout masks drawn in the forward pass are reused in the backward pass.
LossAndGradient loss_and_gradient(const FusionModel& model, std::span<const Sample> batch, bool training = false,
                                  Rng* rng = nullptr);

/// Same over a gathered subset of `samples`.
LossAndGradient loss_and_gradient(const FusionModel& model, std::span<const Sample> samples,
                                  std::span<const std::size_t> indices, bool training, Rng* rng);

struct TrainConfig {
    int epochs = 15;
    int batch_size = 64;
    double lr0 = 5e-5;
    double lr_decay_per_epoch = 0.0667;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double threshold = 0.5;
    int hidden = 256;
    std::uint64_t seed = 42;

    void validate() const;
};

/// lr0 * max(0, 1 - decay * epoch), epoch 0-based.
double lr_schedule(int epoch, const TrainConfig& cfg = {});

struct AdamState {
    Parameters m;
    Parameters v;
    long step = 0;
};

/// One AdamW update on a flat tensor; `step` is the 1-based update count.
void adamw_update(std::span<double> theta, std::span<const double> grad, std::span<double> m, std::span<double> v,
                  long step, double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);

/// Bias-corrected Adam moments, then theta -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta).
void adamw_step(Parameters& params, const Parameters& grads, AdamState& state, double lr, const TrainConfig& cfg);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    metrics::MetricRow val;

    bool operator==(const EpochRecord& o) const {
        return epoch == o.epoch && lr == o.lr && train_loss == o.train_loss && val_loss == o.val_loss &&
               val.accuracy == o.val.accuracy && val.precision == o.val.precision && val.recall == o.val.recall &&
               val.f1 == o.val.f1 && val.count == o.val.count;
    }
};

struct TrainResult {
    FusionModel best;
    int best_epoch = 0;
    std::vector<EpochRecord> history;
};

/**
 * Minibatch training: each epoch shuffles, steps through batches (the last
 * may be partial) and evaluates on `val`. Returns the parameters of the
 * epoch with the highest validation F1; ties keep the earlier epoch.
 *
 * @throws std::invalid_argument if either set is empty.
 */
TrainResult train(FusionModel model, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const TrainConfig& cfg);

/// sigmoid(logit) >= threshold per answer.
dataprep::LabelVector predict_bits(const FusionModel& model, std::span<const double> x, double threshold = 0.5);
dataprep::LabelVector threshold_logits(std::span<const double> logits, double threshold = 0.5);

dataprep::AnswerSet predict(const FusionModel& model, std::span<const double> x,
                            const dataprep::AnswerVocabulary& vocab, double threshold = 0.5);

/// Mean loss and sample-averaged metrics of `model` on `samples`.
struct Evaluation {
    double loss = 0.0;
    metrics::MetricsReport report;
};
Evaluation evaluate(const FusionModel& model, std::span<const Sample> samples, double threshold = 0.5);

// Checkpoint: "EVQAFUS\0", u32 version, u32 input_dim, u32 hidden, u32 outputs,
// u64 vocab hash, f32 dropout, then w1 b1 w2 b2 as little-endian f32.
void save_checkpoint(const FusionModel& model, std::uint64_t vocab_hash, const std::filesystem::path& path);
/// @throws DataError on a malformed file or a vocabulary hash mismatch.
FusionModel load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_vocab_hash);

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path);

}  // namespace endovqa::fusion
