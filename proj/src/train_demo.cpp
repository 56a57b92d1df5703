#include "crossd/train_demo.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "crossd/autograd.hpp"
#include "crossd/rng.hpp"

namespace crossd {

namespace {

constexpr std::size_t kImage = 12;
constexpr std::size_t kSamples = 32;
constexpr std::size_t kFeatures = 4;  // bank output channels
constexpr std::size_t kClasses = 2;

// A soft bar through the image center at the given angle.
void render_bar(double* img, double angle, Rng& rng) {
  const double cx = (kImage - 1) / 2.0;
  const double cy = (kImage - 1) / 2.0;
  const double nx = -std::sin(angle);  // unit normal of the bar direction
  const double ny = std::cos(angle);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  const double sigma = 1.2;
  for (std::size_t i = 0; i < kImage; ++i) {
    for (std::size_t j = 0; j < kImage; ++j) {
      const double d = (static_cast<double>(i) - cy) * ny + (static_cast<double>(j) - cx) * nx;
      img[i * kImage + j] = std::exp(-d * d / (2.0 * sigma * sigma)) + noise(rng);
    }
  }
}

struct Dataset {
  RealTensor x;                 // N×1×H×W
  std::vector<std::size_t> labels;  // 0 = horizontal-ish bar, 1 = vertical-ish
};

Dataset make_dataset(Rng& rng) {
  Dataset ds;
  ds.x = RealTensor::zeros({kSamples, 1, kImage, kImage});
  ds.labels.resize(kSamples);
  const double deg = std::numbers::pi / 180.0;
  std::uniform_real_distribution<double> jitter(-20.0 * deg, 20.0 * deg);
  for (std::size_t n = 0; n < kSamples; ++n) {
    const std::size_t label = n % 2;
    ds.labels[n] = label;
    const double base = label == 0 ? 0.0 : std::numbers::pi / 2.0;
    render_bar(ds.x.data() + n * kImage * kImage, base + jitter(rng), rng);
  }
  return ds;
}

struct Classifier {
  std::vector<double> w;  // kClasses × kFeatures
  std::vector<double> b;  // kClasses
};

}  // namespace

TrainDemoResult train_demo(const TrainDemoConfig& config, std::ostream* log) {
  TrainDemoResult result;
  if (config.steps < 1) {
    result.aborted = true;
    result.diagnostic = "steps must be >= 1";
    return result;
  }

  Rng rng(config.seed);
  const Dataset ds = make_dataset(rng);

  KernelBank5D bank{uniform_tensor({kFeatures, 1, 3, 3, 3}, rng, -0.5, 0.5), 1, std::nullopt};
  RotParamHead head = RotParamHead::random(1, 3, rng, 0.3);
  Classifier cls;
  cls.w.resize(kClasses * kFeatures);
  cls.b.assign(kClasses, 0.0);
  {
    std::uniform_real_distribution<double> init(-0.3, 0.3);
    for (double& v : cls.w) v = init(rng);
  }

  const ConvGeometry geom = ConvGeometry::same(3, 2);
  const std::size_t hw = kImage * kImage;

  // Frozen per-feature standardization, fit on the step-0 pooled features so
  // the classifier sees O(1) inputs regardless of the conv output scale.
  std::vector<double> feat_mean(kFeatures, 0.0), feat_scale(kFeatures, 1.0);
  bool standardizer_ready = false;

  for (int step = 0; step < config.steps; ++step) {
    PipelineTape tape;
    const RealTensor conv_out =
        crossd_forward_2d_tape(ds.x, bank, head, geom, RotationMode::PerSample, tape);

    // ReLU -> global average pool -> linear -> softmax cross-entropy
    RealTensor relu_out = conv_out;
    for (double& v : relu_out.values()) v = std::max(v, 0.0);

    std::vector<double> pooled(kSamples * kFeatures, 0.0);
    for (std::size_t n = 0; n < kSamples; ++n) {
      for (std::size_t c = 0; c < kFeatures; ++c) {
        const double* p = relu_out.data() + (n * kFeatures + c) * hw;
        double acc = 0.0;
        for (std::size_t i = 0; i < hw; ++i) acc += p[i];
        pooled[n * kFeatures + c] = acc / static_cast<double>(hw);
      }
    }

    if (!standardizer_ready) {
      for (std::size_t c = 0; c < kFeatures; ++c) {
        double mean = 0.0, var = 0.0;
        for (std::size_t n = 0; n < kSamples; ++n) mean += pooled[n * kFeatures + c];
        mean /= static_cast<double>(kSamples);
        for (std::size_t n = 0; n < kSamples; ++n) {
          const double d = pooled[n * kFeatures + c] - mean;
          var += d * d;
        }
        var /= static_cast<double>(kSamples);
        feat_mean[c] = mean;
        feat_scale[c] = 1.0 / std::max(std::sqrt(var), 1e-6);
      }
      standardizer_ready = true;
    }

    std::vector<double> feats(kSamples * kFeatures, 0.0);
    for (std::size_t n = 0; n < kSamples; ++n) {
      for (std::size_t c = 0; c < kFeatures; ++c) {
        feats[n * kFeatures + c] = (pooled[n * kFeatures + c] - feat_mean[c]) * feat_scale[c];
      }
    }

    std::vector<double> probs(kSamples * kClasses, 0.0);
    double loss = 0.0;
    for (std::size_t n = 0; n < kSamples; ++n) {
      double logits[kClasses];
      for (std::size_t k = 0; k < kClasses; ++k) {
        double acc = cls.b[k];
        for (std::size_t c = 0; c < kFeatures; ++c) {
          acc += cls.w[k * kFeatures + c] * feats[n * kFeatures + c];
        }
        logits[k] = acc;
      }
      const double m = std::max(logits[0], logits[1]);
      const double den = std::exp(logits[0] - m) + std::exp(logits[1] - m);
      for (std::size_t k = 0; k < kClasses; ++k) {
        probs[n * kClasses + k] = std::exp(logits[k] - m) / den;
      }
      loss -= std::log(std::max(probs[n * kClasses + ds.labels[n]], 1e-300));
    }
    loss /= static_cast<double>(kSamples);

    if (!std::isfinite(loss)) {
      result.aborted = true;
      result.diagnostic = "non-finite loss at step " + std::to_string(step);
      return result;
    }
    result.loss_trace.push_back(loss);
    if (log && (step % config.log_every == 0 || step == config.steps - 1)) {
      (*log) << "step " << step << " loss " << loss << "\n";
    }

    // backward
    std::vector<double> grad_w(kClasses * kFeatures, 0.0);
    std::vector<double> grad_b(kClasses, 0.0);
    std::vector<double> grad_pooled(kSamples * kFeatures, 0.0);
    for (std::size_t n = 0; n < kSamples; ++n) {
      for (std::size_t k = 0; k < kClasses; ++k) {
        const double d = (probs[n * kClasses + k] - (ds.labels[n] == k ? 1.0 : 0.0)) /
                         static_cast<double>(kSamples);
        grad_b[k] += d;
        for (std::size_t c = 0; c < kFeatures; ++c) {
          grad_w[k * kFeatures + c] += d * feats[n * kFeatures + c];
          grad_pooled[n * kFeatures + c] += d * cls.w[k * kFeatures + c] * feat_scale[c];
        }
      }
    }

    RealTensor grad_conv = RealTensor::zeros(conv_out.shape());
    for (std::size_t n = 0; n < kSamples; ++n) {
      for (std::size_t c = 0; c < kFeatures; ++c) {
        const double g = grad_pooled[n * kFeatures + c] / static_cast<double>(hw);
        const double* src = conv_out.data() + (n * kFeatures + c) * hw;
        double* dst = grad_conv.data() + (n * kFeatures + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          dst[i] = src[i] > 0.0 ? g : 0.0;
        }
      }
    }

    const PipelineGrads grads = crossd_backward(grad_conv, tape, bank, head);
    if (step == 0) {
      // head bias channel 3 feeds the raw-angle path and nothing else
      result.theta_grad_step0 = grads.head_b[3];
    }

    const double lr = config.lr;
    for (std::size_t i = 0; i < bank.weights.size(); ++i) {
      bank.weights.data()[i] -= lr * grads.bank_w.data()[i];
    }
    for (std::size_t i = 0; i < head.conv_weights.size(); ++i) {
      head.conv_weights.data()[i] -= lr * grads.head_w.data()[i];
    }
    for (int c = 0; c < 4; ++c) head.conv_bias[c] -= lr * grads.head_b[c];
    for (std::size_t i = 0; i < cls.w.size(); ++i) cls.w[i] -= lr * grad_w[i];
    for (std::size_t k = 0; k < kClasses; ++k) cls.b[k] -= lr * grad_b[k];
  }

  result.initial_loss = result.loss_trace.front();
  result.final_loss = result.loss_trace.back();
  return result;
}

std::string train_result_to_json(const TrainDemoConfig& config, const TrainDemoResult& result) {
  nlohmann::json j;
  j["steps"] = config.steps;
  j["lr"] = config.lr;
  j["seed"] = config.seed;
  j["aborted"] = result.aborted;
  if (result.aborted) {
    j["diagnostic"] = result.diagnostic;
  } else {
    j["initial_loss"] = result.initial_loss;
    j["final_loss"] = result.final_loss;
    j["theta_grad_step0"] = result.theta_grad_step0;
    j["loss"] = result.loss_trace;
  }
  return j.dump(2);
}

}  // namespace crossd
