// Dense feedforward network engine: forward/backward passes, losses,
// deterministic minibatch SGD, greedy layerwise pretraining and a
// finite-difference gradient checker.

#include "egonoise/nn.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "egonoise/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "model and feature archives assume a little-endian host");

namespace egonoise::nn {

namespace {

using json = nlohmann::json;

Eigen::MatrixXd apply_activation(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::Linear: return z;
    case Activation::ReLU: return z.cwiseMax(0.0);
    case Activation::Sigmoid:
      return ((-z.array()).exp() + 1.0).inverse().matrix();
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::Softmax: return softmax_cols(z);
  }
  throw std::logic_error("unknown activation");
}

// Derivative expressed through the activation value h (valid for all的
// elementwise activations shipped; softmax is handled separately).
Eigen::ArrayXXd activation_deriv_from_value(Activation a, const Eigen::MatrixXd& h) {
  switch (a) {
    case Activation::Linear: return Eigen::ArrayXXd::Ones(h.rows(), h.cols());
    case Activation::ReLU:
      // h > 0 iff z > 0; the derivative at z == 0 is fixed to 0.
      return (h.array() > 0.0).cast<double>();
    case Activation::Sigmoid: return h.array() * (1.0 - h.array());
    case Activation::Tanh: return 1.0 - h.array().square();
    case Activation::Softmax:
      throw std::logic_error("softmax has no elementwise derivative");
  }
  throw std::logic_error("unknown activation");
}

constexpr std::uint64_t kInitStream = 0x171;
constexpr std::uint64_t kEpochStream = 0xE60C;
constexpr std::uint64_t kValSplitStream = 0x5B11;
constexpr std::uint64_t kGreedyStream = 0xAE00;
constexpr std::uint64_t kOutputInitStream = 0xED0;
constexpr std::uint64_t kFineTuneStream = 0xF17E;

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Softmax: return "softmax";
  }
  throw std::logic_error("unknown activation");
}

Activation activation_from_string(const std::string& s) {
  if (s == "linear") return Activation::Linear;
  if (s == "relu") return Activation::ReLU;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "tanh") return Activation::Tanh;
  if (s == "softmax") return Activation::Softmax;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

std::string to_string(LossKind l) {
  return l == LossKind::MSE ? "mse" : "cross_entropy";
}

LossKind loss_from_string(const std::string& s) {
  if (s == "mse") return LossKind::MSE;
  if (s == "cross_entropy") return LossKind::CrossEntropy;
  throw std::invalid_argument("unknown loss '" + s + "'");
}

void NetworkSpec::validate() const {
  if (layer_sizes.size() < 3)
    throw std::invalid_argument("network spec: need at least one hidden layer");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("network spec: non-positive layer size");
  if (activations.size() != layer_sizes.size() - 1)
    throw std::invalid_argument("network spec: need one activation per non-input layer");
  for (std::size_t i = 0; i + 1 < activations.size(); ++i)
    if (activations[i] == Activation::Softmax)
      throw std::invalid_argument("network spec: softmax is only allowed at the output");
  const bool softmax_out = activations.back() == Activation::Softmax;
  if (softmax_out && loss != LossKind::CrossEntropy)
    throw std::invalid_argument("network spec: softmax output requires cross-entropy loss");
  if (loss == LossKind::CrossEntropy && !softmax_out)
    throw std::invalid_argument("network spec: cross-entropy loss requires a softmax output");
  if (bottleneck_index && (*bottleneck_index < 1 || *bottleneck_index > num_hidden()))
    throw std::invalid_argument("network spec: bottleneck_index out of [1, num_hidden]");
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers)
    n += static_cast<std::size_t>(l.weights.size()) + static_cast<std::size_t>(l.bias.size());
  return n;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("train config: learning_rate must be finite and > 0");
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
  if (early_stop_patience < 0)
    throw std::invalid_argument("train config: early_stop_patience must be >= 0");
}

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  NetworkParams params;
  for (int l = 0; l < spec.num_layers(); ++l) {
    const int fan_in = spec.layer_sizes[l];
    const int fan_out = spec.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    auto rng = make_rng(derive_seed(seed, kInitStream + l));
    std::uniform_real_distribution<double> dist(-limit, limit);
    LayerParams lp;
    lp.weights.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) lp.weights(r, c) = dist(rng);
    lp.bias = Eigen::VectorXd::Zero(fan_out);
    lp.activation = spec.activations[l];
    params.layers.push_back(std::move(lp));
  }
  return params;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& y) {
  if (!y.allFinite()) throw std::invalid_argument("softmax: non-finite input");
  Eigen::ArrayXd z = (y.array() - y.maxCoeff()).exp();
  return (z / z.sum()).matrix();
}

Eigen::MatrixXd softmax_cols(const Eigen::MatrixXd& y) {
  Eigen::MatrixXd z = y;
  const Eigen::RowVectorXd mx = y.colwise().maxCoeff();
  z.array().rowwise() -= mx.array();
  z = z.array().exp();
  const Eigen::RowVectorXd sums = z.colwise().sum();
  z.array().rowwise() /= sums.array();
  return z;
}

ForwardCache forward(const NetworkParams& params, const Eigen::MatrixXd& input) {
  if (params.layers.empty()) throw std::invalid_argument("forward: empty network");
  if (input.rows() != params.layers.front().weights.cols())
    throw std::invalid_argument("forward: input dim " + std::to_string(input.rows()) +
                                " does not match network input dim " +
                                std::to_string(params.layers.front().weights.cols()));
  ForwardCache cache;
  cache.activations.reserve(params.layers.size() + 1);
  cache.activations.push_back(input);
  for (const auto& layer : params.layers) {
    Eigen::MatrixXd z = layer.weights * cache.activations.back();
    z.colwise() += layer.bias;
    cache.activations.push_back(apply_activation(layer.activation, z));
  }
  return cache;
}

Eigen::VectorXd forward_vec(const NetworkParams& params, const Eigen::VectorXd& x) {
  return forward(params, x).output().col(0);
}

double mse_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& recon, bool per_element) {
  if (x.rows() != recon.rows() || x.cols() != recon.cols())
    throw std::invalid_argument("mse_loss: dim mismatch");
  const double d = per_element ? double(x.size()) : double(x.cols());
  return (x - recon).squaredNorm() / d;
}

double cross_entropy_loss(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& onehot) {
  if (probs.rows() != onehot.rows() || probs.cols() != onehot.cols())
    throw std::invalid_argument("cross_entropy_loss: dim mismatch");
  const Eigen::RowVectorXd sums = probs.colwise().sum();
  if (((sums.array() - 1.0).abs() > 1e-6).any())
    throw std::invalid_argument("cross_entropy_loss: rows are not probability distributions");
  double acc = 0.0;
  for (Eigen::Index c = 0; c < onehot.cols(); ++c) {
    Eigen::Index target;
    if (std::abs(onehot.col(c).sum() - 1.0) > 1e-9 || onehot.col(c).maxCoeff(&target) != 1.0)
      throw std::invalid_argument("cross_entropy_loss: target column is not one-hot");
    acc -= std::log(std::max(probs(target, c), 1e-12));
  }
  return acc / double(onehot.cols());
}

double loss_value(const NetworkSpec& spec, const Eigen::MatrixXd& output,
                  const Eigen::MatrixXd& targets) {
  return spec.loss == LossKind::MSE ? mse_loss(targets, output, spec.mse_per_element)
                                    : cross_entropy_loss(output, targets);
}

namespace {

void check_cache(const NetworkParams& params, const ForwardCache& cache) {
  if (cache.activations.size() != params.layers.size() + 1)
    throw std::invalid_argument("backward: forward cache does not match the network");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    if (cache.activations[l].rows() != params.layers[l].weights.cols() ||
        cache.activations[l + 1].rows() != params.layers[l].weights.rows() ||
        cache.activations[l].cols() != cache.activations[l + 1].cols())
      throw std::invalid_argument("backward: stale forward cache (shape mismatch at layer " +
                                  std::to_string(l + 1) + ")");
  }
}

Gradients backprop_from_delta(const NetworkParams& params, const ForwardCache& cache,
                              Eigen::MatrixXd delta) {
  const std::size_t L = params.layers.size();
  Gradients g;
  g.weights.resize(L);
  g.bias.resize(L);
  for (std::size_t l = L; l-- > 0;) {
    g.weights[l] = delta * cache.activations[l].transpose();
    g.bias[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = params.layers[l].weights.transpose() * delta;
      delta.array() *=
          activation_deriv_from_value(params.layers[l - 1].activation, cache.activations[l]);
    }
  }
  return g;
}

}  // namespace

Gradients backward(const NetworkSpec& spec, const NetworkParams& params,
                   const ForwardCache& cache, const Eigen::MatrixXd& targets) {
  check_cache(params, cache);
  const Eigen::MatrixXd& out = cache.output();
  if (targets.rows() != out.rows() || targets.cols() != out.cols())
    throw std::invalid_argument("backward: target shape mismatch");

  Eigen::MatrixXd delta;
  const double batch = double(out.cols());
  if (spec.loss == LossKind::CrossEntropy) {
    // Fused softmax + cross-entropy output delta.
    delta = (out - targets) / batch;
  } else {
    const double d = spec.mse_per_element ? double(out.size()) : batch;
    Eigen::MatrixXd dloss = 2.0 / d * (out - targets);
    delta = dloss.array() *
            activation_deriv_from_value(params.layers.back().activation, out).array();
  }
  return backprop_from_delta(params, cache, std::move(delta));
}

Gradients backward_from_output_grad(const NetworkParams& params, const ForwardCache& cache,
                                    const Eigen::MatrixXd& output_grad) {
  check_cache(params, cache);
  const Eigen::MatrixXd& out = cache.output();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols())
    throw std::invalid_argument("backward: output gradient shape mismatch");

  Eigen::MatrixXd delta;
  if (params.layers.back().activation == Activation::Softmax) {
    // Full softmax Jacobian per column: dz = p .* g - p * (p . g).
    delta.resize(out.rows(), out.cols());
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      const auto p = out.col(c).array();
      const auto g = output_grad.col(c).array();
      delta.col(c) = (p * g - p * (p * g).sum()).matrix();
    }
  } else {
    delta = output_grad.array() *
            activation_deriv_from_value(params.layers.back().activation, out).array();
  }
  return backprop_from_delta(params, cache, std::move(delta));
}

namespace {

Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& m, const std::vector<int>& idx,
                            std::size_t begin, std::size_t end) {
  Eigen::MatrixXd out(m.rows(), Eigen::Index(end - begin));
  for (std::size_t i = begin; i < end; ++i) out.col(Eigen::Index(i - begin)) = m.col(idx[i]);
  return out;
}

double accuracy(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& onehot) {
  Eigen::Index correct = 0;
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    Eigen::Index pi, ti;
    probs.col(c).maxCoeff(&pi);
    onehot.col(c).maxCoeff(&ti);
    correct += (pi == ti);
  }
  return double(correct) / double(probs.cols());
}

}  // namespace

TrainResult sgd_train(const NetworkSpec& spec, const Eigen::MatrixXd& data,
                      const Eigen::MatrixXd& targets, const TrainConfig& cfg,
                      const Eigen::MatrixXd* val_data, const Eigen::MatrixXd* val_targets,
                      const NetworkParams* initial) {
  spec.validate();
  cfg.validate();
  if (data.cols() != targets.cols())
    throw std::invalid_argument("sgd_train: data/target counts differ (" +
                                std::to_string(data.cols()) + " vs " +
                                std::to_string(targets.cols()) + ")");
  if (data.cols() == 0) throw std::invalid_argument("sgd_train: empty dataset");
  if (data.rows() != spec.input_dim() || targets.rows() != spec.output_dim())
    throw std::invalid_argument("sgd_train: data/target dims do not match the network spec");
  if (cfg.batch_size > data.cols())
    throw std::invalid_argument("sgd_train: batch_size exceeds dataset size");
  if ((val_data == nullptr) != (val_targets == nullptr))
    throw std::invalid_argument("sgd_train: validation data and targets must come together");

  Eigen::MatrixXd train_x = data, train_t = targets;
  Eigen::MatrixXd vx, vt;
  bool has_val = val_data != nullptr;
  if (has_val) {
    vx = *val_data;
    vt = *val_targets;
  } else if (cfg.early_stop_patience > 0) {
    // Deterministic 10% holdout.
    std::vector<int> idx(data.cols());
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(derive_seed(cfg.seed, kValSplitStream));
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_val = std::max<std::size_t>(1, idx.size() / 10);
    const std::size_t n_train = idx.size() - n_val;
    train_x = gather_cols(data, idx, 0, n_train);
    train_t = gather_cols(targets, idx, 0, n_train);
    vx = gather_cols(data, idx, n_train, idx.size());
    vt = gather_cols(targets, idx, n_train, idx.size());
    has_val = true;
  }

  const int n = static_cast<int>(train_x.cols());
  const int batch = std::min<int>(cfg.batch_size, n);
  const bool classify = spec.loss == LossKind::CrossEntropy;

  TrainResult res;
  NetworkParams params = initial ? *initial : init_params(spec, cfg.seed);
  NetworkParams best_params = params;
  double best_val = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
  bool stopped = false;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
    const double tl = loss_value(spec, forward(params, train_x).output(), train_t);
    if (!std::isfinite(tl))
      throw std::runtime_error("sgd_train: loss diverged (non-finite) at epoch " +
                               std::to_string(epoch));
    res.train_loss.push_back(tl);
    if (has_val) {
      const Eigen::MatrixXd vout = forward(params, vx).output();
      const double vl = loss_value(spec, vout, vt);
      if (!std::isfinite(vl))
        throw std::runtime_error("sgd_train: validation loss diverged (non-finite) at epoch " +
                                 std::to_string(epoch));
      res.val_loss.push_back(vl);
      if (classify) res.val_accuracy.push_back(accuracy(vout, vt));
      if (cfg.early_stop_patience > 0) {
        if (vl < best_val) {
          best_val = vl;
          best_params = params;
          res.best_epoch = epoch;
          bad_epochs = 0;
        } else if (++bad_epochs > cfg.early_stop_patience) {
          stopped = true;
        }
      }
    }
    if (epoch == cfg.epochs || stopped) break;

    auto rng = make_rng(derive_seed(cfg.seed, kEpochStream + std::uint64_t(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += batch) {
      const int stop = std::min(n, start + batch);
      const Eigen::MatrixXd bx = gather_cols(train_x, order, start, stop);
      const Eigen::MatrixXd bt = gather_cols(train_t, order, start, stop);
      const ForwardCache cache = forward(params, bx);
      if (!std::isfinite(loss_value(spec, cache.output(), bt)))
        throw std::runtime_error("sgd_train: loss diverged (non-finite) at epoch " +
                                 std::to_string(epoch));
      const Gradients g = backward(spec, params, cache, bt);
      for (std::size_t l = 0; l < params.layers.size(); ++l) {
        params.layers[l].weights -= cfg.learning_rate * g.weights[l];
        params.layers[l].bias -= cfg.learning_rate * g.bias[l];
      }
    }
  }

  if (cfg.early_stop_patience > 0 && has_val) {
    res.params = std::move(best_params);
  } else {
    res.params = std::move(params);
    res.best_epoch = static_cast<int>(res.train_loss.size()) - 1;
  }
  return res;
}

NetworkParams pretrain_greedy(const NetworkSpec& spec, const Eigen::MatrixXd& data,
                              const TrainConfig& cfg) {
  spec.validate();
  if (data.rows() != spec.input_dim())
    throw std::invalid_argument("pretrain: data dim does not match network input");

  const int L = spec.num_hidden();
  NetworkParams params;
  params.layers.resize(spec.num_layers());

  Eigen::MatrixXd rep = data;
  LayerParams last_decoder;
  Activation last_decoder_act = Activation::Linear;
  for (int l = 1; l <= L; ++l) {
    const Activation enc_act = spec.activations[l - 1];
    // The decoder reconstructs the codomain of the previous layer.
    const Activation dec_act = (l == 1) ? Activation::Linear : spec.activations[l - 2];
    NetworkSpec ae;
    ae.layer_sizes = {spec.layer_sizes[l - 1], spec.layer_sizes[l], spec.layer_sizes[l - 1]};
    ae.activations = {enc_act, dec_act};
    ae.loss = LossKind::MSE;
    TrainConfig ae_cfg = cfg;
    ae_cfg.seed = derive_seed(cfg.seed, kGreedyStream + std::uint64_t(l));
    ae_cfg.batch_size = std::min<int>(ae_cfg.batch_size, static_cast<int>(rep.cols()));
    TrainResult shallow = sgd_train(ae, rep, rep, ae_cfg);
    params.layers[l - 1] = shallow.params.layers[0];
    last_decoder = shallow.params.layers[1];
    last_decoder_act = dec_act;
    // Advance the representation through the frozen encoder.
    Eigen::MatrixXd z = params.layers[l - 1].weights * rep;
    z.colwise() += params.layers[l - 1].bias;
    rep = apply_activation(enc_act, z);
  }

  // Output layer: reuse the last shallow decoder when its shape and
  // activation already match, otherwise start from a fresh init.
  const bool decoder_fits = spec.layer_sizes[L + 1] == spec.layer_sizes[L - 1] &&
                            spec.activations[L] == last_decoder_act;
  if (decoder_fits) {
    params.layers[L] = last_decoder;
  } else {
    NetworkParams fresh = init_params(spec, derive_seed(cfg.seed, kOutputInitStream));
    params.layers[L] = fresh.layers[L];
  }
  return params;
}

TrainResult pretrain_stacked_autoencoder(const NetworkSpec& spec, const Eigen::MatrixXd& data,
                                         const TrainConfig& cfg) {
  if (spec.loss != LossKind::MSE || spec.output_dim() != spec.input_dim())
    throw std::invalid_argument(
        "pretrain_stacked_autoencoder: spec must be a reconstruction network "
        "(MSE loss, output_dim == input_dim)");
  const NetworkParams init = pretrain_greedy(spec, data, cfg);
  TrainConfig ft_cfg = cfg;
  ft_cfg.seed = derive_seed(cfg.seed, kFineTuneStream);
  return sgd_train(spec, data, data, ft_cfg, nullptr, nullptr, &init);
}

GradCheckReport grad_check(const NetworkSpec& spec, const NetworkParams& params,
                           const Eigen::MatrixXd& data, const Eigen::MatrixXd& targets,
                           double epsilon) {
  spec.validate();
  if (params.parameter_count() > 10000)
    throw std::invalid_argument("grad_check: network too large (> 1e4 parameters)");

  const ForwardCache cache = forward(params, data);
  const Gradients analytic = backward(spec, params, cache, targets);

  NetworkParams probe = params;
  const auto loss_at = [&]() {
    return loss_value(spec, forward(probe, data).output(), targets);
  };

  GradCheckReport report;
  report.min_relu_preactivation = std::numeric_limits<double>::infinity();
  {
    // Track distance to ReLU kinks on the unperturbed pass.
    Eigen::MatrixXd h = data;
    for (const auto& layer : params.layers) {
      Eigen::MatrixXd z = layer.weights * h;
      z.colwise() += layer.bias;
      if (layer.activation == Activation::ReLU)
        report.min_relu_preactivation =
            std::min(report.min_relu_preactivation, z.array().abs().minCoeff());
      h = apply_activation(layer.activation, z);
    }
  }

  double err_sum = 0.0;
  std::size_t err_count = 0;
  const auto rel_err = [](double ga, double gn) {
    return std::abs(ga - gn) / std::max({std::abs(ga), std::abs(gn), 1e-3});
  };

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    GradCheckReport::LayerStats wstats, bstats;
    double wsum = 0.0, bsum = 0.0;
    auto& w = probe.layers[l].weights;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double saved = w.data()[i];
      w.data()[i] = saved + epsilon;
      const double lp = loss_at();
      w.data()[i] = saved - epsilon;
      const double lm = loss_at();
      w.data()[i] = saved;
      const double gn = (lp - lm) / (2.0 * epsilon);
      const double e = rel_err(analytic.weights[l].data()[i], gn);
      wstats.max_rel_err = std::max(wstats.max_rel_err, e);
      wsum += e;
    }
    auto& b = probe.layers[l].bias;
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double saved = b(i);
      b(i) = saved + epsilon;
      const double lp = loss_at();
      b(i) = saved - epsilon;
      const double lm = loss_at();
      b(i) = saved;
      const double gn = (lp - lm) / (2.0 * epsilon);
      const double e = rel_err(analytic.bias[l](i), gn);
      bstats.max_rel_err = std::max(bstats.max_rel_err, e);
      bsum += e;
    }
    wstats.mean_rel_err = w.size() > 0 ? wsum / double(w.size()) : 0.0;
    bstats.mean_rel_err = b.size() > 0 ? bsum / double(b.size()) : 0.0;
    err_sum += wsum + bsum;
    err_count += std::size_t(w.size()) + std::size_t(b.size());
    report.max_rel_err =
        std::max({report.max_rel_err, wstats.max_rel_err, bstats.max_rel_err});
    report.weight_stats.push_back(wstats);
    report.bias_stats.push_back(bstats);
  }
  report.mean_rel_err = err_count > 0 ? err_sum / double(err_count) : 0.0;
  return report;
}

namespace {
constexpr char kModelMagic[4] = {'E', 'G', 'N', 'N'};
constexpr std::uint16_t kModelVersion = 1;
}  // namespace

void save_network(const std::string& path, const NetworkSpec& spec,
                  const NetworkParams& params) {
  spec.validate();
  if (static_cast<int>(params.layers.size()) != spec.num_layers())
    throw std::invalid_argument("save_network: params do not match spec");

  json j;
  j["layer_sizes"] = spec.layer_sizes;
  std::vector<std::string> acts;
  for (auto a : spec.activations) acts.push_back(to_string(a));
  j["activations"] = acts;
  j["loss"] = to_string(spec.loss);
  if (spec.bottleneck_index) j["bottleneck_index"] = *spec.bottleneck_index;
  j["mse_per_element"] = spec.mse_per_element;
  const std::string text = j.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kModelMagic, 4);
  out.write(reinterpret_cast<const char*>(&kModelVersion), 2);
  const auto len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(text.data(), std::streamsize(text.size()));
  for (const auto& layer : params.layers) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        const double v = layer.weights(r, c);
        out.write(reinterpret_cast<const char*>(&v), 8);
      }
    out.write(reinterpret_cast<const char*>(layer.bias.data()),
              std::streamsize(8) * layer.bias.size());
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<NetworkSpec, NetworkParams> load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  std::uint16_t ver = 0;
  std::uint32_t len = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&ver), 2);
  in.read(reinterpret_cast<char*>(&len), 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
    throw std::runtime_error(path + ": not a model file (bad magic)");
  if (ver != kModelVersion)
    throw std::runtime_error(path + ": unsupported model version " + std::to_string(ver));
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw std::runtime_error(path + ": truncated spec block");

  json j = json::parse(text);
  NetworkSpec spec;
  spec.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  for (const auto& a : j.at("activations"))
    spec.activations.push_back(activation_from_string(a.get<std::string>()));
  spec.loss = loss_from_string(j.at("loss").get<std::string>());
  if (j.contains("bottleneck_index")) spec.bottleneck_index = j["bottleneck_index"].get<int>();
  spec.mse_per_element = j.value("mse_per_element", false);
  spec.validate();

  NetworkParams params;
  for (int l = 0; l < spec.num_layers(); ++l) {
    LayerParams lp;
    lp.activation = spec.activations[l];
    lp.weights.resize(spec.layer_sizes[l + 1], spec.layer_sizes[l]);
    for (Eigen::Index r = 0; r < lp.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < lp.weights.cols(); ++c) {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        lp.weights(r, c) = v;
      }
    lp.bias.resize(spec.layer_sizes[l + 1]);
    in.read(reinterpret_cast<char*>(lp.bias.data()), std::streamsize(8) * lp.bias.size());
    if (!in) throw std::runtime_error(path + ": truncated parameter payload");
    params.layers.push_back(std::move(lp));
  }
  return {spec, params};
}

}  // namespace egonoise::nn
