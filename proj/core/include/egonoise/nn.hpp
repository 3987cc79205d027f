#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace egonoise::nn {

enum class Activation { Linear, ReLU, Sigmoid, Tanh, Softmax };
enum class LossKind { MSE, CrossEntropy };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);
std::string to_string(LossKind l);
LossKind loss_from_string(const std::string& s);

struct LayerParams {
  Eigen::MatrixXd weights;  // out_dim x in_dim
  Eigen::VectorXd bias;     // out_dim
  Activation activation = Activation::Linear;
};

struct NetworkSpec {
  std::vector<int> layer_sizes;         // input, hidden..., output
  std::vector<Activation> activations;  // one per non-input layer
  LossKind loss = LossKind::MSE;
  std::optional<int> bottleneck_index;  // 1-based hidden-layer ordinal
  bool mse_per_element = false;         // divide by batch*dim instead of batch

  int num_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int num_hidden() const { return static_cast<int>(layer_sizes.size()) - 2; }
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  void validate() const;
};

struct NetworkParams {
  std::vector<LayerParams> layers;

  int input_dim() const { return static_cast<int>(layers.front().weights.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().weights.rows()); }
  std::size_t parameter_count() const;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 0;
  enum class Init { UniformGlorot };
  Init init = Init::UniformGlorot;
  int early_stop_patience = 0;  // 0 disables early stopping
  void validate() const;
};

// Glorot-uniform weights, zero biases, deterministic in the seed.
NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed);

// Batch forward pass; columns are examples. activations[0] is the input,
// activations[l] is h_l, the last entry is the network output. Every
// intermediate is retained for feature extraction and backprop.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
  const Eigen::MatrixXd& output() const { return activations.back(); }
};

ForwardCache forward(const NetworkParams& params, const Eigen::MatrixXd& input);
Eigen::VectorXd forward_vec(const NetworkParams& params, const Eigen::VectorXd& x);

// Numerically safe softmax (max subtraction), one distribution per column.
Eigen::VectorXd softmax(const Eigen::VectorXd& y);
Eigen::MatrixXd softmax_cols(const Eigen::MatrixXd& y);

// (1/d) sum_i ||x_i - recon_i||^2, d = batch (or batch*dim per-element).
double mse_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& recon,
                bool per_element = false);

// Mean over the batch of -log p[target]; probabilities floored at 1e-12.
double cross_entropy_loss(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& onehot);

double loss_value(const NetworkSpec& spec, const Eigen::MatrixXd& output,
                  const Eigen::MatrixXd& targets);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
};

// Backprop through the cached forward pass. The softmax + cross-entropy
// head is fused: the output delta is (p - target) / batch.
Gradients backward(const NetworkSpec& spec, const NetworkParams& params,
                   const ForwardCache& cache, const Eigen::MatrixXd& targets);

// Generic variant taking dL/d(output) directly.
Gradients backward_from_output_grad(const NetworkParams& params, const ForwardCache& cache,
                                    const Eigen::MatrixXd& output_grad);

struct TrainResult {
  NetworkParams params;
  // Entry e is the full-training-set loss with the parameters entering
  // epoch e; the final entry is the end state (epochs + 1 entries).
  std::vector<double> train_loss;
  std::vector<double> val_loss;      // same indexing, when validation is present
  std::vector<double> val_accuracy;  // cross-entropy networks only
  int best_epoch = -1;               // epoch whose parameters were returned
};

// Deterministic minibatch SGD. Columns of data/targets are examples. When
// early_stop_patience > 0 and no validation set is passed, a 10% split is
// carved out deterministically from the seed. Throws when the loss turns
// non-finite, naming the epoch.
TrainResult sgd_train(const NetworkSpec& spec, const Eigen::MatrixXd& data,
                      const Eigen::MatrixXd& targets, const TrainConfig& cfg,
                      const Eigen::MatrixXd* val_data = nullptr,
                      const Eigen::MatrixXd* val_targets = nullptr,
                      const NetworkParams* initial = nullptr);

// Greedy layerwise pretraining (each hidden layer as a shallow autoencoder
// on the previous representation); returns initialization for the full
// network. The decoder of autoencoder l reconstructs the codomain of layer
// l-1, so it uses that layer's activation (linear for the raw input).
NetworkParams pretrain_greedy(const NetworkSpec& spec, const Eigen::MatrixXd& data,
                              const TrainConfig& cfg);

// Greedy pretraining followed by end-to-end fine-tuning of the whole stack
// as a reconstruction network (targets = data). Requires MSE loss and
// output_dim == input_dim.
TrainResult pretrain_stacked_autoencoder(const NetworkSpec& spec,
                                         const Eigen::MatrixXd& data,
                                         const TrainConfig& cfg);

struct GradCheckReport {
  struct LayerStats {
    double max_rel_err = 0.0;
    double mean_rel_err = 0.0;
  };
  std::vector<LayerStats> weight_stats;  // per layer, weights
  std::vector<LayerStats> bias_stats;    // per layer, biases
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  // Smallest |pre-activation| seen on ReLU layers; kinks closer than the
  // step size make central differences meaningless there.
  double min_relu_preactivation = 0.0;
};

// Central finite differences vs. analytic gradients over every parameter.
// Relative error uses denominator max(|ga|, |gn|, 1e-3); entries below the
// floor are effectively compared absolutely at that scale.
GradCheckReport grad_check(const NetworkSpec& spec, const NetworkParams& params,
                           const Eigen::MatrixXd& data, const Eigen::MatrixXd& targets,
                           double epsilon = 1e-5);

// Model file: magic "EGNN", u16 version, u32-length JSON spec block, then
// per layer the raw little-endian 64-bit weight (row-major) and bias
// payloads. load(save(x)) is bit-exact.
void save_network(const std::string& path, const NetworkSpec& spec,
                  const NetworkParams& params);
std::pair<NetworkSpec, NetworkParams> load_network(const std::string& path);

}  // namespace egonoise::nn
