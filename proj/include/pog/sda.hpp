#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pog/common.hpp"

namespace pog::sda {

enum class Activation : std::uint8_t { kSigmoid = 0, kLinear = 1, kTanh = 2 };

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z);
/// Derivative expressed through the activation output.
Eigen::MatrixXd activation_derivative(Activation act, const Eigen::MatrixXd& out);

/// One denoising autoencoder layer with tied weights: the decoder uses the
/// transposed encoder matrix but its own reconstruction bias.
struct DenoisingLayer {
  Eigen::MatrixXd weights;        ///< hidden x visible
  Eigen::VectorXd bias;           ///< hidden
  Eigen::VectorXd bias_recon;     ///< visible
  Activation act_hidden{Activation::kSigmoid};
  Activation act_recon{Activation::kLinear};

  int visible() const { return static_cast<int>(weights.cols()); }
  int hidden() const { return static_cast<int>(weights.rows()); }

  Eigen::MatrixXd encode(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd decode(const Eigen::MatrixXd& hidden_act) const;
};

/// Layer with uniformly initialized weights and zero biases (seeded).
DenoisingLayer init_layer(int visible, int hidden, Activation act_hidden, Activation act_recon,
                          std::uint64_t seed);

struct TrainConfig {
  double noise_std{0.3};
  double learning_rate{0.001};
  double weight_decay{0.005};
  double momentum{0.9};
  int max_iterations{400};  ///< epochs over the training set
  int batch_size{32};
  std::uint64_t seed{1};
};

/// Additive Gaussian corruption of the input columns.
Eigen::MatrixXd corrupt(const Eigen::MatrixXd& input, double noise_std, std::uint64_t seed);

/// Batch loss: mean squared reconstruction error over the batch, halved, plus
/// the L2 weight penalty (weight_decay / 2) * ||W||_F^2.
double layer_loss(const DenoisingLayer& layer, const Eigen::MatrixXd& corrupted,
                  const Eigen::MatrixXd& clean, double weight_decay);

struct LayerGradients {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  Eigen::VectorXd bias_recon;
};

/// Analytic gradients of layer_loss with respect to all layer parameters.
/// The tied weight matrix accumulates both the encoder and the decoder path.
LayerGradients layer_gradients(const DenoisingLayer& layer, const Eigen::MatrixXd& corrupted,
                               const Eigen::MatrixXd& clean, double weight_decay);

struct TrainTrace {
  std::vector<double> loss_per_epoch;
};

/// Minibatch SGD with momentum on one layer; columns of data are samples.
/// Deterministic in (layer state, data, cfg). Throws NumericError when the
/// loss turns non-finite.
TrainTrace train_layer(DenoisingLayer& layer, const Eigen::MatrixXd& data,
                       const TrainConfig& cfg);

struct StackConfig {
  std::vector<int> layer_sizes{2000, 1000, 500};
  Activation act_hidden{Activation::kSigmoid};
  Activation act_recon{Activation::kLinear};
  TrainConfig train{};
};

/// Trained stack plus the input normalization (per-attribute zero-mean /
/// unit-range, attributes cycling with period shift.size()).
struct SdaModel {
  int input_dim{0};
  std::vector<double> shift;
  std::vector<double> scale;
  std::vector<DenoisingLayer> layers;
  std::vector<TrainTrace> traces;

  int feature_dim() const { return layers.empty() ? input_dim : layers.back().hidden(); }
};

Eigen::MatrixXd normalize_input(const SdaModel& model, const Eigen::MatrixXd& raw);

/// Greedy layer-wise training: layer 1 sees the normalized inputs, every
/// deeper layer the uncorrupted encoding of its predecessor. Corruption is
/// applied only inside each layer's own training. Data columns are samples;
/// the row count must be a multiple of the attribute period (5).
SdaModel train_stack(const Eigen::MatrixXd& raw_data, const StackConfig& cfg);

/// Encodes one raw input through every layer of the stack.
Eigen::VectorXd extract_features(const SdaModel& model, const Eigen::VectorXd& raw);
Eigen::MatrixXd extract_features(const SdaModel& model, const Eigen::MatrixXd& raw);

/// First-layer reconstruction error of the clean input in the normalized
/// domain: || r1 - p1 ||.
double reconstruction_error(const SdaModel& model, const Eigen::VectorXd& raw);

void save_model(const SdaModel& model, const std::string& path);
SdaModel load_model(const std::string& path);

}  // namespace pog::sda
