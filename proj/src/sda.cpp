#include "pog/sda.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

namespace pog::sda {

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kSigmoid:
      return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    case Activation::kLinear:
      return z;
    case Activation::kTanh:
      return z.array().tanh().matrix();
  }
  throw DataError("sda: unknown activation");
}

Eigen::MatrixXd activation_derivative(Activation act, const Eigen::MatrixXd& out) {
  switch (act) {
    case Activation::kSigmoid:
      return (out.array() * (1.0 - out.array())).matrix();
    case Activation::kLinear:
      return Eigen::MatrixXd::Ones(out.rows(), out.cols());
    case Activation::kTanh:
      return (1.0 - out.array().square()).matrix();
  }
  throw DataError("sda: unknown activation");
}

Eigen::MatrixXd DenoisingLayer::encode(const Eigen::MatrixXd& input) const {
  Eigen::MatrixXd z = (weights * input).colwise() + bias;
  return apply_activation(act_hidden, z);
}

Eigen::MatrixXd DenoisingLayer::decode(const Eigen::MatrixXd& hidden_act) const {
  Eigen::MatrixXd u = (weights.transpose() * hidden_act).colwise() + bias_recon;
  return apply_activation(act_recon, u);
}

DenoisingLayer init_layer(int visible, int hidden, Activation act_hidden, Activation act_recon,
                          std::uint64_t seed) {
  if (visible <= 0 || hidden <= 0) throw DataError("sda: layer sizes must be positive");
  DenoisingLayer layer;
  layer.act_hidden = act_hidden;
  layer.act_recon = act_recon;
  double r = std::sqrt(6.0 / (visible + hidden));
  if (act_hidden == Activation::kSigmoid) r *= 4.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-r, r);
  layer.weights.resize(hidden, visible);
  for (int row = 0; row < hidden; ++row)
    for (int col = 0; col < visible; ++col) layer.weights(row, col) = dist(rng);
  layer.bias = Eigen::VectorXd::Zero(hidden);
  layer.bias_recon = Eigen::VectorXd::Zero(visible);
  return layer;
}

Eigen::MatrixXd corrupt(const Eigen::MatrixXd& input, double noise_std, std::uint64_t seed) {
  if (noise_std < 0.0) throw DataError("sda: noise level must be non-negative");
  if (noise_std == 0.0) return input;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_std);
  Eigen::MatrixXd out = input;
  for (Eigen::Index col = 0; col < out.cols(); ++col)
    for (Eigen::Index row = 0; row < out.rows(); ++row) out(row, col) += dist(rng);
  return out;
}

double layer_loss(const DenoisingLayer& layer, const Eigen::MatrixXd& corrupted,
                  const Eigen::MatrixXd& clean, double weight_decay) {
  const Eigen::MatrixXd recon = layer.decode(layer.encode(corrupted));
  const double g = static_cast<double>(clean.cols());
  const double data_term = (recon - clean).squaredNorm() / (2.0 * g);
  const double reg_term = 0.5 * weight_decay * layer.weights.squaredNorm();
  return data_term + reg_term;
}

LayerGradients layer_gradients(const DenoisingLayer& layer, const Eigen::MatrixXd& corrupted,
                               const Eigen::MatrixXd& clean, double weight_decay) {
  const double g = static_cast<double>(clean.cols());
  const Eigen::MatrixXd q = layer.encode(corrupted);
  const Eigen::MatrixXd r = layer.decode(q);

  // dL/du for u = W^T q + b'; the data term is 1/(2G) sum ||r - p||^2.
  Eigen::MatrixXd du =
      ((r - clean).array() * activation_derivative(layer.act_recon, r).array()).matrix() / g;
  Eigen::MatrixXd dz =
      ((layer.weights * du).array() * activation_derivative(layer.act_hidden, q).array())
          .matrix();

  LayerGradients grads;
  grads.weights = dz * corrupted.transpose() + q * du.transpose() +
                  weight_decay * layer.weights;
  grads.bias = dz.rowwise().sum();
  grads.bias_recon = du.rowwise().sum();
  return grads;
}

TrainTrace train_layer(DenoisingLayer& layer, const Eigen::MatrixXd& data,
                       const TrainConfig& cfg) {
  if (data.cols() == 0) throw DataError("sda: empty training data");
  if (data.rows() != layer.visible())
    throw DataError("sda: data dimension does not match the layer");
  if (cfg.batch_size <= 0) throw DataError("sda: batch size must be positive");
  if (cfg.max_iterations < 0) throw DataError("sda: max_iterations must be non-negative");

  const Eigen::Index n = data.cols();
  Eigen::MatrixXd vel_w = Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols());
  Eigen::VectorXd vel_b = Eigen::VectorXd::Zero(layer.bias.size());
  Eigen::VectorXd vel_br = Eigen::VectorXd::Zero(layer.bias_recon.size());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  TrainTrace trace;
  trace.loss_per_epoch.reserve(static_cast<std::size_t>(cfg.max_iterations));
  for (int epoch = 0; epoch < cfg.max_iterations; ++epoch) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    std::normal_distribution<double> noise(0.0, cfg.noise_std);

    double loss_sum = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index g = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Eigen::MatrixXd clean(data.rows(), g);
      for (Eigen::Index c = 0; c < g; ++c)
        clean.col(c) = data.col(order[static_cast<std::size_t>(start + c)]);
      Eigen::MatrixXd corrupted = clean;
      if (cfg.noise_std > 0.0)
        for (Eigen::Index c = 0; c < g; ++c)
          for (Eigen::Index row = 0; row < corrupted.rows(); ++row)
            corrupted(row, c) += noise(rng);

      const double loss = layer_loss(layer, corrupted, clean, cfg.weight_decay);
      if (!std::isfinite(loss))
        throw NumericError("sda: training diverged at epoch " + std::to_string(epoch));
      loss_sum += loss;
      ++batches;

      const LayerGradients grads = layer_gradients(layer, corrupted, clean, cfg.weight_decay);
      vel_w = cfg.momentum * vel_w - cfg.learning_rate * grads.weights;
      vel_b = cfg.momentum * vel_b - cfg.learning_rate * grads.bias;
      vel_br = cfg.momentum * vel_br - cfg.learning_rate * grads.bias_recon;
      layer.weights += vel_w;
      layer.bias += vel_b;
      layer.bias_recon += vel_br;
    }
    trace.loss_per_epoch.push_back(loss_sum / std::max(batches, 1));
  }
  return trace;
}

Eigen::MatrixXd normalize_input(const SdaModel& model, const Eigen::MatrixXd& raw) {
  if (raw.rows() != model.input_dim)
    throw DataError("sda: input dimension " + std::to_string(raw.rows()) +
                    " does not match the model input " + std::to_string(model.input_dim));
  const std::size_t period = model.shift.size();
  Eigen::MatrixXd out = raw;
  for (Eigen::Index row = 0; row < out.rows(); ++row) {
    const std::size_t a = static_cast<std::size_t>(row) % period;
    out.row(row) = (out.row(row).array() - model.shift[a]) / model.scale[a];
  }
  return out;
}

SdaModel train_stack(const Eigen::MatrixXd& raw_data, const StackConfig& cfg) {
  constexpr int kPeriod = 5;
  if (raw_data.cols() == 0) throw DataError("sda: empty training data");
  if (raw_data.rows() % kPeriod != 0)
    throw DataError("sda: input dimension must be a multiple of " + std::to_string(kPeriod));
  if (cfg.layer_sizes.empty()) throw DataError("sda: stack needs at least one layer");

  SdaModel model;
  model.input_dim = static_cast<int>(raw_data.rows());
  model.shift.assign(kPeriod, 0.0);
  model.scale.assign(kPeriod, 1.0);

  // Per-attribute zero-mean / unit-range statistics over the training set.
  for (int a = 0; a < kPeriod; ++a) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::int64_t count = 0;
    for (Eigen::Index row = a; row < raw_data.rows(); row += kPeriod) {
      for (Eigen::Index col = 0; col < raw_data.cols(); ++col) {
        const double v = raw_data(row, col);
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        ++count;
      }
    }
    model.shift[static_cast<std::size_t>(a)] = sum / static_cast<double>(count);
    const double range = hi - lo;
    model.scale[static_cast<std::size_t>(a)] = range > 1e-12 ? range : 1.0;
  }

  Eigen::MatrixXd input = normalize_input(model, raw_data);
  int visible = model.input_dim;
  for (std::size_t l = 0; l < cfg.layer_sizes.size(); ++l) {
    const int hidden = cfg.layer_sizes[l];
    DenoisingLayer layer = init_layer(visible, hidden, cfg.act_hidden, cfg.act_recon,
                                      derive_seed(cfg.train.seed, 1000 + l));
    TrainConfig layer_cfg = cfg.train;
    layer_cfg.seed = derive_seed(cfg.train.seed, 2000 + l);
    model.traces.push_back(train_layer(layer, input, layer_cfg));
    input = layer.encode(input);
    model.layers.push_back(std::move(layer));
    visible = hidden;
  }
  return model;
}

Eigen::MatrixXd extract_features(const SdaModel& model, const Eigen::MatrixXd& raw) {
  Eigen::MatrixXd x = normalize_input(model, raw);
  for (const auto& layer : model.layers) x = layer.encode(x);
  return x;
}

Eigen::VectorXd extract_features(const SdaModel& model, const Eigen::VectorXd& raw) {
  return extract_features(model, Eigen::MatrixXd(raw)).col(0);
}

double reconstruction_error(const SdaModel& model, const Eigen::VectorXd& raw) {
  if (model.layers.empty()) throw DataError("sda: model has no layers");
  const Eigen::MatrixXd p = normalize_input(model, Eigen::MatrixXd(raw));
  const auto& first = model.layers.front();
  const Eigen::MatrixXd r = first.decode(first.encode(p));
  return (r - p).norm();
}

namespace {

void write_bytes(std::ofstream& f, const void* data, std::size_t size) {
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void write_u32(std::ofstream& f, std::uint32_t v) { write_bytes(f, &v, sizeof v); }
void write_f64(std::ofstream& f, double v) { write_bytes(f, &v, sizeof v); }

void write_matrix(std::ofstream& f, const Eigen::MatrixXd& m) {
  for (Eigen::Index row = 0; row < m.rows(); ++row)
    for (Eigen::Index col = 0; col < m.cols(); ++col) write_f64(f, m(row, col));
}

void read_bytes(std::ifstream& f, void* data, std::size_t size, const std::string& path) {
  f.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (!f) throw DataError("sda model: truncated file " + path);
}

std::uint32_t read_u32(std::ifstream& f, const std::string& path) {
  std::uint32_t v = 0;
  read_bytes(f, &v, sizeof v, path);
  return v;
}

double read_f64(std::ifstream& f, const std::string& path) {
  double v = 0.0;
  read_bytes(f, &v, sizeof v, path);
  return v;
}

constexpr char kMagic[8] = {'P', 'O', 'G', 'S', 'D', 'A', '0', '1'};

}  // namespace

void save_model(const SdaModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("sda model: cannot open " + path + " for writing");
  write_bytes(f, kMagic, sizeof kMagic);
  write_u32(f, static_cast<std::uint32_t>(model.input_dim));
  write_u32(f, static_cast<std::uint32_t>(model.shift.size()));
  for (double v : model.shift) write_f64(f, v);
  for (double v : model.scale) write_f64(f, v);
  write_u32(f, static_cast<std::uint32_t>(model.layers.size()));
  for (const auto& layer : model.layers) {
    write_u32(f, static_cast<std::uint32_t>(layer.visible()));
    write_u32(f, static_cast<std::uint32_t>(layer.hidden()));
    write_u32(f, static_cast<std::uint32_t>(layer.act_hidden));
    write_u32(f, static_cast<std::uint32_t>(layer.act_recon));
    write_matrix(f, layer.weights);
    write_matrix(f, layer.bias);
    write_matrix(f, layer.bias_recon);
  }
  if (!f) throw DataError("sda model: write failed for " + path);
}

SdaModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("sda model: cannot open " + path);
  char magic[8];
  read_bytes(f, magic, sizeof magic, path);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw DataError("sda model: bad magic in " + path);
  SdaModel model;
  model.input_dim = static_cast<int>(read_u32(f, path));
  const std::uint32_t period = read_u32(f, path);
  model.shift.resize(period);
  model.scale.resize(period);
  for (auto& v : model.shift) v = read_f64(f, path);
  for (auto& v : model.scale) v = read_f64(f, path);
  const std::uint32_t n_layers = read_u32(f, path);
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const int visible = static_cast<int>(read_u32(f, path));
    const int hidden = static_cast<int>(read_u32(f, path));
    DenoisingLayer layer;
    layer.act_hidden = static_cast<Activation>(read_u32(f, path));
    layer.act_recon = static_cast<Activation>(read_u32(f, path));
    layer.weights.resize(hidden, visible);
    for (int row = 0; row < hidden; ++row)
      for (int col = 0; col < visible; ++col) layer.weights(row, col) = read_f64(f, path);
    layer.bias.resize(hidden);
    for (int row = 0; row < hidden; ++row) layer.bias(row) = read_f64(f, path);
    layer.bias_recon.resize(visible);
    for (int row = 0; row < visible; ++row) layer.bias_recon(row) = read_f64(f, path);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

}  // namespace pog::sda
