#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "asyncts/extreme.hpp"

namespace asyncts {

/// Stacked LSTM followed by a fully connected stack with tanh between FC
/// layers and a linear scalar output.
struct NetworkConfig {
  std::size_t input_dim = 1;
  std::size_t lstm_layers = 2;
  std::size_t hidden_dim = 32;
  std::vector<std::size_t> fc_dims{16, 8, 1};
  double clip_norm = 1.0;   ///< 0 disables clipping
  double lambda = 0.0;      ///< L2 coefficient on weights (biases excluded)
  double evl_weight = 0.0;  ///< 0 drops the EVL term

  void validate() const;
  /// Shape fields only (input_dim, layers, hidden, fc_dims).
  bool same_shape(const NetworkConfig& other) const;
};

enum class SegmentKind { lstm_input_weights, lstm_recurrent_weights, lstm_bias, fc_weights, fc_bias };
enum class Gate { input, forget, cell, output, none };

struct Segment {
  SegmentKind kind;
  std::size_t layer;
  Gate gate;
  std::size_t offset;
  std::size_t rows;
  std::size_t cols;

  std::size_t size() const { return rows * cols; }
  bool is_bias() const { return kind == SegmentKind::lstm_bias || kind == SegmentKind::fc_bias; }
  std::string name() const;
};

// Each LSTM layer stores Wx (4H x in), Wh (4H x H) and b (4H) contiguously,
// row-major, with gate rows grouped in the order input, forget, cell, output.
struct LstmBlock {
  std::size_t input_dim;
  std::size_t wx;
  std::size_t wh;
  std::size_t bias;
};

struct FcBlock {
  std::size_t in;
  std::size_t out;
  std::size_t weights;
  std::size_t bias;
};

class ParameterLayout {
 public:
  static std::shared_ptr<const ParameterLayout> build(const NetworkConfig& cfg);

  std::span<const Segment> segments() const { return segments_; }
  std::span<const LstmBlock> lstm() const { return lstm_; }
  std::span<const FcBlock> fc() const { return fc_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t size() const { return size_; }

  bool operator==(const ParameterLayout& other) const;

 private:
  std::vector<Segment> segments_;
  std::vector<LstmBlock> lstm_;
  std::vector<FcBlock> fc_;
  std::size_t hidden_ = 0;
  std::size_t input_dim_ = 0;
  std::size_t size_ = 0;
};

/// Flat, versioned container of all network weights. Gradients use the same
/// type so they share the layout.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::shared_ptr<const ParameterLayout> layout);

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::size_t size() const { return values_.size(); }
  std::size_t payload_bytes() const { return values_.size() * sizeof(double); }

  const ParameterLayout& layout() const { return *layout_; }
  const std::shared_ptr<const ParameterLayout>& layout_ptr() const { return layout_; }
  bool has_layout() const { return layout_ != nullptr; }
  bool compatible(const ParameterVector& other) const;

  std::uint64_t version() const { return version_; }
  void set_version(std::uint64_t v);
  void bump_version() { ++version_; }

  void fill(double v);
  bool all_finite() const;

 private:
  std::shared_ptr<const ParameterLayout> layout_;
  std::vector<double> values_;
  std::uint64_t version_ = 0;
};

double squared_norm(std::span<const double> v);
/// Sum of squared weights, biases excluded.
double l2_penalty(const ParameterVector& params);

/// Maps the prediction's exceedance score (prediction - epsilon1) / scale
/// through a logistic squash and scores it with the Extreme Value Loss.
struct EvlContext {
  double epsilon1 = 0.0;
  double scale = 1.0;
  EvlParams params;
};

/// Per-timestep activations kept for backpropagation, plus backward scratch.
struct ForwardCache {
  std::size_t steps = 0;
  Eigen::MatrixXd input;                         // input_dim x W
  std::vector<Eigen::MatrixXd> gates;            // per layer 4H x W, activated
  std::vector<Eigen::MatrixXd> cells;            // per layer H x (W+1), column 0 = initial state
  std::vector<Eigen::MatrixXd> cell_tanh;        // per layer H x W
  std::vector<Eigen::MatrixXd> hidden;           // per layer H x (W+1)
  std::vector<Eigen::VectorXd> fc_activations;   // FC inputs; back() holds the output
  double prediction = 0.0;

  // backward scratch
  Eigen::MatrixXd d_pre;
  Eigen::MatrixXd d_hidden;
  Eigen::MatrixXd d_below;
};

ParameterVector init_params(const NetworkConfig& cfg, std::uint64_t seed);

/// Runs the window through the stacked LSTM (zero initial state) and the FC
/// stack. `inputs` holds W * input_dim values, timestep-major.
double forward(const ParameterVector& params, std::span<const double> inputs, const NetworkConfig& cfg,
               ForwardCache& cache);

struct ForwardResult {
  double prediction;
  ForwardCache cache;
};
ForwardResult forward(const ParameterVector& params, std::span<const double> inputs, const NetworkConfig& cfg);

double exceedance_probability(double prediction, const EvlContext& ctx);

struct LossTerms {
  double squared_error = 0.0;
  double l2 = 0.0;
  double evl = 0.0;
  double total = 0.0;
};

LossTerms loss_terms(double prediction, double target, const ParameterVector& params, const NetworkConfig& cfg,
                     const std::optional<EvlContext>& evl = std::nullopt);

/// (prediction - target)^2 + lambda * |w|^2 + evl_weight * EVL(u, label).
double loss(double prediction, double target, const ParameterVector& params, const NetworkConfig& cfg,
            const std::optional<EvlContext>& evl = std::nullopt);

/// Exact gradient of `loss` by backpropagation through time. `grad` is
/// (re)shaped to the parameter layout and overwritten.
void backward(ForwardCache& cache, double target, const ParameterVector& params, const NetworkConfig& cfg,
              const std::optional<EvlContext>& evl, ParameterVector& grad);
ParameterVector backward(ForwardCache& cache, double target, const ParameterVector& params,
                         const NetworkConfig& cfg, const std::optional<EvlContext>& evl = std::nullopt);

/// Rescales `grad` to norm `clip_norm` when its global norm exceeds it.
/// Returns the norm before clipping.
double clip_gradients(ParameterVector& grad, double clip_norm);

/// params -= eta * grad, version + 1.
void sgd_step(ParameterVector& params, const ParameterVector& grad, double eta);

}  // namespace asyncts
