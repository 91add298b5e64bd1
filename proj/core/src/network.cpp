#include "asyncts/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "asyncts/error.hpp"

namespace asyncts {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

constexpr Gate kGates[] = {Gate::input, Gate::forget, Gate::cell, Gate::output};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const char* gate_name(Gate g) {
  switch (g) {
    case Gate::input: return "input";
    case Gate::forget: return "forget";
    case Gate::cell: return "cell";
    case Gate::output: return "output";
    case Gate::none: return "";
  }
  return "";
}

// EVL contribution d(loss)/d(prediction), already scaled by evl_weight.
double evl_prediction_grad(double prediction, double target, const NetworkConfig& cfg,
                           const std::optional<EvlContext>& evl) {
  if (!evl || cfg.evl_weight == 0.0) return 0.0;
  const double z = (prediction - evl->epsilon1) / evl->scale;
  const double raw = sigmoid(z);
  const double u = exceedance_probability(prediction, *evl);
  if (u != raw) return 0.0;  // clamped region
  const int v = target > evl->epsilon1 ? 1 : 0;
  return cfg.evl_weight * evl_grad(u, v, evl->params) * u * (1.0 - u) / evl->scale;
}

}  // namespace

void NetworkConfig::validate() const {
  if (input_dim < 1) throw ConfigError("network input_dim must be >= 1");
  if (lstm_layers < 1) throw ConfigError("network needs at least one LSTM layer");
  if (hidden_dim < 1) throw ConfigError("network hidden_dim must be >= 1");
  if (fc_dims.empty() || fc_dims.back() != 1) throw ConfigError("fc_dims must end in 1");
  if (std::any_of(fc_dims.begin(), fc_dims.end(), [](std::size_t d) { return d == 0; })) {
    throw ConfigError("fc_dims entries must be positive");
  }
  if (!(clip_norm >= 0.0)) throw ConfigError("clip_norm must be nonnegative");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  if (!(evl_weight >= 0.0)) throw ConfigError("evl_weight must be nonnegative");
}

bool NetworkConfig::same_shape(const NetworkConfig& o) const {
  return input_dim == o.input_dim && lstm_layers == o.lstm_layers && hidden_dim == o.hidden_dim &&
         fc_dims == o.fc_dims;
}

std::string Segment::name() const {
  const auto l = std::to_string(layer);
  switch (kind) {
    case SegmentKind::lstm_input_weights: return "lstm" + l + ".wx." + gate_name(gate);
    case SegmentKind::lstm_recurrent_weights: return "lstm" + l + ".wh." + gate_name(gate);
    case SegmentKind::lstm_bias: return "lstm" + l + ".b." + gate_name(gate);
    case SegmentKind::fc_weights: return "fc" + l + ".w";
    case SegmentKind::fc_bias: return "fc" + l + ".b";
  }
  return {};
}

std::shared_ptr<const ParameterLayout> ParameterLayout::build(const NetworkConfig& cfg) {
  cfg.validate();
  auto layout = std::make_shared<ParameterLayout>();
  const std::size_t h = cfg.hidden_dim;
  layout->hidden_ = h;
  layout->input_dim_ = cfg.input_dim;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    const std::size_t in = l == 0 ? cfg.input_dim : h;
    LstmBlock block{in, offset, 0, 0};
    for (std::size_t g = 0; g < 4; ++g) {
      layout->segments_.push_back({SegmentKind::lstm_input_weights, l, kGates[g], offset, h, in});
      offset += h * in;
    }
    block.wh = offset;
    for (std::size_t g = 0; g < 4; ++g) {
      layout->segments_.push_back({SegmentKind::lstm_recurrent_weights, l, kGates[g], offset, h, h});
      offset += h * h;
    }
    block.bias = offset;
    for (std::size_t g = 0; g < 4; ++g) {
      layout->segments_.push_back({SegmentKind::lstm_bias, l, kGates[g], offset, h, 1});
      offset += h;
    }
    layout->lstm_.push_back(block);
  }
  std::size_t in = h;
  for (std::size_t k = 0; k < cfg.fc_dims.size(); ++k) {
    const std::size_t out = cfg.fc_dims[k];
    FcBlock block{in, out, offset, 0};
    layout->segments_.push_back({SegmentKind::fc_weights, k, Gate::none, offset, out, in});
    offset += out * in;
    block.bias = offset;
    layout->segments_.push_back({SegmentKind::fc_bias, k, Gate::none, offset, out, 1});
    offset += out;
    layout->fc_.push_back(block);
    in = out;
  }
  layout->size_ = offset;
  return layout;
}

bool ParameterLayout::operator==(const ParameterLayout& o) const {
  if (size_ != o.size_ || segments_.size() != o.segments_.size()) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& a = segments_[i];
    const auto& b = o.segments_[i];
    if (a.kind != b.kind || a.layer != b.layer || a.gate != b.gate || a.offset != b.offset || a.rows != b.rows ||
        a.cols != b.cols) {
      return false;
    }
  }
  return true;
}

ParameterVector::ParameterVector(std::shared_ptr<const ParameterLayout> layout)
    : layout_(std::move(layout)), values_(layout_ ? layout_->size() : 0, 0.0) {}

bool ParameterVector::compatible(const ParameterVector& other) const {
  if (!layout_ || !other.layout_) return false;
  return layout_ == other.layout_ || *layout_ == *other.layout_;
}

void ParameterVector::set_version(std::uint64_t v) {
  if (v < version_) throw ContractError("parameter version may not decrease");
  version_ = v;
}

void ParameterVector::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool ParameterVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double l2_penalty(const ParameterVector& params) {
  double s = 0.0;
  const auto values = params.values();
  for (const auto& seg : params.layout().segments()) {
    if (seg.is_bias()) continue;
    s += squared_norm(values.subspan(seg.offset, seg.size()));
  }
  return s;
}

ParameterVector init_params(const NetworkConfig& cfg, std::uint64_t seed) {
  ParameterVector params(ParameterLayout::build(cfg));
  std::mt19937_64 rng(seed);
  auto values = params.values();
  for (const auto& seg : params.layout().segments()) {
    auto part = values.subspan(seg.offset, seg.size());
    if (seg.is_bias()) {
      const double b = seg.kind == SegmentKind::lstm_bias && seg.gate == Gate::forget ? 1.0 : 0.0;
      std::fill(part.begin(), part.end(), b);
      continue;
    }
    const double r = 1.0 / std::sqrt(static_cast<double>(seg.cols));
    std::uniform_real_distribution<double> dist(-r, r);
    for (double& x : part) x = dist(rng);
  }
  return params;
}

double forward(const ParameterVector& params, std::span<const double> inputs, const NetworkConfig& cfg,
               ForwardCache& cache) {
  const auto& layout = params.layout();
  const std::size_t h = layout.hidden();
  const std::size_t in0 = layout.input_dim();
  if (cfg.input_dim != in0 || layout.lstm().size() != cfg.lstm_layers || h != cfg.hidden_dim) {
    throw ContractError("forward: parameter layout does not match network config");
  }
  if (inputs.empty() || inputs.size() % in0 != 0) {
    throw ContractError("forward: input length must be a positive multiple of input_dim");
  }
  const std::size_t steps = inputs.size() / in0;
  const auto* w = params.data();
  const auto idx = [](std::size_t v) { return static_cast<Eigen::Index>(v); };

  cache.steps = steps;
  cache.input = Eigen::Map<const Eigen::MatrixXd>(inputs.data(), idx(in0), idx(steps));
  const std::size_t layers = layout.lstm().size();
  cache.gates.resize(layers);
  cache.cells.resize(layers);
  cache.cell_tanh.resize(layers);
  cache.hidden.resize(layers);

  for (std::size_t l = 0; l < layers; ++l) {
    const auto& blk = layout.lstm()[l];
    const ConstRowMap wx(w + blk.wx, idx(4 * h), idx(blk.input_dim));
    const ConstRowMap wh(w + blk.wh, idx(4 * h), idx(h));
    const ConstVecMap b(w + blk.bias, idx(4 * h));
    auto& gates = cache.gates[l];
    auto& c = cache.cells[l];
    auto& tc = cache.cell_tanh[l];
    auto& hid = cache.hidden[l];
    c.setZero(idx(h), idx(steps + 1));
    hid.setZero(idx(h), idx(steps + 1));
    tc.resize(idx(h), idx(steps));

    if (l == 0) gates.noalias() = wx * cache.input;
    else gates.noalias() = wx * cache.hidden[l - 1].rightCols(idx(steps));
    gates.colwise() += b;

    const auto hh = idx(h);
    for (std::size_t t = 0; t < steps; ++t) {
      const auto ti = idx(t);
      auto z = gates.col(ti);
      z.noalias() += wh * hid.col(ti);
      for (Eigen::Index k = 0; k < hh; ++k) {
        z(k) = sigmoid(z(k));
        z(hh + k) = sigmoid(z(hh + k));
        z(2 * hh + k) = std::tanh(z(2 * hh + k));
        z(3 * hh + k) = sigmoid(z(3 * hh + k));
      }
      c.col(ti + 1) = z.segment(hh, hh).cwiseProduct(c.col(ti)) + z.head(hh).cwiseProduct(z.segment(2 * hh, hh));
      tc.col(ti) = c.col(ti + 1).array().tanh();
      hid.col(ti + 1) = z.tail(hh).cwiseProduct(tc.col(ti));
      if (!c.col(ti + 1).allFinite()) {
        throw NumericError("forward: non-finite LSTM state at layer " + std::to_string(l) + ", timestep " +
                           std::to_string(t));
      }
    }
  }

  const auto fc = layout.fc();
  cache.fc_activations.resize(fc.size() + 1);
  cache.fc_activations[0] = cache.hidden.back().col(idx(steps));
  for (std::size_t k = 0; k < fc.size(); ++k) {
    const ConstRowMap wk(w + fc[k].weights, idx(fc[k].out), idx(fc[k].in));
    const ConstVecMap bk(w + fc[k].bias, idx(fc[k].out));
    auto& next = cache.fc_activations[k + 1];
    next.noalias() = wk * cache.fc_activations[k];
    next += bk;
    if (k + 1 < fc.size()) next = next.array().tanh();
  }
  cache.prediction = cache.fc_activations.back()(0);
  if (!std::isfinite(cache.prediction)) {
    throw NumericError("forward: non-finite prediction at timestep " + std::to_string(steps - 1));
  }
  return cache.prediction;
}

ForwardResult forward(const ParameterVector& params, std::span<const double> inputs, const NetworkConfig& cfg) {
  ForwardResult r{0.0, {}};
  r.prediction = forward(params, inputs, cfg, r.cache);
  return r;
}

double exceedance_probability(double prediction, const EvlContext& ctx) {
  constexpr double lo = 1e-12;
  const double u = sigmoid((prediction - ctx.epsilon1) / ctx.scale);
  return std::clamp(u, lo, 1.0 - lo);
}

LossTerms loss_terms(double prediction, double target, const ParameterVector& params, const NetworkConfig& cfg,
                     const std::optional<EvlContext>& evl) {
  LossTerms t;
  const double r = prediction - target;
  t.squared_error = r * r;
  if (cfg.lambda != 0.0) t.l2 = cfg.lambda * l2_penalty(params);
  if (evl && cfg.evl_weight != 0.0) {
    const double u = exceedance_probability(prediction, *evl);
    const int v = target > evl->epsilon1 ? 1 : 0;
    t.evl = cfg.evl_weight * evl_loss(u, v, evl->params);
  }
  t.total = t.squared_error + t.l2 + t.evl;
  return t;
}

double loss(double prediction, double target, const ParameterVector& params, const NetworkConfig& cfg,
            const std::optional<EvlContext>& evl) {
  return loss_terms(prediction, target, params, cfg, evl).total;
}

void backward(ForwardCache& cache, double target, const ParameterVector& params, const NetworkConfig& cfg,
              const std::optional<EvlContext>& evl, ParameterVector& grad) {
  const auto& layout = params.layout();
  if (cache.steps == 0 || cache.hidden.size() != layout.lstm().size() ||
      cache.fc_activations.size() != layout.fc().size() + 1 ||
      cache.hidden.front().rows() != static_cast<Eigen::Index>(layout.hidden())) {
    throw ContractError("backward: cache does not match the parameter layout");
  }
  if (!grad.compatible(params)) grad = ParameterVector(params.layout_ptr());
  grad.fill(0.0);

  const auto idx = [](std::size_t v) { return static_cast<Eigen::Index>(v); };
  const std::size_t h = layout.hidden();
  const auto hh = idx(h);
  const std::size_t steps = cache.steps;
  const auto* w = params.data();
  auto* g = grad.data();

  // dL/dprediction
  double dy = 2.0 * (cache.prediction - target) + evl_prediction_grad(cache.prediction, target, cfg, evl);

  const auto fc = layout.fc();
  Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, dy);
  Eigen::VectorXd d_act;
  for (std::size_t k = fc.size(); k-- > 0;) {
    const ConstRowMap wk(w + fc[k].weights, idx(fc[k].out), idx(fc[k].in));
    RowMap gw(g + fc[k].weights, idx(fc[k].out), idx(fc[k].in));
    VecMap gb(g + fc[k].bias, idx(fc[k].out));
    const auto& a = cache.fc_activations[k];
    gw.noalias() += delta * a.transpose();
    gb += delta;
    d_act.noalias() = wk.transpose() * delta;
    if (k > 0) delta = d_act.array() * (1.0 - a.array().square());
  }

  // d_act now holds dL/dh at the final timestep of the top LSTM layer.
  cache.d_hidden.setZero(hh, idx(steps));
  cache.d_hidden.col(idx(steps) - 1) = d_act;

  Eigen::VectorXd dh_next(hh), dc_next(hh), dh(hh), dc(hh);
  for (std::size_t l = layout.lstm().size(); l-- > 0;) {
    const auto& blk = layout.lstm()[l];
    const ConstRowMap wx(w + blk.wx, idx(4 * h), idx(blk.input_dim));
    const ConstRowMap wh(w + blk.wh, idx(4 * h), hh);
    RowMap gwx(g + blk.wx, idx(4 * h), idx(blk.input_dim));
    RowMap gwh(g + blk.wh, idx(4 * h), hh);
    VecMap gbias(g + blk.bias, idx(4 * h));
    const auto& gates = cache.gates[l];
    const auto& c = cache.cells[l];
    const auto& tc = cache.cell_tanh[l];
    const auto& hid = cache.hidden[l];

    cache.d_pre.resize(idx(4 * h), idx(steps));
    dh_next.setZero();
    dc_next.setZero();
    for (std::size_t t = steps; t-- > 0;) {
      const auto ti = idx(t);
      const auto gi = gates.col(ti).head(hh).array();
      const auto gf = gates.col(ti).segment(hh, hh).array();
      const auto gg = gates.col(ti).segment(2 * hh, hh).array();
      const auto go = gates.col(ti).tail(hh).array();
      const auto tct = tc.col(ti).array();
      dh = cache.d_hidden.col(ti) + dh_next;
      dc = dc_next.array() + dh.array() * go * (1.0 - tct.square());
      auto dz = cache.d_pre.col(ti);
      dz.head(hh) = dc.array() * gg * gi * (1.0 - gi);
      dz.segment(hh, hh) = dc.array() * c.col(ti).array() * gf * (1.0 - gf);
      dz.segment(2 * hh, hh) = dc.array() * gi * (1.0 - gg.square());
      dz.tail(hh) = dh.array() * tct * go * (1.0 - go);
      dc_next = dc.array() * gf;
      dh_next.noalias() = wh.transpose() * dz;
    }
    gwh.noalias() += cache.d_pre * hid.leftCols(idx(steps)).transpose();
    gbias += cache.d_pre.rowwise().sum();
    if (l == 0) {
      gwx.noalias() += cache.d_pre * cache.input.transpose();
    } else {
      gwx.noalias() += cache.d_pre * cache.hidden[l - 1].rightCols(idx(steps)).transpose();
      cache.d_below.noalias() = wx.transpose() * cache.d_pre;
      cache.d_hidden.swap(cache.d_below);
    }
  }

  if (cfg.lambda != 0.0) {
    const double two_lambda = 2.0 * cfg.lambda;
    for (const auto& seg : layout.segments()) {
      if (seg.is_bias()) continue;
      for (std::size_t i = seg.offset; i < seg.offset + seg.size(); ++i) g[i] += two_lambda * w[i];
    }
  }
}

ParameterVector backward(ForwardCache& cache, double target, const ParameterVector& params,
                         const NetworkConfig& cfg, const std::optional<EvlContext>& evl) {
  ParameterVector grad(params.layout_ptr());
  backward(cache, target, params, cfg, evl, grad);
  return grad;
}

double clip_gradients(ParameterVector& grad, double clip_norm) {
  if (clip_norm < 0.0) throw ArgumentError("clip_norm must be nonnegative");
  const double norm = std::sqrt(squared_norm(grad.values()));
  if (clip_norm > 0.0 && norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (double& x : grad.values()) x *= scale;
  }
  return norm;
}

void sgd_step(ParameterVector& params, const ParameterVector& grad, double eta) {
  if (!params.compatible(grad)) throw ContractError("sgd_step: gradient shape does not match parameters");
  if (!(eta > 0.0)) throw ArgumentError("sgd_step: step size must be positive");
  auto p = params.values();
  const auto d = grad.values();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= eta * d[i];
  if (!params.all_finite()) throw NumericError("sgd_step: non-finite parameter after update");
  params.bump_version();
}

}  // namespace asyncts
