#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "robarb/costs.hpp"
#include "robarb/errors.hpp"
#include "robarb/rng.hpp"

namespace robarb {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weight;  // out x in
  VectorX<Scalar> bias;
};

// Per-feature input standardization followed by a trainable affine map.
// Batch mode standardizes with the statistics of the evaluated batch; running
// mode uses the running estimates, which are frozen outside training.
template <typename Scalar>
struct InputNorm {
  VectorX<Scalar> scale;
  VectorX<Scalar> shift;
  VectorX<Scalar> running_mean;
  VectorX<Scalar> running_var;
};

inline constexpr double kNormEpsilon = 1e-5;
inline constexpr double kNormMomentum = 0.1;

// Delta_i: R^{i*d} -> [-B, B]^d. ReLU hidden layers, then a trainable affine
// projection to d outputs, tanh, and the fixed scale B.
template <typename Scalar>
struct PositionNet {
  InputNorm<Scalar> norm;
  std::vector<DenseLayer<Scalar>> hidden;
  DenseLayer<Scalar> head;

  Eigen::Index input_dim() const { return norm.scale.size(); }
};

// Trading strategy h = c + (Delta . S)_n - C_n. nets[i - 1] produces the
// positions held over (t_i, t_{i+1}] for i = 1..n-1; delta0 is the constant
// initial position.
template <typename Scalar>
struct StrategyNetwork {
  Scalar cash = Scalar(0);
  VectorX<Scalar> delta0;
  std::vector<PositionNet<Scalar>> nets;
  Scalar bound = Scalar(10);
  int assets = 0;
  int horizon = 0;
  std::vector<int> hidden_widths;
};

// Same shape as the trainable parameters of a StrategyNetwork.
template <typename Scalar>
struct GradientBundle {
  Scalar cash = Scalar(0);
  VectorX<Scalar> delta0;
  struct Net {
    VectorX<Scalar> scale;
    VectorX<Scalar> shift;
    std::vector<DenseLayer<Scalar>> hidden;
    DenseLayer<Scalar> head;
  };
  std::vector<Net> nets;
};

enum class NormMode { kBatch, kRunning };

// Activations recorded by a forward pass, consumed by backward().
template <typename Scalar>
struct ForwardTape {
  struct Net {
    MatrixX<Scalar> standardized;              // x_hat
    std::vector<MatrixX<Scalar>> layer_inputs; // input of each hidden layer and of the head
    std::vector<MatrixX<Scalar>> pre_activations;
    MatrixX<Scalar> squashed;                  // tanh output
  };
  std::vector<Net> nets;
  Eigen::Index batch = 0;
  bool recorded = false;
};

// widths of the default architecture for d assets: 32d, 64d, 128d.
inline std::vector<int> default_hidden_widths(int assets) {
  return {32 * assets, 64 * assets, 128 * assets};
}

// c = 0, delta0 = 0, norm scale 1 / shift 0 / running (0, 1). Affine maps
// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases, drawn net by
// net, layer by layer, weights in column-major order before biases.
template <typename Scalar>
StrategyNetwork<Scalar> init_strategy(Rng& rng, int assets, int horizon, Scalar bound,
                                      std::vector<int> hidden_widths = {}) {
  if (assets < 1 || horizon < 1) throw InputError("strategy needs d >= 1 and n >= 1");
  if (!(bound > Scalar(0))) throw InputError("bound B must be positive");
  if (hidden_widths.empty()) hidden_widths = default_hidden_widths(assets);
  for (int w : hidden_widths)
    if (w < 1) throw InputError("hidden widths must be positive");

  auto make_layer = [&rng](Eigen::Index in, Eigen::Index out) {
    DenseLayer<Scalar> layer;
    const double limit = 1.0 / std::sqrt(static_cast<double>(in));
    layer.weight.resize(out, in);
    layer.bias.resize(out);
    for (Eigen::Index c = 0; c < in; ++c)
      for (Eigen::Index r = 0; r < out; ++r) layer.weight(r, c) = Scalar(rng.uniform(-limit, limit));
    for (Eigen::Index r = 0; r < out; ++r) layer.bias[r] = Scalar(rng.uniform(-limit, limit));
    return layer;
  };

  StrategyNetwork<Scalar> net;
  net.assets = assets;
  net.horizon = horizon;
  net.bound = bound;
  net.hidden_widths = hidden_widths;
  net.delta0 = VectorX<Scalar>::Zero(assets);
  for (int i = 1; i < horizon; ++i) {
    PositionNet<Scalar> p;
    const Eigen::Index in = static_cast<Eigen::Index>(i) * assets;
    p.norm.scale = VectorX<Scalar>::Ones(in);
    p.norm.shift = VectorX<Scalar>::Zero(in);
    p.norm.running_mean = VectorX<Scalar>::Zero(in);
    p.norm.running_var = VectorX<Scalar>::Ones(in);
    Eigen::Index prev = in;
    for (int w : hidden_widths) {
      p.hidden.push_back(make_layer(prev, w));
      prev = w;
    }
    p.head = make_layer(prev, assets);
    net.nets.push_back(std::move(p));
  }
  return net;
}

template <typename Scalar>
GradientBundle<Scalar> zero_gradient(const StrategyNetwork<Scalar>& net) {
  GradientBundle<Scalar> g;
  g.delta0 = VectorX<Scalar>::Zero(net.delta0.size());
  for (const auto& p : net.nets) {
    typename GradientBundle<Scalar>::Net gn;
    gn.scale = VectorX<Scalar>::Zero(p.norm.scale.size());
    gn.shift = VectorX<Scalar>::Zero(p.norm.shift.size());
    for (const auto& l : p.hidden)
      gn.hidden.push_back({MatrixX<Scalar>::Zero(l.weight.rows(), l.weight.cols()),
                           VectorX<Scalar>::Zero(l.bias.size())});
    gn.head = {MatrixX<Scalar>::Zero(p.head.weight.rows(), p.head.weight.cols()),
               VectorX<Scalar>::Zero(p.head.bias.size())};
    g.nets.push_back(std::move(gn));
  }
  return g;
}

namespace detail {

// Visits trainable blocks of a network and the matching gradient blocks in a
// fixed order: cash, delta0, then per net scale, shift, hidden (W, b), head.
template <typename Scalar, typename Net, typename F>
void visit_blocks(Net& net, F&& f) {
  f(Eigen::Map<std::conditional_t<std::is_const_v<Net>, const VectorX<Scalar>, VectorX<Scalar>>>(&net.cash, 1));
  f(Eigen::Map<std::conditional_t<std::is_const_v<Net>, const VectorX<Scalar>, VectorX<Scalar>>>(net.delta0.data(), net.delta0.size()));
  for (auto& p : net.nets) {
    auto as_vec = [](auto& m) {
      using M = std::remove_reference_t<decltype(m)>;
      using V = std::conditional_t<std::is_const_v<M>, const VectorX<Scalar>, VectorX<Scalar>>;
      return Eigen::Map<V>(m.data(), m.size());
    };
    if constexpr (requires { p.norm; }) {
      f(as_vec(p.norm.scale));
      f(as_vec(p.norm.shift));
    } else {
      f(as_vec(p.scale));
      f(as_vec(p.shift));
    }
    for (auto& l : p.hidden) {
      f(as_vec(l.weight));
      f(as_vec(l.bias));
    }
    f(as_vec(p.head.weight));
    f(as_vec(p.head.bias));
  }
}

}  // namespace detail

template <typename Scalar>
Eigen::Index parameter_count(const StrategyNetwork<Scalar>& net) {
  Eigen::Index n = 0;
  detail::visit_blocks<Scalar>(net, [&n](const auto& block) { n += block.size(); });
  return n;
}

template <typename Scalar>
VectorX<Scalar> flatten_parameters(const StrategyNetwork<Scalar>& net) {
  VectorX<Scalar> out(parameter_count(net));
  Eigen::Index offset = 0;
  detail::visit_blocks<Scalar>(net, [&](const auto& block) {
    out.segment(offset, block.size()) = block;
    offset += block.size();
  });
  return out;
}

template <typename Scalar>
void assign_parameters(StrategyNetwork<Scalar>& net, const std::type_identity_t<Eigen::Ref<const VectorX<Scalar>>>& theta) {
  if (theta.size() != parameter_count(net)) throw InputError("parameter vector has the wrong size");
  Eigen::Index offset = 0;
  detail::visit_blocks<Scalar>(net, [&](auto block) {
    block = theta.segment(offset, block.size());
    offset += block.size();
  });
}

template <typename Scalar>
VectorX<Scalar> flatten_gradient(const GradientBundle<Scalar>& g) {
  Eigen::Index n = 0;
  detail::visit_blocks<Scalar>(g, [&n](const auto& block) { n += block.size(); });
  VectorX<Scalar> out(n);
  Eigen::Index offset = 0;
  detail::visit_blocks<Scalar>(g, [&](const auto& block) {
    out.segment(offset, block.size()) = block;
    offset += block.size();
  });
  return out;
}

template <typename Scalar>
void accumulate(GradientBundle<Scalar>& into, const GradientBundle<Scalar>& g) {
  into.cash += g.cash;
  into.delta0 += g.delta0;
  for (std::size_t i = 0; i < into.nets.size(); ++i) {
    auto& a = into.nets[i];
    const auto& b = g.nets[i];
    a.scale += b.scale;
    a.shift += b.shift;
    for (std::size_t k = 0; k < a.hidden.size(); ++k) {
      a.hidden[k].weight += b.hidden[k].weight;
      a.hidden[k].bias += b.hidden[k].bias;
    }
    a.head.weight += b.head.weight;
    a.head.bias += b.head.bias;
  }
}

// Projection onto |c| <= B, |delta0_j| <= B.
template <typename Scalar>
void project_to_budget(StrategyNetwork<Scalar>& net) {
  using std::clamp;
  net.cash = clamp(net.cash, -net.bound, net.bound);
  net.delta0 = net.delta0.cwiseMax(-net.bound).cwiseMin(net.bound);
}

template <typename Scalar>
void check_paths(const StrategyNetwork<Scalar>& net, Eigen::Index rows) {
  if (rows != static_cast<Eigen::Index>(net.horizon) * net.assets)
    throw InputError("paths must have n*d rows (n = " + std::to_string(net.horizon) +
                     ", d = " + std::to_string(net.assets) + ")");
}

// Positions for a batch of paths. `paths` is (n*d) x P in the PathMatrix
// layout; the result has the same shape with row i*d + j holding Delta_i^j.
// Row block i only reads the first i*d rows of each column.
template <typename Scalar>
MatrixX<Scalar> positions(const StrategyNetwork<Scalar>& net,
                          const Eigen::Ref<const Eigen::MatrixXd>& paths, NormMode mode,
                          ForwardTape<Scalar>* tape = nullptr) {
  check_paths(net, paths.rows());
  const Eigen::Index batch = paths.cols();
  const Eigen::Index d = net.assets;
  MatrixX<Scalar> out(paths.rows(), batch);
  out.topRows(d) = net.delta0.replicate(1, batch);
  if (tape) {
    tape->nets.clear();
    tape->nets.resize(net.nets.size());
    tape->batch = batch;
    tape->recorded = true;
  }

  for (std::size_t k = 0; k < net.nets.size(); ++k) {
    const auto& p = net.nets[k];
    const Eigen::Index in = p.input_dim();
    MatrixX<Scalar> x = paths.topRows(in).template cast<Scalar>();

    VectorX<Scalar> mean, inv_std;
    if (mode == NormMode::kBatch) {
      mean = x.rowwise().mean();
      x.colwise() -= mean;
      const VectorX<Scalar> var = x.array().square().rowwise().mean();
      inv_std = (var.array() + Scalar(kNormEpsilon)).rsqrt();
    } else {
      mean = p.norm.running_mean;
      x.colwise() -= mean;
      inv_std = (p.norm.running_var.array() + Scalar(kNormEpsilon)).rsqrt();
    }
    x = inv_std.asDiagonal() * x;  // x_hat
    MatrixX<Scalar> a = p.norm.scale.asDiagonal() * x;
    a.colwise() += p.norm.shift;

    typename ForwardTape<Scalar>::Net* rec = tape ? &tape->nets[k] : nullptr;
    if (rec) rec->standardized = std::move(x);

    for (const auto& layer : p.hidden) {
      MatrixX<Scalar> z = layer.weight * a;
      z.colwise() += layer.bias;
      if (rec) rec->layer_inputs.push_back(std::move(a));
      a = z.cwiseMax(Scalar(0));
      if (rec) rec->pre_activations.push_back(std::move(z));
    }
    MatrixX<Scalar> h = p.head.weight * a;
    h.colwise() += p.head.bias;
    h = h.array().tanh();
    out.middleRows(static_cast<Eigen::Index>(k + 1) * d, d) = net.bound * h;
    if (rec) {
      rec->layer_inputs.push_back(std::move(a));
      rec->squashed = std::move(h);
    }
  }
  return out;
}

// Gradient of a scalar loss given dLoss/dpositions (same shape as the output
// of positions()) and dLoss/dc.
template <typename Scalar>
GradientBundle<Scalar> backward(const StrategyNetwork<Scalar>& net, const ForwardTape<Scalar>& tape,
                                const std::type_identity_t<Eigen::Ref<const MatrixX<Scalar>>>& position_grad,
                                Scalar cash_grad) {
  if (!tape.recorded) throw InputError("backward called without a recorded forward pass");
  if (tape.nets.size() != net.nets.size() || position_grad.cols() != tape.batch)
    throw InputError("forward tape does not match this network or gradient");
  check_paths(net, position_grad.rows());

  const Eigen::Index d = net.assets;
  GradientBundle<Scalar> g = zero_gradient(net);
  g.cash = cash_grad;
  g.delta0 = position_grad.topRows(d).rowwise().sum();

  for (std::size_t k = 0; k < net.nets.size(); ++k) {
    const auto& p = net.nets[k];
    const auto& rec = tape.nets[k];
    auto& gn = g.nets[k];

    MatrixX<Scalar> delta = position_grad.middleRows(static_cast<Eigen::Index>(k + 1) * d, d).array() *
                            (net.bound * (Scalar(1) - rec.squashed.array().square()));
    gn.head.weight.noalias() = delta * rec.layer_inputs.back().transpose();
    gn.head.bias = delta.rowwise().sum();
    MatrixX<Scalar> upstream = p.head.weight.transpose() * delta;

    for (std::size_t layer = p.hidden.size(); layer-- > 0;) {
      delta = (rec.pre_activations[layer].array() > Scalar(0)).select(upstream, Scalar(0));
      gn.hidden[layer].weight.noalias() = delta * rec.layer_inputs[layer].transpose();
      gn.hidden[layer].bias = delta.rowwise().sum();
      upstream = p.hidden[layer].weight.transpose() * delta;
    }
    gn.scale = (upstream.array() * rec.standardized.array()).rowwise().sum();
    gn.shift = upstream.rowwise().sum();
  }
  return g;
}

// Running-statistics update from one training batch (momentum 0.1, unbiased
// batch variance).
template <typename Scalar>
void update_running_stats(StrategyNetwork<Scalar>& net, const Eigen::Ref<const Eigen::MatrixXd>& paths,
                          double momentum = kNormMomentum) {
  check_paths(net, paths.rows());
  const Eigen::Index batch = paths.cols();
  if (batch == 0) return;
  for (auto& p : net.nets) {
    const MatrixX<Scalar> x = paths.topRows(p.input_dim()).template cast<Scalar>();
    const VectorX<Scalar> mean = x.rowwise().mean();
    const Scalar denom = Scalar(batch > 1 ? batch - 1 : 1);
    const VectorX<Scalar> var = (x.colwise() - mean).array().square().rowwise().sum() / denom;
    p.norm.running_mean = Scalar(1 - momentum) * p.norm.running_mean + Scalar(momentum) * mean;
    p.norm.running_var = Scalar(1 - momentum) * p.norm.running_var + Scalar(momentum) * var;
  }
}

// Net trading profit (Delta . S)_n - C_n of every path, optionally with
// d profit / d positions. Sub-gradient of |x| and of max(-p, 0) at 0 is 0.
template <typename Scalar>
RowVectorX<Scalar> path_profits(const std::type_identity_t<Eigen::Ref<const MatrixX<Scalar>>>& pos,
                                const Eigen::Ref<const Eigen::MatrixXd>& paths,
                                const Eigen::Ref<const Eigen::VectorXd>& spot, const CostSpec& costs,
                                MatrixX<Scalar>* profit_grad = nullptr) {
  const Eigen::Index d = spot.size();
  const Eigen::Index n = d > 0 ? paths.rows() / d : 0;
  const Eigen::Index batch = paths.cols();
  if (pos.rows() != paths.rows() || pos.cols() != batch || n * d != paths.rows())
    throw InputError("positions and paths disagree in shape");

  RowVectorX<Scalar> profit = RowVectorX<Scalar>::Zero(batch);
  if (profit_grad) profit_grad->setZero(pos.rows(), batch);
  const Scalar short_rate(costs.short_lambda);

  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index l = 0; l < batch; ++l) {
      Scalar acc(0);
      Scalar prev_pos(0);
      for (Eigen::Index i = 0; i <= n; ++i) {
        const Scalar price = i == 0 ? Scalar(spot[j]) : Scalar(paths((i - 1) * d + j, l));
        const Scalar cur = i < n ? pos(i * d + j, l) : Scalar(0);
        const Scalar rate = costs.turnover_rate(price);
        const Scalar change = cur - prev_pos;
        acc -= rate * (change < Scalar(0) ? -change : change);
        if (cur < Scalar(0)) acc += short_rate * cur * price;
        if (i < n) {
          const Scalar next_price(paths(i * d + j, l));
          acc += cur * (next_price - price);
        }
        if (profit_grad) {
          const Scalar sgn = change > Scalar(0) ? Scalar(1) : (change < Scalar(0) ? Scalar(-1) : Scalar(0));
          if (i < n) {
            Scalar& gi = (*profit_grad)(i * d + j, l);
            gi += Scalar(paths(i * d + j, l)) - price - rate * sgn;
            if (cur < Scalar(0)) gi += short_rate * price;
          }
          if (i > 0) (*profit_grad)((i - 1) * d + j, l) += rate * sgn;
        }
        prev_pos = cur;
      }
      profit[l] += acc;
    }
  }
  return profit;
}

// Positions along a single n x d path (running statistics): n x d matrix
// with row i = Delta_i.
template <typename Scalar>
MatrixX<Scalar> positions_for_path(const StrategyNetwork<Scalar>& net,
                                   const Eigen::Ref<const Eigen::MatrixXd>& path) {
  if (path.rows() != net.horizon || path.cols() != net.assets)
    throw InputError("path must be n x d");
  const Eigen::MatrixXd col = path.transpose().reshaped(path.size(), 1);
  const MatrixX<Scalar> flat = positions(net, col, NormMode::kRunning);
  return flat.reshaped(net.assets, net.horizon).transpose();
}

// (Delta . S)_n - C_n along one n x d path starting at `spot`.
template <typename Scalar>
Scalar net_profit(const StrategyNetwork<Scalar>& net, const Eigen::Ref<const Eigen::MatrixXd>& path,
                  const Eigen::Ref<const Eigen::VectorXd>& spot, const CostSpec& costs) {
  if (path.rows() != net.horizon || path.cols() != net.assets)
    throw InputError("path must be n x d");
  const Eigen::MatrixXd col = path.transpose().reshaped(path.size(), 1);
  const MatrixX<Scalar> pos = positions(net, col, NormMode::kRunning);
  return path_profits<Scalar>(pos, col, spot, costs)[0];
}

}  // namespace robarb
