#include "umanip/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "umanip/error.hpp"

namespace umanip {

Mlp::Mlp(std::vector<int> layer_sizes, Rng& rng, double init_range) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw Error(ErrorKind::kArgument, "network needs at least input and output sizes");
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_.resize(total);
  for (Eigen::Index i = 0; i < total; ++i) params_[i] = rng.uniform(-init_range, init_range);
}

void Mlp::set_parameters(const Eigen::VectorXd& params) {
  if (params.size() != params_.size()) throw Error(ErrorKind::kShape, "parameter vector size mismatch");
  params_ = params;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs) const {
  Tape tape;
  return forward(inputs, tape);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs, Tape& tape) const {
  if (inputs.rows() != input_size()) throw Error(ErrorKind::kShape, "network input has the wrong width");
  tape.activations.clear();
  tape.activations.push_back(inputs);
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + offsets_[l], out, in);
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + offsets_[l] + static_cast<Eigen::Index>(out) * in, out);
    Eigen::MatrixXd z = w * tape.activations.back();
    z.colwise() += b;
    if (l + 1 < layers) z = z.array().tanh().matrix();
    tape.activations.push_back(std::move(z));
  }
  return tape.activations.back();
}

Eigen::VectorXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& output_grad) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  const std::size_t layers = sizes_.size() - 1;
  Eigen::MatrixXd delta = output_grad;  // dLoss/dz for the current layer
  for (std::size_t l = layers; l-- > 0;) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const Eigen::MatrixXd& input = tape.activations[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + static_cast<Eigen::Index>(out) * in, out);
    gw.noalias() = delta * input.transpose();
    gb = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + offsets_[l], out, in);
    Eigen::MatrixXd back = w.transpose() * delta;
    delta = back.array() * (1.0 - input.array().square());  // input holds tanh outputs
  }
  return grad;
}

double gradient_check(const Mlp& net, const Eigen::MatrixXd& inputs, const OutputLoss& loss, double step) {
  Mlp::Tape tape;
  const Eigen::MatrixXd out = net.forward(inputs, tape);
  const Eigen::VectorXd analytic = net.backward(tape, loss(out).second);
  Mlp probe = net;
  Eigen::VectorXd params = net.parameters();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    probe.set_parameters(params);
    const double up = loss(probe.forward(inputs)).first;
    params[i] = saved - step;
    probe.set_parameters(params);
    const double down = loss(probe.forward(inputs)).first;
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

const char* to_string(StepRule rule) {
  return rule == StepRule::kAdam ? "adam" : "gradient_descent";
}

StepRule step_rule_from_string(const std::string& name) {
  if (name == "adam") return StepRule::kAdam;
  if (name == "gradient_descent" || name == "sgd") return StepRule::kGradientDescent;
  throw Error(ErrorKind::kConfig, "unknown gradient step rule '" + name + "'");
}

Optimizer::Optimizer(StepRule rule, double learning_rate, Eigen::Index size)
    : rule_(rule), lr_(learning_rate), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void Optimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (rule_ == StepRule::kGradientDescent) {
    params -= lr_ * grad;
    return;
  }
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++t_;
  m_ = kBeta1 * m_ + (1.0 - kBeta1) * grad;
  v_ = kBeta2 * v_ + (1.0 - kBeta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + kEps);
}

}  // namespace umanip
