#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "umanip/rng.hpp"

namespace umanip {

// Fully connected network with tanh hidden layers and a linear output layer.
// Samples are columns. Parameters live in one flat vector, layer by layer,
// each as a column-major weight matrix followed by its bias.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, Rng& rng, double init_range);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  Eigen::Index parameter_count() const { return params_.size(); }

  const Eigen::VectorXd& parameters() const { return params_; }
  void set_parameters(const Eigen::VectorXd& params);
  Eigen::VectorXd& mutable_parameters() { return params_; }

  struct Tape {
    std::vector<Eigen::MatrixXd> activations;  // input, hidden..., output
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, Tape& tape) const;
  // Gradient of a scalar loss with respect to the flat parameters, given
  // dLoss/dOutput for the taped forward pass.
  Eigen::VectorXd backward(const Tape& tape, const Eigen::MatrixXd& output_grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;  // start of each layer's weights
  Eigen::VectorXd params_;
};

// Loss value and gradient with respect to the network output.
using OutputLoss = std::function<std::pair<double, Eigen::MatrixXd>(const Eigen::MatrixXd& outputs)>;

// Largest relative difference between analytic parameter gradients and
// central finite differences; |a - n| / max(|a|, |n|, 1e-6).
double gradient_check(const Mlp& net, const Eigen::MatrixXd& inputs, const OutputLoss& loss, double step = 1e-5);

enum class StepRule { kGradientDescent, kAdam };

const char* to_string(StepRule rule);
StepRule step_rule_from_string(const std::string& name);

class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(StepRule rule, double learning_rate, Eigen::Index size);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  StepRule rule_ = StepRule::kGradientDescent;
  double lr_ = 1e-3;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

}  // namespace umanip
