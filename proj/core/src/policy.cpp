#include "umanip/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umanip/error.hpp"

namespace umanip {

namespace {

constexpr double kProbFloor = 1e-12;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::array<double, 3> softmax3(const Eigen::Ref<const Eigen::VectorXd>& z) {
  const double m = z.maxCoeff();
  std::array<double, 3> p{std::exp(z[0] - m), std::exp(z[1] - m), std::exp(z[2] - m)};
  const double s = p[0] + p[1] + p[2];
  for (double& v : p) v /= s;
  return p;
}

std::vector<int> hidden_layers(int input, int width, int output) { return {input, width, width, output}; }

// Loss on logits z (1 x B) against 0/1 labels: mean softplus(z) - y z.
std::pair<double, Eigen::MatrixXd> bce_logit_loss(const Eigen::MatrixXd& z, const std::vector<int>& labels) {
  const double n = static_cast<double>(z.cols());
  double loss = 0.0;
  Eigen::MatrixXd grad(1, z.cols());
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const double y = labels[static_cast<std::size_t>(i)];
    loss += softplus(z(0, i)) - y * z(0, i);
    grad(0, i) = (sigmoid(z(0, i)) - y) / n;
  }
  return {loss / n, grad};
}

std::pair<double, Eigen::MatrixXd> mse_loss(const Eigen::MatrixXd& pred, const std::vector<double>& target,
                                            double weight) {
  const double n = static_cast<double>(pred.cols());
  double loss = 0.0;
  Eigen::MatrixXd grad(1, pred.cols());
  for (Eigen::Index i = 0; i < pred.cols(); ++i) {
    const double e = pred(0, i) - target[static_cast<std::size_t>(i)];
    loss += e * e;
    grad(0, i) = 2.0 * weight * e / n;
  }
  return {weight * loss / n, grad};
}

std::pair<double, Eigen::MatrixXd> ce_logit_loss(const Eigen::MatrixXd& z, const std::vector<AotLabel>& labels) {
  const double n = static_cast<double>(z.cols());
  double loss = 0.0;
  Eigen::MatrixXd grad(3, z.cols());
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const int y = aot_class_index(labels[static_cast<std::size_t>(i)]);
    const double m = z.col(i).maxCoeff();
    const double lse = m + std::log((z.col(i).array() - m).exp().sum());
    loss += lse - z(y, i);
    const std::array<double, 3> p = softmax3(z.col(i));
    for (int k = 0; k < 3; ++k) grad(k, i) = (p[static_cast<std::size_t>(k)] - (k == y ? 1.0 : 0.0)) / n;
  }
  return {loss / n, grad};
}

const Observation& require(const std::shared_ptr<const Observation>& obs) {
  if (!obs || obs->size() == 0) throw Error(ErrorKind::kShape, "transition is missing its observation");
  return *obs;
}

void fill_position_input(Eigen::Ref<Eigen::VectorXd> col, const Observation& obs, std::size_t point) {
  col.head<kPointFeatureDim>() = obs.features.row(static_cast<Eigen::Index>(point)).transpose();
  col.segment<kPooledFeatureDim>(kPointFeatureDim) = obs.pooled;
}

void fill_dist_input(Eigen::Ref<Eigen::VectorXd> col, const Observation& curr, std::size_t grasp,
                     const Vec3& dir) {
  col.head<kPooledFeatureDim>() = curr.pooled;
  col.segment<kPointFeatureDim>(kPooledFeatureDim) = curr.features.row(static_cast<Eigen::Index>(grasp)).transpose();
  col.tail<3>() = dir;
}

// Observations sampled with one seed correspond point by point, so the
// grasped sample's feature in the reference shows how that spot has moved.
// Without correspondence the reference point nearest the grasp is used. The
// reference enters as a difference to the current features, which is a
// linear change of coordinates of the plain concatenation.
void fill_aot_input(Eigen::Ref<Eigen::VectorXd> col, const Observation& curr, const Observation& ref,
                    std::size_t grasp, const Vec3& dir) {
  // Observations sampled with one seed correspond point by point, so the grasped sample's feature in the
  // reference shows how that spot has moved. Without correspondence the reference point nearest the grasp is used.
  const std::size_t ref_grasp = ref.size() == curr.size() ? grasp : ref.nearest(curr.points[grasp].position);
  col.head<kPooledFeatureDim>() = curr.pooled;
  col.segment<kPooledFeatureDim>(kPooledFeatureDim) = ref.pooled;
  col.segment<kPointFeatureDim>(2 * kPooledFeatureDim) = curr.features.row(static_cast<Eigen::Index>(grasp)).transpose();
  col.segment<kPointFeatureDim>(2 * kPooledFeatureDim + kPointFeatureDim) =
      ref.features.row(static_cast<Eigen::Index>(ref_grasp)).transpose();
  col.tail<3>() = dir;
}

}  // namespace

const char* to_string(ScorerMode mode) { return mode == ScorerMode::kOracle ? "oracle" : "learned"; }

void LossConfig::validate() const {
  if (!(lambda > 0.0)) throw Error(ErrorKind::kConfig, "lambda must be positive");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::kConfig, "learning rate must be positive");
}

void ModelConfig::validate() const {
  if (hidden_width < 1) throw Error(ErrorKind::kConfig, "hidden width must be positive");
  if (!(init_range > 0.0)) throw Error(ErrorKind::kConfig, "init range must be positive");
}

double EpsilonSchedule::value(long epoch) const {
  if (epoch < 0) throw Error(ErrorKind::kArgument, "epoch must be non-negative");
  if (epoch >= n_epochs) return eps_min;
  const double v = eps_start - static_cast<double>(epoch) * (eps_start - eps_min) / static_cast<double>(n_epochs);
  return std::max(eps_min, v);
}

double binary_cross_entropy(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size() || probs.empty()) throw Error(ErrorKind::kShape, "BCE size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kProbFloor, 1.0 - kProbFloor);
    loss -= labels[i] != 0 ? std::log(p) : std::log(1.0 - p);
  }
  return loss / static_cast<double>(probs.size());
}

double mean_squared_error(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) throw Error(ErrorKind::kShape, "MSE size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) loss += (pred[i] - target[i]) * (pred[i] - target[i]);
  return loss / static_cast<double>(pred.size());
}

double aot_cross_entropy(std::span<const std::array<double, 3>> probs, std::span<const AotLabel> labels) {
  if (probs.size() != labels.size() || probs.empty()) throw Error(ErrorKind::kShape, "CE size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    loss -= std::log(std::max(probs[i][static_cast<std::size_t>(aot_class_index(labels[i]))], kProbFloor));
  }
  return loss / static_cast<double>(probs.size());
}

double combined_direction_loss(std::span<const double> dist_pred, std::span<const double> dist_target,
                               std::span<const std::array<double, 3>> aot_probs,
                               std::span<const AotLabel> aot_labels, double lambda) {
  return lambda * mean_squared_error(dist_pred, dist_target) + aot_cross_entropy(aot_probs, aot_labels);
}

// ---------------------------------------------------------------- position

PositionScorer PositionScorer::oracle() { return PositionScorer(); }

PositionScorer::PositionScorer(const ModelConfig& model, const LossConfig& loss) : mode_(ScorerMode::kLearned) {
  model.validate();
  loss.validate();
  Rng rng(mix_seed(model.seed, 1));
  net_ = Mlp(hidden_layers(kPositionInputDim, model.hidden_width, 1), rng, model.init_range);
  optimizer_ = Optimizer(loss.step_rule, loss.learning_rate, net_.parameter_count());
}

std::vector<double> PositionScorer::score(const Observation& observation, const OracleView& truth) const {
  std::vector<double> out(observation.size(), 0.0);
  if (mode_ == ScorerMode::kOracle) {
    if (truth.object == nullptr) throw Error(ErrorKind::kArgument, "oracle scorer needs the object");
    const std::vector<Pose> poses = forward_kinematics(*truth.object, truth.state);
    for (std::size_t i = 0; i < observation.size(); ++i) {
      const SurfacePoint& p = observation.points[i];
      if (truth.object->link_joint(p.link) < 0) continue;
      out[i] = lever_radius(*truth.object, poses, p) >= kMinLeverRadius ? 1.0 : 0.0;
    }
    return out;
  }
  Eigen::MatrixXd in(kPositionInputDim, static_cast<Eigen::Index>(observation.size()));
  for (std::size_t i = 0; i < observation.size(); ++i) {
    fill_position_input(in.col(static_cast<Eigen::Index>(i)), observation, i);
  }
  const Eigen::MatrixXd z = net_.forward(in);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid(z(0, static_cast<Eigen::Index>(i)));
  return out;
}

Eigen::MatrixXd PositionScorer::batch_inputs(const PositionBatch& batch) {
  Eigen::MatrixXd in(kPositionInputDim, static_cast<Eigen::Index>(batch.items.size()));
  for (std::size_t i = 0; i < batch.items.size(); ++i) {
    const Transition& t = batch.items[i];
    const Observation& obs = require(t.obs_init);
    fill_position_input(in.col(static_cast<Eigen::Index>(i)), obs, obs.nearest(t.action.position));
  }
  return in;
}

double PositionScorer::train_step(const PositionBatch& batch) {
  if (mode_ != ScorerMode::kLearned) throw Error(ErrorKind::kArgument, "oracle scorer is not trainable");
  if (batch.items.empty()) throw Error(ErrorKind::kEmptyBuffer, "empty position batch");
  Mlp::Tape tape;
  const Eigen::MatrixXd z = net_.forward(batch_inputs(batch), tape);
  const auto [loss, dz] = bce_logit_loss(z, batch.labels);
  optimizer_.step(net_.mutable_parameters(), net_.backward(tape, dz));
  return loss;
}

double PositionScorer::grad_check(const PositionBatch& batch) const {
  if (mode_ != ScorerMode::kLearned) throw Error(ErrorKind::kArgument, "grad_check needs a learned scorer");
  const std::vector<int> labels = batch.labels;
  return gradient_check(net_, batch_inputs(batch),
                        [&labels](const Eigen::MatrixXd& z) { return bce_logit_loss(z, labels); });
}

// --------------------------------------------------------------- direction

AotLabel DirectionScores::label(std::size_t i) const {
  const auto& p = aot[i];
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (p[static_cast<std::size_t>(k)] > p[static_cast<std::size_t>(best)]) best = k;
  }
  return aot_from_class_index(best);
}

std::vector<AotLabel> DirectionScores::labels() const {
  std::vector<AotLabel> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = label(i);
  return out;
}

double DirectionScores::expected_aot(std::size_t i) const { return aot[i][2] - aot[i][0]; }

DirectionScorer DirectionScorer::oracle() { return DirectionScorer(); }

DirectionScorer::DirectionScorer(const ModelConfig& model, const LossConfig& loss)
    : mode_(ScorerMode::kLearned), loss_(loss) {
  model.validate();
  loss.validate();
  Rng dist_rng(mix_seed(model.seed, 2));
  Rng aot_rng(mix_seed(model.seed, 3));
  dist_net_ = Mlp(hidden_layers(kDistInputDim, model.hidden_width, 1), dist_rng, model.init_range);
  aot_net_ = Mlp(hidden_layers(kAotInputDim, model.hidden_width, 3), aot_rng, model.init_range);
  dist_optimizer_ = Optimizer(loss.step_rule, loss.learning_rate, dist_net_.parameter_count());
  aot_optimizer_ = Optimizer(loss.step_rule, loss.learning_rate, aot_net_.parameter_count());
}

DirectionScores DirectionScorer::score(const DirectionQuery& query, std::span<const Vec3> directions) const {
  DirectionScores out;
  out.dist.resize(directions.size());
  out.aot.resize(directions.size());
  if (mode_ == ScorerMode::kOracle) {
    const OracleView& truth = query.truth;
    if (truth.object == nullptr) throw Error(ErrorKind::kArgument, "oracle scorer needs the object");
    const std::vector<Vec3> dirs(directions.begin(), directions.end());
    const std::vector<double> dq = joint_deltas(*truth.object, truth.state, query.grasp, dirs);
    const int j = truth.object->link_joint(query.grasp.link);
    const Eigen::VectorXd deltas = truth.object->deltas();
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      JointState next = truth.state;
      if (j >= 0 && dq[i] != 0.0) {
        const Joint& joint = truth.object->joint(static_cast<std::size_t>(j));
        next[j] = std::clamp(truth.state[j] + dq[i], joint.lower, joint.upper);
      }
      const InteractionOutcome o = compute_outcome(truth.reference, truth.state, next, deltas);
      out.dist[i] = o.r_dist;
      out.aot[i] = {0.0, 0.0, 0.0};
      out.aot[i][static_cast<std::size_t>(aot_class_index(o.r_aot))] = 1.0;
    }
    return out;
  }
  if (query.obs_curr == nullptr || query.obs_ref == nullptr || query.obs_curr->size() == 0) {
    throw Error(ErrorKind::kArgument, "learned direction scorer needs both observations");
  }
  const Observation& curr = *query.obs_curr;
  const std::size_t g = curr.nearest(query.grasp.position);
  const auto n = static_cast<Eigen::Index>(directions.size());
  Eigen::MatrixXd din(kDistInputDim, n);
  Eigen::MatrixXd ain(kAotInputDim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3& d = directions[static_cast<std::size_t>(i)];
    fill_dist_input(din.col(i), curr, g, d);
    fill_aot_input(ain.col(i), curr, *query.obs_ref, g, d);
  }
  const Eigen::MatrixXd dz = dist_net_.forward(din);
  const Eigen::MatrixXd az = aot_net_.forward(ain);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.dist[static_cast<std::size_t>(i)] = dz(0, i);
    out.aot[static_cast<std::size_t>(i)] = softmax3(az.col(i));
  }
  return out;
}

DirectionScorer::Inputs DirectionScorer::batch_inputs(const DirectionBatch& batch) {
  const auto n = static_cast<Eigen::Index>(batch.items.size());
  Inputs in{Eigen::MatrixXd(kDistInputDim, n), Eigen::MatrixXd(kAotInputDim, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = batch.items[static_cast<std::size_t>(i)];
    const Observation& curr = require(t.obs_prev);
    const Observation& ref = require(t.obs_init);
    const std::size_t g = curr.nearest(t.action.position);
    fill_dist_input(in.dist.col(i), curr, g, t.action.direction);
    fill_aot_input(in.aot.col(i), curr, ref, g, t.action.direction);
  }
  return in;
}

namespace {

struct DirectionTargets {
  std::vector<double> dist;
  std::vector<AotLabel> aot;
};

DirectionTargets targets_of(const DirectionBatch& batch) {
  DirectionTargets t;
  for (const Transition& tr : batch.items) {
    t.dist.push_back(tr.outcome.r_dist);
    t.aot.push_back(tr.outcome.r_aot);
  }
  return t;
}

}  // namespace

DirectionLoss DirectionScorer::train_step(const DirectionBatch& batch) {
  if (mode_ != ScorerMode::kLearned) throw Error(ErrorKind::kArgument, "oracle scorer is not trainable");
  if (batch.items.empty()) throw Error(ErrorKind::kEmptyBuffer, "empty direction batch");
  const Inputs in = batch_inputs(batch);
  const DirectionTargets y = targets_of(batch);
  Mlp::Tape dtape;
  Mlp::Tape atape;
  const Eigen::MatrixXd dz = dist_net_.forward(in.dist, dtape);
  const Eigen::MatrixXd az = aot_net_.forward(in.aot, atape);
  const auto [dloss, dgrad] = mse_loss(dz, y.dist, loss_.lambda);
  const auto [aloss, agrad] = ce_logit_loss(az, y.aot);
  dist_optimizer_.step(dist_net_.mutable_parameters(), dist_net_.backward(dtape, dgrad));
  aot_optimizer_.step(aot_net_.mutable_parameters(), aot_net_.backward(atape, agrad));
  DirectionLoss out;
  out.dist = dloss / loss_.lambda;
  out.aot = aloss;
  out.combined = dloss + aloss;
  return out;
}

double DirectionScorer::grad_check(const DirectionBatch& batch) const {
  if (mode_ != ScorerMode::kLearned) throw Error(ErrorKind::kArgument, "grad_check needs a learned scorer");
  const Inputs in = batch_inputs(batch);
  const DirectionTargets y = targets_of(batch);
  // The dist head is checked on the bare MSE; lambda only rescales it and
  // would inflate finite-difference roundoff by the same factor.
  const double d = gradient_check(dist_net_, in.dist,
                                  [&](const Eigen::MatrixXd& z) { return mse_loss(z, y.dist, 1.0); });
  const double a = gradient_check(aot_net_, in.aot, [&](const Eigen::MatrixXd& z) { return ce_logit_loss(z, y.aot); });
  return std::max(d, a);
}

// ------------------------------------------------------------------- model

PolicyModel PolicyModel::oracle() { return PolicyModel{}; }

PolicyModel PolicyModel::learned(const ModelConfig& model, const LossConfig& loss) {
  return PolicyModel{model, loss, PositionScorer(model, loss), DirectionScorer(model, loss)};
}

double PolicyModel::grad_check(const PositionBatch& positions, const DirectionBatch& directions) const {
  return std::max(position.grad_check(positions), direction.grad_check(directions));
}

}  // namespace umanip
