#include <fstream>
#include <sstream>

#include <json.hpp>

#include "umanip/error.hpp"
#include "umanip/policy.hpp"

namespace umanip {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "umanip-checkpoint";
constexpr int kFormatVersion = 2;

json dump_net(const Mlp& net) {
  const Eigen::VectorXd& p = net.parameters();
  return json{{"layers", net.layer_sizes()}, {"parameters", std::vector<double>(p.data(), p.data() + p.size())}};
}

void load_net(const json& j, Mlp& net) {
  if (j.at("layers").get<std::vector<int>>() != net.layer_sizes()) {
    throw Error(ErrorKind::kSchema, "checkpoint layer sizes do not match its model config");
  }
  const auto values = j.at("parameters").get<std::vector<double>>();
  net.set_parameters(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

}  // namespace

std::string serialize_checkpoint(const PolicyModel& model) {
  json j;
  j["format"] = kFormat;
  j["version"] = kFormatVersion;
  j["mode"] = to_string(model.mode());
  if (model.mode() == ScorerMode::kLearned) {
    j["model"] = {{"hidden_width", model.model.hidden_width},
                  {"init_range", model.model.init_range},
                  {"seed", model.model.seed}};
    j["loss"] = {{"lambda", model.loss.lambda},
                 {"learning_rate", model.loss.learning_rate},
                 {"step_rule", to_string(model.loss.step_rule)}};
    j["position"] = dump_net(model.position.network());
    j["dist"] = dump_net(model.direction.dist_network());
    j["aot"] = dump_net(model.direction.aot_network());
  }
  return j.dump(1) + "\n";
}

PolicyModel parse_checkpoint(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) throw Error(ErrorKind::kSchema, "not a checkpoint file");
    if (j.at("version").get<int>() != kFormatVersion) {
      throw Error(ErrorKind::kSchema, "unsupported checkpoint version " + j.at("version").dump());
    }
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "oracle") return PolicyModel::oracle();
    if (mode != "learned") throw Error(ErrorKind::kSchema, "unknown checkpoint mode '" + mode + "'");
    ModelConfig m;
    m.hidden_width = j.at("model").at("hidden_width").get<int>();
    m.init_range = j.at("model").at("init_range").get<double>();
    m.seed = j.at("model").at("seed").get<std::uint64_t>();
    LossConfig l;
    l.lambda = j.at("loss").at("lambda").get<double>();
    l.learning_rate = j.at("loss").at("learning_rate").get<double>();
    l.step_rule = step_rule_from_string(j.at("loss").at("step_rule").get<std::string>());
    PolicyModel out = PolicyModel::learned(m, l);
    load_net(j.at("position"), out.position.network());
    load_net(j.at("dist"), out.direction.dist_network());
    load_net(j.at("aot"), out.direction.aot_network());
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const PolicyModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  out << serialize_checkpoint(model);
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
}

PolicyModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace umanip
