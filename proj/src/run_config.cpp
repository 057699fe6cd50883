#include "voxreg/run_config.hpp"

#include <filesystem>

#include <json.hpp>

#include "voxreg/io_util.hpp"

namespace voxreg {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& scope) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw IoError("config: unknown key '" + key + "' in " + scope);
    }
  }
}

std::array<double, 3> triple(const json& j) {
  if (j.is_number()) return {j.get<double>(), j.get<double>(), j.get<double>()};
  auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw IoError("config: expected a scalar or a 3-element array");
  return {v[0], v[1], v[2]};
}

void parse_simulator(const json& j, SimulatorConfig& cfg) {
  reject_unknown(j, {"rot_max", "scale_min", "scale_max", "trans_max", "elastic_gamma_max",
                     "smooth_sigma_min", "smooth_sigma_max", "seed"}, "simulator");
  if (j.contains("rot_max")) cfg.rot_max = triple(j["rot_max"]);
  if (j.contains("scale_min")) cfg.scale_min = triple(j["scale_min"]);
  if (j.contains("scale_max")) cfg.scale_max = triple(j["scale_max"]);
  if (j.contains("trans_max")) cfg.trans_max = triple(j["trans_max"]);
  if (j.contains("elastic_gamma_max")) cfg.elastic_gamma_max = j["elastic_gamma_max"].get<double>();
  if (j.contains("smooth_sigma_min")) cfg.smooth_sigma_min = j["smooth_sigma_min"].get<double>();
  if (j.contains("smooth_sigma_max")) cfg.smooth_sigma_max = j["smooth_sigma_max"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
}

void parse_train(const json& j, TrainConfig& cfg) {
  reject_unknown(j, {"lambda", "beta", "learning_rate", "adam_beta1", "adam_beta2", "adam_eps",
                     "epochs", "nlcc_window", "seed", "mode", "feat_keep_warped_term"}, "train");
  if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
  if (j.contains("beta")) cfg.beta = j["beta"].get<double>();
  if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("adam_beta1")) cfg.adam_beta1 = j["adam_beta1"].get<double>();
  if (j.contains("adam_beta2")) cfg.adam_beta2 = j["adam_beta2"].get<double>();
  if (j.contains("adam_eps")) cfg.adam_eps = j["adam_eps"].get<double>();
  if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
  if (j.contains("nlcc_window")) cfg.nlcc_window = j["nlcc_window"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("mode")) cfg.mode = train_mode_from_string(j["mode"].get<std::string>());
  if (j.contains("feat_keep_warped_term")) cfg.feat_keep_warped_term = j["feat_keep_warped_term"].get<bool>();
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IoError("config: failed to parse " + path + ": " + e.what());
  }

  RunConfig cfg;
  try {
    reject_unknown(j, {"mode", "seed", "simulator", "train", "paths"}, "top level");
    if (j.contains("seed")) {
      cfg.seed = j["seed"].get<std::uint64_t>();
      cfg.simulator.seed = cfg.seed;
      cfg.train.seed = cfg.seed;
    }
    if (j.contains("simulator")) parse_simulator(j["simulator"], cfg.simulator);
    if (j.contains("train")) parse_train(j["train"], cfg.train);
    if (j.contains("mode")) cfg.train.mode = train_mode_from_string(j["mode"].get<std::string>());
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      reject_unknown(p, {"dataset", "atlases", "output"}, "paths");
      if (p.contains("dataset")) cfg.dataset_dir = p["dataset"].get<std::string>();
      if (p.contains("atlases")) cfg.atlas_dir = p["atlases"].get<std::string>();
      if (p.contains("output")) cfg.output_dir = p["output"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw IoError("config: bad value in " + path + ": " + e.what());
  }

  for (const std::string& dir : {cfg.dataset_dir, cfg.atlas_dir}) {
    if (!dir.empty() && !std::filesystem::exists(dir)) {
      throw IoError("config: referenced path does not exist: " + dir);
    }
  }
  cfg.simulator.validate();
  cfg.train.validate();
  return cfg;
}

}  // namespace voxreg
