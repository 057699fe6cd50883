#include "voxreg/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "voxreg/io_util.hpp"

namespace voxreg {

namespace {

constexpr char kMagic[8] = {'V', 'X', 'R', 'E', 'G', 'C', 'P', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads assume a little-endian host");

void append_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

}  // namespace

void save_checkpoint(const NetworkParameters& params, const TrainConfig& cfg, const std::string& path) {
  nlohmann::json manifest;
  manifest["format"] = 1;
  manifest["step_count"] = params.step_count;
  manifest["seg_classes"] = params.seg_classes;
  manifest["hyper"] = {
      {"lambda", cfg.lambda},
      {"beta", cfg.beta},
      {"learning_rate", cfg.learning_rate},
      {"adam_beta1", cfg.adam_beta1},
      {"adam_beta2", cfg.adam_beta2},
      {"adam_eps", cfg.adam_eps},
      {"epochs", cfg.epochs},
      {"nlcc_window", cfg.nlcc_window},
      {"seed", cfg.seed},
      {"mode", to_string(cfg.mode)},
      {"feat_keep_warped_term", cfg.feat_keep_warped_term},
  };
  auto tensors = nlohmann::json::array();
  for (const auto& [name, t] : params.named_tensors()) {
    tensors.push_back({{"name", name}, {"shape", t->shape}});
  }
  manifest["tensors"] = std::move(tensors);

  const std::string manifest_str = manifest.dump();
  std::string out;
  out.append(kMagic, 8);
  append_u32(out, static_cast<std::uint32_t>(manifest_str.size()));
  out += manifest_str;
  for (const auto& [name, t] : params.named_tensors()) {
    for (double v : t->value) {
      const float f = static_cast<float>(v);
      char buf[4];
      std::memcpy(buf, &f, 4);
      out.append(buf, 4);
    }
  }
  write_file_atomic(path, out);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw IoError("not a checkpoint file: " + path);
  }
  std::uint32_t manifest_len = 0;
  std::memcpy(&manifest_len, bytes.data() + 8, 4);
  if (bytes.size() < 12 + static_cast<std::size_t>(manifest_len)) {
    throw IoError("truncated checkpoint manifest: " + path);
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(12, manifest_len));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad checkpoint manifest: ") + e.what());
  }

  LoadedCheckpoint loaded;
  TrainConfig& cfg = loaded.config;
  const auto& h = manifest.at("hyper");
  cfg.lambda = h.at("lambda").get<double>();
  cfg.beta = h.at("beta").get<double>();
  cfg.learning_rate = h.at("learning_rate").get<double>();
  cfg.adam_beta1 = h.at("adam_beta1").get<double>();
  cfg.adam_beta2 = h.at("adam_beta2").get<double>();
  cfg.adam_eps = h.at("adam_eps").get<double>();
  cfg.epochs = h.at("epochs").get<int>();
  cfg.nlcc_window = h.at("nlcc_window").get<int>();
  cfg.seed = h.at("seed").get<std::uint64_t>();
  cfg.mode = train_mode_from_string(h.at("mode").get<std::string>());
  cfg.feat_keep_warped_term = h.at("feat_keep_warped_term").get<bool>();

  const int seg_classes = manifest.at("seg_classes").get<int>();
  loaded.params = make_network_parameters(0, seg_classes);
  loaded.params.step_count = manifest.at("step_count").get<std::int64_t>();

  auto named = loaded.params.named_tensors();
  const auto& tensor_list = manifest.at("tensors");
  if (tensor_list.size() != named.size()) {
    throw IoError("checkpoint tensor list does not match the network architecture");
  }
  std::size_t offset = 12 + manifest_len;
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& entry = tensor_list[i];
    if (entry.at("name").get<std::string>() != named[i].first ||
        entry.at("shape").get<std::vector<int>>() != named[i].second->shape) {
      throw IoError("checkpoint tensor " + named[i].first + " has unexpected name or shape");
    }
    const std::size_t count = named[i].second->value.size();
    if (offset + 4 * count > bytes.size()) throw IoError("truncated checkpoint payload: " + path);
    for (std::size_t j = 0; j < count; ++j) {
      float f;
      std::memcpy(&f, bytes.data() + offset + 4 * j, 4);
      named[i].second->value[j] = static_cast<double>(f);
    }
    offset += 4 * count;
  }
  return loaded;
}

}  // namespace voxreg
