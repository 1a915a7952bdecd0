#include "autofield/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "autofield/error.hpp"

namespace autofield {
namespace {

using nlohmann::json;

constexpr const char* kMagic = "autofield.model.v1";

}  // namespace

void save_model(const std::string& path, const RecModel& model,
                const std::vector<std::uint32_t>& cardinalities,
                const std::string& config_hash, std::uint64_t seed) {
  const ModelConfig& config = model.config();
  json tensors = json::array();
  for (const auto& tensor : model.params()) {
    tensors.push_back(json{{"name", tensor.name},
                           {"rows", tensor.value.rows()},
                           {"cols", tensor.value.cols()}});
  }
  json header{{"config_hash", config_hash},
              {"seed", seed},
              {"n_fields", config.n_fields},
              {"embedding_dim", config.embedding_dim},
              {"hidden", config.hidden},
              {"dropout", config.dropout_rate},
              {"active_fields", config.active_fields},
              {"cardinalities", cardinalities},
              {"tensors", tensors}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open checkpoint file: " + path);
  out << kMagic << "\n" << header.dump() << "\n";
  for (const auto& tensor : model.params()) {
    out.write(reinterpret_cast<const char*>(tensor.value.data()),
              static_cast<std::streamsize>(tensor.value.size() * sizeof(double)));
  }
  if (!out) throw Error("write failed: " + path);
}

ModelCheckpoint load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw ParseError(path + ": not an " + std::string(kMagic) + " checkpoint");
  }
  if (!std::getline(in, line)) throw ParseError(path + ": missing checkpoint header");

  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(path + ": bad checkpoint header: " + e.what());
  }

  ModelCheckpoint checkpoint;
  try {
    checkpoint.config_hash = header.at("config_hash").get<std::string>();
    checkpoint.seed = header.at("seed").get<std::uint64_t>();
    checkpoint.cardinalities = header.at("cardinalities").get<std::vector<std::uint32_t>>();

    ModelConfig config;
    config.n_fields = header.at("n_fields").get<std::size_t>();
    config.embedding_dim = header.at("embedding_dim").get<std::size_t>();
    config.hidden = header.at("hidden").get<std::vector<std::size_t>>();
    config.dropout_rate = header.at("dropout").get<double>();
    config.active_fields = header.at("active_fields").get<std::vector<std::size_t>>();
    checkpoint.model = std::make_unique<RecModel>(config, checkpoint.cardinalities,
                                                  Rng(checkpoint.seed));

    const json& tensors = header.at("tensors");
    ParameterStore& params = checkpoint.model->params();
    if (tensors.size() != params.count()) {
      throw ParseError(path + ": tensor count does not match the model layout");
    }
    for (std::size_t i = 0; i < params.count(); ++i) {
      Tensor& tensor = params[i];
      const json& meta = tensors[i];
      if (meta.at("name").get<std::string>() != tensor.name ||
          meta.at("rows").get<std::size_t>() != tensor.value.rows() ||
          meta.at("cols").get<std::size_t>() != tensor.value.cols()) {
        throw ParseError(path + ": tensor layout mismatch at '" + tensor.name + "'");
      }
      in.read(reinterpret_cast<char*>(tensor.value.data()),
              static_cast<std::streamsize>(tensor.value.size() * sizeof(double)));
      if (!in) throw ParseError(path + ": truncated tensor data at '" + tensor.name + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(path + ": bad checkpoint header field: " + e.what());
  }
  checkpoint.model->params().check_finite();
  return checkpoint;
}

}  // namespace autofield
