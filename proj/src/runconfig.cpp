#include "autofield/runconfig.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "autofield/error.hpp"
#include "autofield/rng.hpp"

namespace autofield {
namespace {

// Every key the configuration accepts. Strict parsing rejects anything else.
const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "run.seed", "run.out_dir", "run.mode",
      "data.path", "data.dataset", "data.delimiter", "data.label_column",
      "data.has_header", "data.label_binarize_above", "data.schema",
      "data.min_frequency", "data.ratio_train", "data.ratio_validation",
      "data.ratio_test",
      "synth.fields", "synth.informative", "synth.cardinalities",
      "synth.strengths", "synth.label_noise", "synth.rows",
      "model.embedding_dim", "model.hidden", "model.dropout",
      "optimizer.learning_rate", "optimizer.beta1", "optimizer.beta2",
      "optimizer.epsilon",
      "search.k", "search.update_frequency", "search.max_epochs",
      "search.patience", "search.min_delta", "search.batch_size",
      "search.temperature_floor", "search.temperature_slope", "search.anneal_on",
      "retrain.max_epochs", "retrain.patience", "retrain.min_delta",
      "retrain.batch_size", "retrain.fixed_epochs",
      "oracle.k_filter", "oracle.max_fields", "oracle.allow_large",
      "oracle.threads", "oracle.epochs", "oracle.batch_size",
  };
  return keys;
}

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t pos = value.find(',', start);
    const std::string item = trim(value.substr(
        start, pos == std::string::npos ? std::string::npos : pos - start));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
  }
  return parsed;
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double parsed = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return parsed;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + value + "'");
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), path);
}

RunConfig RunConfig::from_string(const std::string& text, const std::string& origin) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Comments run to end of line; values therefore cannot contain # or ;.
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section.empty()) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty section name");
      }
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside any section");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      config.set(section + "." + key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

void RunConfig::apply_override(const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like section.key=value, got '" + spec + "'");
  }
  set(trim(spec.substr(0, eq)), trim(spec.substr(eq + 1)));
}

void RunConfig::set(const std::string& full_key, const std::string& value) {
  if (known_keys().find(full_key) == known_keys().end()) {
    throw ConfigError("unknown config key '" + full_key + "'");
  }
  entries_[full_key] = value;
}

bool RunConfig::has(const std::string& full_key) const {
  const auto it = entries_.find(full_key);
  return it != entries_.end() && !it->second.empty();
}

std::string RunConfig::get_string(const std::string& full_key, const std::string& fallback) const {
  const auto it = entries_.find(full_key);
  return it == entries_.end() || it->second.empty() ? fallback : it->second;
}

std::uint64_t RunConfig::get_u64(const std::string& full_key, std::uint64_t fallback) const {
  if (!has(full_key)) return fallback;
  return parse_u64(full_key, entries_.at(full_key));
}

std::size_t RunConfig::get_size(const std::string& full_key, std::size_t fallback) const {
  return static_cast<std::size_t>(get_u64(full_key, fallback));
}

double RunConfig::get_double(const std::string& full_key, double fallback) const {
  if (!has(full_key)) return fallback;
  return parse_double(full_key, entries_.at(full_key));
}

bool RunConfig::get_bool(const std::string& full_key, bool fallback) const {
  if (!has(full_key)) return fallback;
  return parse_bool(full_key, entries_.at(full_key));
}

std::vector<std::size_t> RunConfig::get_size_list(const std::string& full_key) const {
  std::vector<std::size_t> out;
  if (!has(full_key)) return out;
  for (const std::string& item : split_list(entries_.at(full_key))) {
    out.push_back(static_cast<std::size_t>(parse_u64(full_key, item)));
  }
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& full_key) const {
  std::vector<double> out;
  if (!has(full_key)) return out;
  for (const std::string& item : split_list(entries_.at(full_key))) {
    out.push_back(parse_double(full_key, item));
  }
  return out;
}

std::string RunConfig::hash() const {
  // std::map iteration is already sorted by key.
  std::string canonical;
  for (const auto& [key, value] : entries_) {
    if (key == "run.out_dir" || key == "run.seed") continue;
    canonical += key;
    canonical += '=';
    canonical += value;
    canonical += '\n';
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  return std::string(buffer);
}

SearchMode RunConfig::mode() const {
  return parse_search_mode(get_string("run.mode", "autofield"));
}

std::array<double, 3> RunConfig::ratios() const {
  return {get_double("data.ratio_train", 0.8), get_double("data.ratio_validation", 0.1),
          get_double("data.ratio_test", 0.1)};
}

ModelConfig RunConfig::model_config() const {
  ModelConfig model;
  model.embedding_dim = get_size("model.embedding_dim", 16);
  model.hidden = get_size_list("model.hidden");
  if (model.hidden.empty()) model.hidden = {16, 8};
  model.dropout_rate = get_double("model.dropout", 0.2);
  return model;
}

AdamConfig RunConfig::adam_config() const {
  AdamConfig adam;
  adam.learning_rate = get_double("optimizer.learning_rate", 1e-4);
  adam.beta1 = get_double("optimizer.beta1", 0.9);
  adam.beta2 = get_double("optimizer.beta2", 0.999);
  adam.epsilon = get_double("optimizer.epsilon", 1e-8);
  return adam;
}

SearchConfig RunConfig::search_config() const {
  SearchConfig search;
  search.mode = mode();
  search.k = get_size("search.k", 0);
  search.update_frequency = get_size("search.update_frequency", 1);
  search.max_epochs = get_size("search.max_epochs", 30);
  search.patience = get_size("search.patience", 3);
  search.min_delta = get_double("search.min_delta", 1e-5);
  search.batch_size = get_size("search.batch_size", 2048);
  search.seed = seed();
  search.temperature.floor = get_double("search.temperature_floor", 0.01);
  search.temperature.slope = get_double("search.temperature_slope", 0.00005);
  const std::string anneal = get_string("search.anneal_on", "controller");
  if (anneal == "weight") {
    search.anneal_on_weight_steps = true;
  } else if (anneal != "controller") {
    throw ConfigError("search.anneal_on must be 'controller' or 'weight'");
  }
  search.model = model_config();
  search.weight_optimizer = adam_config();
  search.controller_optimizer = adam_config();
  return search;
}

RetrainConfig RunConfig::retrain_config() const {
  RetrainConfig retrain;
  retrain.max_epochs = get_size("retrain.max_epochs", 30);
  retrain.patience = get_size("retrain.patience", 3);
  retrain.min_delta = get_double("retrain.min_delta", 1e-5);
  retrain.batch_size = get_size("retrain.batch_size", 2048);
  if (has("retrain.fixed_epochs")) {
    retrain.fixed_epochs = get_size("retrain.fixed_epochs", 0);
  }
  retrain.seed = seed();
  retrain.model = model_config();
  retrain.optimizer = adam_config();
  return retrain;
}

OracleConfig RunConfig::oracle_config() const {
  OracleConfig oracle;
  oracle.k_filter = get_size_list("oracle.k_filter");
  oracle.max_fields = get_size("oracle.max_fields", 16);
  oracle.allow_large = get_bool("oracle.allow_large", false);
  oracle.threads = get_size("oracle.threads", 1);
  oracle.seed = seed();
  oracle.retrain = retrain_config();
  oracle.retrain.fixed_epochs = get_size("oracle.epochs", 3);
  oracle.retrain.batch_size = get_size("oracle.batch_size", oracle.retrain.batch_size);
  return oracle;
}

SyntheticSpec RunConfig::synthetic_spec() const {
  SyntheticSpec spec;
  spec.n_fields = get_size("synth.fields", 0);
  spec.informative = get_size_list("synth.informative");
  const std::vector<std::size_t> cards = get_size_list("synth.cardinalities");
  if (cards.size() == 1) {
    spec.cardinalities.assign(spec.n_fields, static_cast<std::uint32_t>(cards[0]));
  } else {
    for (std::size_t c : cards) spec.cardinalities.push_back(static_cast<std::uint32_t>(c));
  }
  spec.strengths = get_double_list("synth.strengths");
  spec.label_noise = get_double("synth.label_noise", 0.1);
  spec.rows = get_size("synth.rows", 0);
  spec.seed = seed();
  spec.ratios = ratios();
  return spec;
}

std::vector<FieldSchema> RunConfig::data_schema() const {
  const std::string text = get_string("data.schema", "");
  if (text.empty()) throw ConfigError("data.schema is required (name:categorical|numeric, ...)");
  std::vector<FieldSchema> schema;
  const std::size_t min_frequency = get_size("data.min_frequency", 2);
  for (const std::string& item : split_list(text)) {
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("data.schema entry '" + item + "' must look like name:kind");
    }
    FieldSchema field;
    field.field_id = schema.size();
    field.name = trim(item.substr(0, colon));
    const std::string kind = trim(item.substr(colon + 1));
    if (kind == "categorical") {
      field.kind = FieldKind::categorical;
    } else if (kind == "numeric") {
      field.kind = FieldKind::numeric;
    } else {
      throw ConfigError("data.schema kind '" + kind + "' must be categorical or numeric");
    }
    field.min_frequency = min_frequency;
    schema.push_back(field);
  }
  return schema;
}

ReadOptions RunConfig::read_options() const {
  ReadOptions options;
  const std::string delimiter = get_string("data.delimiter", "tab");
  if (delimiter == "tab") {
    options.delimiter = '\t';
  } else if (delimiter == "comma") {
    options.delimiter = ',';
  } else if (delimiter.size() == 1) {
    options.delimiter = delimiter[0];
  } else {
    throw ConfigError("data.delimiter must be 'tab', 'comma', or a single character");
  }
  options.label_column = get_size("data.label_column", 0);
  options.has_header = get_bool("data.has_header", false);
  if (has("data.label_binarize_above")) {
    options.label_binarize_above = get_double("data.label_binarize_above", 0.0);
  }
  return options;
}

}  // namespace autofield
