#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autofield/enumerate.hpp"
#include "autofield/retrain.hpp"
#include "autofield/search.hpp"
#include "autofield/synthetic.hpp"

namespace autofield {

// Flat sectioned key/value run configuration. Parsing is strict: an unknown
// section or key is a ConfigError, so a typo can never silently fall back to
// a default. Values keep their literal text until a typed getter reads them.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig load(const std::string& path);
  static RunConfig from_string(const std::string& text, const std::string& origin = "<string>");

  // "section.key=value"; same validation as the file parser.
  void apply_override(const std::string& spec);
  void set(const std::string& full_key, const std::string& value);

  bool has(const std::string& full_key) const;
  std::string get_string(const std::string& full_key, const std::string& fallback) const;
  std::uint64_t get_u64(const std::string& full_key, std::uint64_t fallback) const;
  std::size_t get_size(const std::string& full_key, std::size_t fallback) const;
  double get_double(const std::string& full_key, double fallback) const;
  bool get_bool(const std::string& full_key, bool fallback) const;
  std::vector<std::size_t> get_size_list(const std::string& full_key) const;  // empty if absent
  std::vector<double> get_double_list(const std::string& full_key) const;

  // FNV-1a over the sorted canonical key=value lines, excluding run.out_dir
  // and run.seed so the same experiment relocated or reseeded shares a hash
  // lineage; the seed is recorded separately in every artifact.
  std::string hash() const;

  std::uint64_t seed() const { return get_u64("run.seed", 1); }
  std::string out_dir() const { return get_string("run.out_dir", "out"); }
  SearchMode mode() const;

  std::array<double, 3> ratios() const;
  ModelConfig model_config() const;       // n_fields/active_fields left for the engine
  AdamConfig adam_config() const;
  SearchConfig search_config() const;
  RetrainConfig retrain_config() const;   // model + optimizer included
  OracleConfig oracle_config() const;
  SyntheticSpec synthetic_spec() const;

  // Schema text "name:categorical,name:numeric,..." from data.schema.
  std::vector<FieldSchema> data_schema() const;
  ReadOptions read_options() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;  // "section.key" -> literal value
};

}  // namespace autofield
