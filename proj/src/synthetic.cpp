#include "autofield/synthetic.hpp"

#include <algorithm>
#include <string>

#include "autofield/error.hpp"
#include "autofield/rng.hpp"

namespace autofield {
namespace {

void validate_spec(const SyntheticSpec& spec) {
  if (spec.n_fields < 2) throw ConfigError("synthetic: need at least 2 fields");
  if (spec.rows == 0) throw ConfigError("synthetic: rows must be >= 1");
  if (spec.informative.empty()) throw ConfigError("synthetic: informative set must be nonempty");
  if (spec.informative.size() > spec.n_fields) {
    throw ConfigError("synthetic: more informative fields than fields");
  }
  std::vector<std::size_t> sorted = spec.informative;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("synthetic: duplicate informative field id");
  }
  if (sorted.back() >= spec.n_fields) {
    throw ConfigError("synthetic: informative field id out of range");
  }
  if (spec.cardinalities.size() != spec.n_fields) {
    throw ConfigError("synthetic: cardinalities must list every field");
  }
  for (std::uint32_t c : spec.cardinalities) {
    if (c < 2) throw ConfigError("synthetic: cardinalities must be >= 2");
  }
  if (spec.label_noise < 0.0 || spec.label_noise > 1.0) {
    throw ConfigError("synthetic: label_noise must lie in [0, 1]");
  }
  if (!spec.strengths.empty() && spec.strengths.size() != spec.informative.size()) {
    throw ConfigError("synthetic: strengths must align with the informative set");
  }
  for (double s : spec.strengths) {
    if (s <= 0.0) throw ConfigError("synthetic: strengths must be positive");
  }
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  validate_spec(spec);
  const Rng rng(spec.seed);

  // Per-informative-field contribution tables: centered unit-scale normals,
  // scaled by the field's strength. Centering keeps the score threshold at 0
  // roughly label-balanced.
  std::vector<std::vector<double>> tables(spec.n_fields);
  for (std::size_t k = 0; k < spec.informative.size(); ++k) {
    const std::size_t field = spec.informative[k];
    const double strength = spec.strengths.empty() ? 1.0 : spec.strengths[k];
    auto engine = rng.stream("synth.table." + std::to_string(field));
    auto& table = tables[field];
    table.resize(spec.cardinalities[field]);
    double mean = 0.0;
    for (double& v : table) {
      v = normal01(engine);
      mean += v;
    }
    mean /= static_cast<double>(table.size());
    for (double& v : table) v = (v - mean) * strength;
  }

  auto rows_engine = rng.stream("synth.rows");
  auto noise_engine = rng.stream("synth.noise");

  RawTable table;
  table.schema.resize(spec.n_fields);
  for (std::size_t n = 0; n < spec.n_fields; ++n) {
    table.schema[n] = FieldSchema{n, "f" + std::to_string(n), FieldKind::categorical, 1};
  }
  table.rows.reserve(spec.rows);
  table.labels.reserve(spec.rows);

  std::vector<std::string> row(spec.n_fields);
  for (std::size_t r = 0; r < spec.rows; ++r) {
    double score = 0.0;
    for (std::size_t n = 0; n < spec.n_fields; ++n) {
      const std::uint32_t category = uniform_below(rows_engine, spec.cardinalities[n]);
      row[n] = "t" + std::to_string(category);
      if (!tables[n].empty()) score += tables[n][category];
    }
    std::uint8_t label = score > 0.0 ? 1 : 0;
    if (spec.label_noise > 0.0 && uniform01(noise_engine) < spec.label_noise) {
      label = static_cast<std::uint8_t>(1 - label);
    }
    table.rows.push_back(row);
    table.labels.push_back(label);
  }

  SyntheticData out;
  out.dataset = encode_table(table, build_vocabulary(table.rows, table.schema), spec.seed);
  out.splits = split_dataset(out.dataset.n_rows(), spec.ratios, spec.seed);
  return out;
}

}  // namespace autofield
