// Command-line front end: prepare/synth build datasets, search runs the
// gate-learning stage, retrain/evaluate handle the hard-selection stage,
// enumerate runs the exhaustive subset study, pipeline chains the stages,
// report merges result ledgers into plot-ready CSVs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "autofield/artifacts.hpp"
#include "autofield/checkpoint.hpp"
#include "autofield/data.hpp"
#include "autofield/enumerate.hpp"
#include "autofield/error.hpp"
#include "autofield/retrain.hpp"
#include "autofield/runconfig.hpp"
#include "autofield/search.hpp"
#include "autofield/synthetic.hpp"

namespace {

namespace af = autofield;
namespace fs = std::filesystem;

int log_level() {
  const char* env = std::getenv("AUTOFIELD_LOG");
  if (!env) return 1;
  const std::string value = env;
  if (value == "quiet" || value == "0") return 0;
  if (value == "debug" || value == "2") return 2;
  return 1;
}

void log_info(const std::string& message) {
  if (log_level() >= 1) std::cerr << "[autofield] " << message << "\n";
}

void log_debug(const std::string& message) {
  if (log_level() >= 2) std::cerr << "[autofield] " << message << "\n";
}

void log_warn(const std::string& message) {
  std::cerr << "[autofield] warning: " << message << "\n";
}

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string dataset_path;
  std::vector<std::string> overrides;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Run configuration file (INI sections)");
  cmd->add_option("--seed", args.seed, "Override run.seed");
  cmd->add_option("--out", args.out_dir, "Override run.out_dir");
  cmd->add_option("--data", args.dataset_path, "Override data.dataset (encoded dataset path)");
  cmd->add_option("--override", args.overrides, "Config override section.key=value (repeatable)");
}

af::RunConfig assemble_config(const CommonArgs& args) {
  af::RunConfig config = args.config_path.empty() ? af::RunConfig()
                                                  : af::RunConfig::load(args.config_path);
  for (const auto& item : args.overrides) config.apply_override(item);
  if (args.seed) config.set("run.seed", std::to_string(*args.seed));
  if (!args.out_dir.empty()) config.set("run.out_dir", args.out_dir);
  if (!args.dataset_path.empty()) config.set("data.dataset", args.dataset_path);
  return config;
}

fs::path ensure_out_dir(const af::RunConfig& config) {
  const fs::path dir = config.out_dir();
  fs::create_directories(dir);
  return dir;
}

struct LoadedData {
  af::EncodedDataset dataset;
  af::DatasetSplits splits;
};

LoadedData obtain_data(const af::RunConfig& config) {
  if (config.has("data.dataset")) {
    const std::string path = config.get_string("data.dataset", "");
    log_debug("loading dataset " + path);
    LoadedData data{af::load_dataset(path), {}};
    data.splits = af::split_dataset(data.dataset.n_rows(), config.ratios(), config.seed());
    return data;
  }
  if (config.has("synth.fields")) {
    log_debug("generating synthetic dataset");
    af::SyntheticData synthetic = af::generate_synthetic(config.synthetic_spec());
    return {std::move(synthetic.dataset), std::move(synthetic.splits)};
  }
  throw af::ConfigError("no dataset source: set data.dataset or a [synth] section");
}

af::LedgerRow make_ledger_row(const af::RunConfig& config, const std::string& kind,
                              std::size_t n_fields, const af::RetrainReport& report) {
  af::LedgerRow row;
  row.config_hash = config.hash();
  row.kind = kind;
  row.seed = config.seed();
  row.k = report.selected.size();
  row.n_fields = n_fields;
  row.subset_mask = af::subset_mask(report.selected);
  row.fields = af::joined_fields(report.selected);
  row.auc_score = report.test_auc;
  row.logloss_score = report.test_logloss;
  row.epochs = report.epochs;
  row.seconds = report.train_seconds;
  row.infer_ms_per_batch = report.infer_ms_per_batch;
  return row;
}

int cmd_synth(const af::RunConfig& config) {
  const fs::path out = ensure_out_dir(config);
  const af::SyntheticData data = af::generate_synthetic(config.synthetic_spec());
  const fs::path path = out / "dataset.txt";
  af::save_dataset(data.dataset, path.string());
  log_info("wrote " + path.string() + " (" + std::to_string(data.dataset.n_rows()) + " rows, " +
           std::to_string(data.dataset.n_fields()) + " fields)");
  return 0;
}

int cmd_prepare(const af::RunConfig& config) {
  if (!config.has("data.path")) throw af::ConfigError("prepare needs data.path");
  const fs::path out = ensure_out_dir(config);
  const std::vector<af::FieldSchema> schema = config.data_schema();
  const af::RawTable table =
      af::read_delimited(config.get_string("data.path", ""), schema, config.read_options());
  const af::Vocabulary vocab = af::build_vocabulary(table.rows, schema);
  const af::EncodedDataset dataset = af::encode_table(table, vocab, config.seed());
  const fs::path path = out / "dataset.txt";
  af::save_dataset(dataset, path.string());
  log_info("wrote " + path.string() + " (" + std::to_string(dataset.n_rows()) + " rows)");
  return 0;
}

// Runs the search stage; returns the result and writes trace + selection
// artifacts. Throws NumericError after flushing the partial trace when the
// loss diverges.
af::SearchResult run_search_stage(const af::RunConfig& config, const LoadedData& data,
                                  const fs::path& out) {
  const af::SearchConfig search_config = config.search_config();
  af::SearchEngine engine(search_config, data.dataset, data.splits);
  af::JsonlTraceWriter trace((out / "trace.jsonl").string(), config.hash(), config.seed(),
                             af::search_mode_name(search_config.mode));
  af::SearchResult result = engine.run(&trace);
  af::write_selection((out / "selection.json").string(), config.hash(), config.seed(),
                      af::search_mode_name(search_config.mode), search_config.k,
                      result.selected, result.alpha, result.empty_selection);
  log_info("selection: [" + af::joined_fields(result.selected) + "]");
  return result;
}

// Retrains on `selected` and writes report + checkpoint + ledger row.
af::RetrainReport run_retrain_stage(const af::RunConfig& config, const LoadedData& data,
                                    const fs::path& out, std::vector<std::size_t> selected,
                                    const std::string& kind) {
  af::RetrainOutcome outcome =
      af::run_retrain(config.retrain_config(), std::move(selected), data.dataset, data.splits);
  af::write_retrain_report((out / "report.json").string(), config.hash(), config.seed(),
                           outcome.report);
  af::save_model((out / "model.ckpt").string(), *outcome.model,
                 data.dataset.cardinalities(), config.hash(), config.seed());
  af::append_ledger((out / "report.csv").string(),
                    make_ledger_row(config, kind, data.dataset.n_fields(), outcome.report));
  log_info("retrain: test auc " + std::to_string(outcome.report.test_auc) + ", logloss " +
           std::to_string(outcome.report.test_logloss) + ", " +
           std::to_string(outcome.report.epochs) + " epochs");
  return outcome.report;
}

int cmd_search(const af::RunConfig& config) {
  const fs::path out = ensure_out_dir(config);
  const LoadedData data = obtain_data(config);
  const af::SearchResult result = run_search_stage(config, data, out);
  if (result.empty_selection) {
    log_warn("threshold selection is empty (no field reached keep probability > 0.5)");
  }
  return 0;
}

int cmd_retrain(const af::RunConfig& config, const std::string& selection_path,
                const std::string& fields_arg) {
  const fs::path out = ensure_out_dir(config);
  const LoadedData data = obtain_data(config);

  std::vector<std::size_t> selected;
  std::string kind = "retrain";
  if (!fields_arg.empty()) {
    std::size_t start = 0;
    while (start <= fields_arg.size()) {
      const std::size_t pos = fields_arg.find(',', start);
      const std::string item = fields_arg.substr(
          start, pos == std::string::npos ? std::string::npos : pos - start);
      if (!item.empty()) selected.push_back(std::stoull(item));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  } else {
    const std::string path =
        selection_path.empty() ? (out / "selection.json").string() : selection_path;
    std::ifstream in(path);
    if (!in) throw af::ConfigError("cannot open selection file: " + path);
    nlohmann::json doc;
    try {
      in >> doc;
      selected = doc.at("selected").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
      throw af::ParseError(path + ": bad selection file: " + e.what());
    }
    kind = "selection";
  }
  if (selected.empty()) throw af::ConfigError("retrain: selection is empty");
  run_retrain_stage(config, data, out, std::move(selected), kind);
  return 0;
}

int cmd_evaluate(const af::RunConfig& config, const std::string& checkpoint_path,
                 const std::string& split_name) {
  const fs::path out = ensure_out_dir(config);
  const LoadedData data = obtain_data(config);
  const std::string path =
      checkpoint_path.empty() ? (out / "model.ckpt").string() : checkpoint_path;
  const af::ModelCheckpoint checkpoint = af::load_model(path);
  if (checkpoint.cardinalities != data.dataset.cardinalities()) {
    throw af::ConfigError("checkpoint was trained on a different schema than this dataset");
  }

  const std::vector<std::uint32_t>* rows = &data.splits.test;
  if (split_name == "train") rows = &data.splits.train;
  else if (split_name == "validation") rows = &data.splits.validation;
  else if (split_name != "test") throw af::ConfigError("--split must be train|validation|test");

  const af::EvalResult result = af::evaluate_model(
      *checkpoint.model, data.dataset, *rows,
      config.retrain_config().batch_size);
  nlohmann::json doc{{"config_hash", checkpoint.config_hash},
                     {"seed", checkpoint.seed},
                     {"split", split_name},
                     {"auc", result.auc},
                     {"logloss", result.logloss},
                     {"ms_per_batch", result.ms_per_batch}};
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_enumerate(const af::RunConfig& config) {
  const fs::path out = ensure_out_dir(config);
  const LoadedData data = obtain_data(config);
  const af::OracleConfig oracle = config.oracle_config();

  const std::string ledger_path = (out / "report.csv").string();
  std::size_t done = 0;
  auto on_row = [&](const af::SubsetRow& row) {
    af::LedgerRow entry;
    entry.config_hash = config.hash();
    entry.kind = "enum";
    entry.seed = row.seed;
    entry.k = row.k;
    entry.n_fields = data.dataset.n_fields();
    entry.subset_mask = row.mask;
    entry.fields = af::joined_fields(af::mask_fields(row.mask));
    entry.auc_score = row.auc_score;
    entry.logloss_score = row.logloss_score;
    entry.epochs = oracle.retrain.fixed_epochs.value_or(0);
    entry.seconds = row.seconds;
    entry.infer_ms_per_batch = 0.0;
    af::append_ledger(ledger_path, entry);
    ++done;
    if (done % 16 == 0) log_debug(std::to_string(done) + " subsets done");
  };

  const af::SubsetReport report = af::enumerate_subsets(oracle, data.dataset, data.splits, on_row);
  af::write_subsets_csv((out / "subsets.csv").string(), report);
  af::write_enumeration_summary((out / "enumeration.json").string(), config.hash(),
                                config.seed(), report);
  log_info("enumerated " + std::to_string(report.rows.size()) + " subsets");
  return 0;
}

int cmd_pipeline(const af::RunConfig& config) {
  const fs::path out = ensure_out_dir(config);
  const LoadedData data = obtain_data(config);
  const af::SearchResult search = run_search_stage(config, data, out);
  if (search.empty_selection) {
    log_warn("threshold selection is empty; skipping retrain (degenerate result, see selection.json)");
    return 0;
  }
  run_retrain_stage(config, data, out, search.selected, "selection");
  return 0;
}

int cmd_report(const af::RunConfig& config, std::vector<std::string> ledger_paths) {
  const fs::path out = ensure_out_dir(config);
  if (ledger_paths.empty()) ledger_paths.push_back((out / "report.csv").string());
  const af::MergeResult merged = af::merge_ledgers(ledger_paths);
  if (merged.duplicates_dropped > 0) {
    log_warn(std::to_string(merged.duplicates_dropped) +
             " duplicate ledger rows dropped (same config hash, kind, seed, subset, K)");
  }
  af::write_ledger((out / "merged.csv").string(), merged.rows);
  af::write_scatter((out / "scatter.csv").string(), merged.rows);
  for (const auto& line : af::selection_percentiles(merged.rows)) {
    std::cout << line << "\n";
  }
  log_info("merged " + std::to_string(merged.rows.size()) + " rows into " +
           (out / "merged.csv").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automated feature-field selection for CTR models"};
  app.require_subcommand(1);

  CommonArgs synth_args, prepare_args, search_args, retrain_args, evaluate_args,
      enumerate_args, pipeline_args, report_args;

  CLI::App* synth = app.add_subcommand("synth", "Generate a planted synthetic dataset");
  add_common_options(synth, synth_args);

  CLI::App* prepare = app.add_subcommand("prepare", "Ingest and encode a raw delimited log");
  add_common_options(prepare, prepare_args);

  CLI::App* search = app.add_subcommand("search", "Run the gate-learning search stage");
  add_common_options(search, search_args);

  std::string retrain_selection, retrain_fields;
  CLI::App* retrain = app.add_subcommand("retrain", "Retrain on a selected field subset");
  add_common_options(retrain, retrain_args);
  retrain->add_option("--selection", retrain_selection,
                      "selection.json path (default <out>/selection.json)");
  retrain->add_option("--fields", retrain_fields, "Explicit field list, e.g. 0,2,5");

  std::string evaluate_checkpoint, evaluate_split = "test";
  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a model checkpoint");
  add_common_options(evaluate, evaluate_args);
  evaluate->add_option("--checkpoint", evaluate_checkpoint,
                       "Checkpoint path (default <out>/model.ckpt)");
  evaluate->add_option("--split", evaluate_split, "Split to score: train|validation|test");

  CLI::App* enumerate = app.add_subcommand("enumerate", "Train and rank every field subset");
  add_common_options(enumerate, enumerate_args);

  CLI::App* pipeline = app.add_subcommand("pipeline", "search, then retrain, then evaluate");
  add_common_options(pipeline, pipeline_args);

  std::vector<std::string> report_ledgers;
  CLI::App* report = app.add_subcommand("report", "Merge result ledgers into plot-ready CSVs");
  add_common_options(report, report_args);
  report->add_option("ledgers", report_ledgers, "Ledger CSV paths (default <out>/report.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) return cmd_synth(assemble_config(synth_args));
    if (prepare->parsed()) return cmd_prepare(assemble_config(prepare_args));
    if (search->parsed()) return cmd_search(assemble_config(search_args));
    if (retrain->parsed()) {
      return cmd_retrain(assemble_config(retrain_args), retrain_selection, retrain_fields);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(assemble_config(evaluate_args), evaluate_checkpoint, evaluate_split);
    }
    if (enumerate->parsed()) return cmd_enumerate(assemble_config(enumerate_args));
    if (pipeline->parsed()) return cmd_pipeline(assemble_config(pipeline_args));
    if (report->parsed()) return cmd_report(assemble_config(report_args), report_ledgers);
  } catch (const af::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
