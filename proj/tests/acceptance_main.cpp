// Acceptance gate: one criterion per command-line argument (or "all"), one
// [PASS]/[FAIL] line per criterion on stdout, exit 0 only if everything
// passed. Each criterion is a scaled-down, fully deterministic reproduction
// of a documented behavioural claim; every tolerance is pinned here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "autofield/controller.hpp"
#include "autofield/enumerate.hpp"
#include "autofield/error.hpp"
#include "autofield/grad_check.hpp"
#include "autofield/metrics.hpp"
#include "autofield/model.hpp"
#include "autofield/ops.hpp"
#include "autofield/retrain.hpp"
#include "autofield/rng.hpp"
#include "autofield/search.hpp"
#include "autofield/synthetic.hpp"

using namespace autofield;

namespace {

struct Criterion {
  bool pass = false;
  std::string details;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double value, int precision = 4) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
  return buffer;
}

std::string join_fields(const std::vector<std::size_t>& fields) {
  std::string out = "{";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(fields[i]);
  }
  return out + "}";
}

// ---------------------------------------------------------------------------
// Gradient fidelity: analytic gradients vs central finite differences at
// relative error <= 1e-4, >= 100 random coordinates per parameter group
// (dense weights, embeddings, controller logits under frozen noise).
Criterion check_gradient_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  const double kTol = 1e-4;

  // Model groups: 5 embedding tables and 6 dense tensors; 40 coordinates per
  // tensor (capped at tensor size) puts both groups at >= 100 checked
  // coordinates.
  Rng rng(20260822);
  ModelConfig config;
  config.n_fields = 5;
  config.embedding_dim = 4;
  config.hidden = {16, 12};
  config.dropout_rate = 0.2;
  config.active_fields = {0, 1, 2, 3, 4};
  std::vector<std::uint32_t> cards{7, 5, 9, 4, 6};
  RecModel model(config, cards, rng);

  Batch batch;
  batch.tag = SplitTag::train;
  batch.size = 16;
  batch.n_fields = 5;
  auto batch_engine = rng.stream("accept.batch");
  for (std::size_t b = 0; b < batch.size; ++b) {
    for (std::uint32_t card : cards) {
      batch.indices.push_back(static_cast<std::uint32_t>(uniform_below(batch_engine, card)));
    }
    batch.labels.push_back(uniform01(batch_engine) < 0.5 ? 0 : 1);
  }

  Controller controller(5);
  {
    auto init = rng.stream("accept.logit.init");
    Tensor* logits = controller.params().find("gate_logits");
    for (double& v : logits->value.values()) v = 0.5 * normal01(init);
  }
  const double tau = 0.7;
  auto noise_engine = rng.stream("accept.gumbel");
  GateSample sample = controller.sample_gates(tau, noise_engine);

  // Freeze the dropout masks so the loss is a pure function of parameters.
  auto mask_engine = rng.stream("accept.dropout");
  auto probe = model.forward(batch, sample.keep_prob, true, &mask_engine);
  const std::vector<Matrix> frozen = probe.dropout_masks;

  auto model_loss = [&]() {
    auto record = model.forward(batch, sample.keep_prob, true, nullptr, &frozen);
    return bce_loss(record.predictions, batch.labels).loss;
  };

  model.params().zero_grads();
  auto record = model.forward(batch, sample.keep_prob, true, nullptr, &frozen);
  BceResult loss = bce_loss(record.predictions, batch.labels);
  (void)model.backward(record, loss.dpredictions);

  auto pick = rng.stream("accept.pick");
  GradCheckReport model_report =
      finite_diff_check(model_loss, model.params(), /*coords_per_tensor=*/40, pick, 1e-5);

  std::size_t embed_coords = 0;
  for (const auto& tensor : model.params()) {
    if (tensor.name.rfind("embed.", 0) == 0) {
      embed_coords += std::min<std::size_t>(40, tensor.value.size());
    }
  }
  std::size_t dense_coords = model_report.coords_checked - embed_coords;

  // Controller group: 64 fields -> 128 logit coordinates, all checked. The
  // downstream objective runs through a real (evaluation-mode) model so the
  // chain dloss/dgate -> dgate/dlogit is exercised end to end.
  ModelConfig wide_config;
  wide_config.n_fields = 64;
  wide_config.embedding_dim = 2;
  wide_config.hidden = {4};
  wide_config.dropout_rate = 0.0;
  wide_config.active_fields.resize(64);
  std::iota(wide_config.active_fields.begin(), wide_config.active_fields.end(), 0);
  std::vector<std::uint32_t> wide_cards(64, 3);
  RecModel wide_model(wide_config, wide_cards, rng);
  // Unit-scale embeddings keep every logit gradient far above the finite
  // difference noise floor; the default 0.01 init would drown saturated
  // gates' gradients (~1e-10) in quantization error.
  for (auto& tensor : wide_model.params()) {
    if (tensor.name.rfind("embed.", 0) == 0) {
      for (double& v : tensor.value.values()) v *= 100.0;
    }
  }

  Batch wide_batch;
  wide_batch.tag = SplitTag::validation;
  wide_batch.size = 8;
  wide_batch.n_fields = 64;
  for (std::size_t b = 0; b < wide_batch.size; ++b) {
    for (std::size_t n = 0; n < 64; ++n) {
      wide_batch.indices.push_back(static_cast<std::uint32_t>(uniform_below(batch_engine, 3)));
    }
    wide_batch.labels.push_back(uniform01(batch_engine) < 0.5 ? 0 : 1);
  }

  Controller wide_controller(64);
  {
    auto init = rng.stream("accept.logit.wide");
    Tensor* logits = wide_controller.params().find("gate_logits");
    for (double& v : logits->value.values()) v = 0.4 * normal01(init);
  }
  const double wide_tau = 1.0;
  auto wide_noise = rng.stream("accept.gumbel.wide");
  GateSample wide_sample = wide_controller.sample_gates(wide_tau, wide_noise);

  Tensor* logits = wide_controller.params().find("gate_logits");
  auto controller_loss = [&]() {
    // Recompute gates from the current logits with the frozen noise draws.
    std::vector<double> gates(64);
    for (std::size_t n = 0; n < 64; ++n) {
      double gap = (logits->value(n, 0) + wide_sample.gumbel_keep[n]) -
                   (logits->value(n, 1) + wide_sample.gumbel_drop[n]);
      gates[n] = sigmoid_scalar(gap / wide_tau);
    }
    auto wide_record = wide_model.forward(wide_batch, gates, false, nullptr);
    return bce_loss(wide_record.predictions, wide_batch.labels).loss;
  };

  wide_controller.params().zero_grads();
  auto wide_record = wide_model.forward(wide_batch, wide_sample.keep_prob, false, nullptr);
  BceResult wide_loss = bce_loss(wide_record.predictions, wide_batch.labels);
  std::vector<double> dgates = wide_model.backward(wide_record, wide_loss.dpredictions);
  wide_controller.accumulate_gate_gradients(wide_sample, dgates);

  GradCheckReport controller_report = finite_diff_span(
      controller_loss, {logits->value.data(), logits->value.size()},
      {logits->grad.data(), logits->grad.size()}, logits->value.size(), pick, 1e-5,
      "gate_logits");

  const double elapsed = seconds_since(start);
  const bool pass = model_report.max_rel_error <= kTol &&
                    controller_report.max_rel_error <= kTol && embed_coords >= 100 &&
                    dense_coords >= 100 && controller_report.coords_checked >= 100 &&
                    elapsed < 60.0;
  std::ostringstream details;
  details << "max rel err: weights+embeddings " << fmt(model_report.max_rel_error, 3) << " ("
          << embed_coords << " embed + " << dense_coords << " dense coords), controller "
          << fmt(controller_report.max_rel_error, 3) << " ("
          << controller_report.coords_checked << " coords), tol 1e-4, "
          << fmt(elapsed, 3) << "s";
  return {pass, details.str()};
}

// ---------------------------------------------------------------------------
// Gumbel-Max law: hard keep/drop draws hit P(keep) = alpha within binomial
// 3 sigma over 1e6 draws per alpha.
Criterion check_gumbel_max_law() {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t kDraws = 1000000;
  Rng rng(7);

  bool pass = true;
  std::ostringstream details;
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    Controller controller(1);
    Tensor* logits = controller.params().find("gate_logits");
    logits->value(0, 0) = std::log(alpha);
    logits->value(0, 1) = std::log(1.0 - alpha);

    auto engine = rng.stream("accept.law." + std::to_string(alpha));
    std::size_t keeps = 0;
    for (std::size_t t = 0; t < kDraws; ++t) {
      // At tau = 0.01 the relaxed gate rounds to the hard argmax decision.
      GateSample sample = controller.sample_gates(0.01, engine);
      if (sample.keep_prob[0] > 0.5) ++keeps;
    }
    const double observed = static_cast<double>(keeps) / static_cast<double>(kDraws);
    const double sigma = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(kDraws));
    const double deviation = std::abs(observed - alpha);
    if (deviation > 3.0 * sigma) pass = false;
    details << "a=" << fmt(alpha, 2) << ":" << fmt(observed, 4) << " ("
            << fmt(deviation / sigma, 2) << "s) ";
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 10.0) pass = false;
  details << "| 1e6 draws each, 3-sigma bound, " << fmt(elapsed, 3) << "s";
  return {pass, details.str()};
}

// ---------------------------------------------------------------------------
// Annealing hardness: at the schedule floor tau = 0.01 a decided controller
// (alpha = 0.9) emits near-one-hot gates >= 99% of the time; at tau = 1 with
// alpha = 0.5 the relaxed gate is uniform on (0,1) with mean 0.5 +- 0.01.
Criterion check_annealing_hardness() {
  const std::size_t kDraws = 1000000;
  Rng rng(11);

  // The floor value 0.01 is exactly where the default schedule bottoms out.
  TemperatureSchedule schedule;
  const bool schedule_ok =
      schedule.at(0) == 1.0 && std::abs(schedule.at(19800) - 0.01) < 1e-12 &&
      schedule.at(1000000) == 0.01;

  Controller decided(1);
  {
    Tensor* logits = decided.params().find("gate_logits");
    logits->value(0, 0) = std::log(0.9);
    logits->value(0, 1) = std::log(0.1);
  }
  auto hard_engine = rng.stream("accept.anneal.hard");
  std::size_t hard = 0;
  for (std::size_t t = 0; t < kDraws; ++t) {
    GateSample sample = decided.sample_gates(0.01, hard_engine);
    if (std::max(sample.keep_prob[0], sample.drop_prob[0]) > 0.99) ++hard;
  }
  const double hard_fraction = static_cast<double>(hard) / static_cast<double>(kDraws);

  Controller undecided(1);  // fresh logits: alpha = 0.5
  auto soft_engine = rng.stream("accept.anneal.soft");
  double mean = 0.0;
  std::vector<std::size_t> deciles(10, 0);
  for (std::size_t t = 0; t < kDraws; ++t) {
    double g = undecided.sample_gates(1.0, soft_engine).keep_prob[0];
    mean += g;
    std::size_t bin = std::min<std::size_t>(9, static_cast<std::size_t>(g * 10.0));
    ++deciles[bin];
  }
  mean /= static_cast<double>(kDraws);

  // At tau = 1, alpha = 0.5 the gate is sigma(logistic noise): exactly
  // uniform on (0,1). Every decile should hold ~10%.
  double worst_decile = 0.0;
  for (std::size_t bin = 0; bin < 10; ++bin) {
    double share = static_cast<double>(deciles[bin]) / static_cast<double>(kDraws);
    worst_decile = std::max(worst_decile, std::abs(share - 0.1));
  }

  const bool pass = schedule_ok && hard_fraction >= 0.99 && std::abs(mean - 0.5) <= 0.01 &&
                    worst_decile < 0.005;
  std::ostringstream details;
  details << "tau=0.01 @ alpha=0.9: " << fmt(100.0 * hard_fraction, 4)
          << "% gates one-hot beyond 0.99 (need >=99%); tau=1 @ alpha=0.5: mean "
          << fmt(mean, 4) << " (+-0.01), worst decile off by " << fmt(worst_decile, 2)
          << "; schedule floor reached at t=19800: " << (schedule_ok ? "yes" : "NO");
  return {pass, details.str()};
}

// ---------------------------------------------------------------------------
// Expectation bridge: the Monte Carlo mean of hard-gated embedding vectors
// converges to alpha * e_n within 1% relative L2 error at 1e5 samples.
Criterion check_expectation_bridge() {
  const std::size_t kSamples = 100000;
  Rng rng(13);

  ModelConfig config;
  config.n_fields = 2;
  config.embedding_dim = 16;
  config.hidden = {8};
  config.dropout_rate = 0.0;
  config.active_fields = {0, 1};
  RecModel model(config, {5, 5}, rng);

  Controller controller(2);
  Tensor* logits = controller.params().find("gate_logits");
  logits->value(0, 0) = std::log(0.7);
  logits->value(0, 1) = std::log(0.3);
  logits->value(1, 0) = std::log(0.3);
  logits->value(1, 1) = std::log(0.7);
  const double alphas[2] = {0.7, 0.3};

  bool pass = true;
  std::ostringstream details;
  auto engine = rng.stream("accept.bridge");
  for (std::size_t field = 0; field < 2; ++field) {
    // e_n: a real embedding row from the model's table (scaled up so the
    // comparison is not dominated by denormals).
    const Tensor* table = model.params().find("embed." + std::to_string(field));
    std::vector<double> e(table->value.row(2).begin(), table->value.row(2).end());
    for (double& v : e) v *= 100.0;

    std::vector<double> mean(e.size(), 0.0);
    for (std::size_t t = 0; t < kSamples; ++t) {
      GateSample sample = controller.sample_gates(0.01, engine);
      const double z = sample.keep_prob[field] > 0.5 ? 1.0 : 0.0;  // hard gate
      for (std::size_t d = 0; d < e.size(); ++d) mean[d] += z * e[d];
    }
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t d = 0; d < e.size(); ++d) {
      mean[d] /= static_cast<double>(kSamples);
      const double target = alphas[field] * e[d];
      err += (mean[d] - target) * (mean[d] - target);
      ref += target * target;
    }
    const double rel = std::sqrt(err / ref);
    if (rel > 0.01) pass = false;
    details << "field " << field << " (alpha=" << fmt(alphas[field], 2) << "): rel L2 err "
            << fmt(rel, 3) << " ";
  }
  details << "| 1e5 hard draws vs alpha*e_n, tol 1%";
  return {pass, details.str()};
}

// ---------------------------------------------------------------------------
// Shared planted-search configuration (calibrated for single-core CI: the
// learning rate is raised to 1e-3 so the controller separates within the
// wall-clock budget; every other knob keeps its default shape).
SearchConfig planted_search_config(std::uint64_t seed, std::size_t k) {
  SearchConfig config;
  config.mode = SearchMode::autofield;
  config.k = k;
  config.update_frequency = 1;
  config.max_epochs = 40;
  config.patience = 40;  // fixed budget: no early stop
  config.batch_size = 512;
  config.seed = seed;
  config.weight_optimizer.learning_rate = 1e-3;
  config.controller_optimizer.learning_rate = 1e-3;
  return config;
}

// Planted-feature recovery: 10 fields, 4 informative; the informative set
// must occupy the top-4 keep probabilities in >= 9/10 seeded runs.
Criterion check_planted_recovery() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::size_t> planted{1, 3, 5, 7};

  std::size_t recovered = 0;
  std::ostringstream misses;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticSpec spec;
    spec.n_fields = 10;
    spec.informative = planted;
    spec.cardinalities.assign(10, 8);
    spec.label_noise = 0.1;
    spec.rows = 24000;
    spec.seed = seed;
    SyntheticData synth = generate_synthetic(spec);

    SearchEngine engine(planted_search_config(seed, 4), synth.dataset, synth.splits);
    SearchResult result = engine.run();
    if (result.selected == planted) {
      ++recovered;
    } else {
      misses << " seed " << seed << "->" << join_fields(result.selected);
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass = recovered >= 9 && elapsed < 600.0;
  std::ostringstream details;
  details << recovered << "/10 seeds put fields " << join_fields(planted)
          << " in the top-4 (need >=9)" << misses.str() << "; " << fmt(elapsed, 3) << "s";
  return {pass, details.str()};
}

// ---------------------------------------------------------------------------
// Enumeration dominance: graded 8-field planted data; for each K in
// {4,5,6,7} the searched selection must land in the top 10% of the C(8,K)
// stratum under the same reduced retraining budget.
Criterion check_enumeration_dominance() {
  const auto start = std::chrono::steady_clock::now();

  SyntheticSpec spec;
  spec.n_fields = 8;
  spec.informative = {0, 1, 2, 3, 4, 5, 6};
  spec.strengths = {1.0, 0.85, 0.7, 0.6, 0.5, 0.42, 0.35};  // unique stratum winners
  spec.cardinalities.assign(8, 6);
  spec.label_noise = 0.1;
  spec.rows = 12000;
  spec.seed = 2026;
  SyntheticData synth = generate_synthetic(spec);

  // One shared reduced budget for all 162 subsets and for ranking.
  OracleConfig oracle;
  oracle.seed = 5;
  oracle.k_filter = {4, 5, 6, 7};
  oracle.retrain.fixed_epochs = 3;
  oracle.retrain.max_epochs = 3;
  oracle.retrain.batch_size = 1024;
  oracle.retrain.model.embedding_dim = 8;
  oracle.retrain.model.hidden = {16, 8};
  oracle.retrain.model.dropout_rate = 0.0;
  oracle.retrain.optimizer.learning_rate = 1e-2;
  SubsetReport report = enumerate_subsets(oracle, synth.dataset, synth.splits);

  bool pass = true;
  std::ostringstream details;
  for (std::size_t k : {std::size_t{4}, std::size_t{5}, std::size_t{6}, std::size_t{7}}) {
    SearchEngine engine(planted_search_config(90 + k, k), synth.dataset, synth.splits);
    SearchResult result = engine.run();
    const double percentile = rank_selection(report, result.selected);
    if (percentile > 0.10) pass = false;
    details << "K=" << k << ": " << join_fields(result.selected) << " percentile "
            << fmt(percentile, 3) << " ";
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 3600.0) pass = false;
  details << "| top-10% required in each stratum (162 subsets trained), " << fmt(elapsed, 4)
          << "s";
  return {pass, details.str()};
}

// ---------------------------------------------------------------------------
// Retrain efficiency: halving the field count must strictly reduce training
// wall clock under identical epochs and seed.
Criterion check_retrain_efficiency() {
  SyntheticSpec spec;
  spec.n_fields = 16;
  spec.informative = {0, 1, 2, 3};
  spec.cardinalities.assign(16, 8);
  spec.label_noise = 0.1;
  spec.rows = 8000;
  spec.seed = 3;
  SyntheticData synth = generate_synthetic(spec);

  RetrainConfig config;
  config.fixed_epochs = 3;
  config.max_epochs = 3;
  config.batch_size = 512;
  config.seed = 17;
  config.model.embedding_dim = 16;
  config.model.hidden = {16, 8};
  config.model.dropout_rate = 0.2;

  std::vector<std::size_t> all_fields(16);
  std::iota(all_fields.begin(), all_fields.end(), 0);
  std::vector<std::size_t> half_fields(8);
  std::iota(half_fields.begin(), half_fields.end(), 0);

  // Best of two runs each: strips scheduler noise from the comparison while
  // keeping the measurement honest (same epochs, same seed).
  auto timed = [&](const std::vector<std::size_t>& fields) {
    double best = 1e300;
    double auc = 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
      RetrainOutcome outcome = run_retrain(config, fields, synth.dataset, synth.splits);
      best = std::min(best, outcome.report.train_seconds);
      auc = outcome.report.test_auc;
    }
    return std::pair<double, double>(best, auc);
  };

  auto [full_seconds, full_auc] = timed(all_fields);
  auto [half_seconds, half_auc] = timed(half_fields);

  const bool pass = half_seconds < full_seconds;
  std::ostringstream details;
  details << "K=8 retrain " << fmt(half_seconds, 4) << "s vs K=16 " << fmt(full_seconds, 4)
          << "s (" << fmt(100.0 * (1.0 - half_seconds / full_seconds), 3)
          << "% faster, strict inequality required; both 3 epochs, seed 17; auc "
          << fmt(half_auc, 3) << " vs " << fmt(full_auc, 3) << ")";
  return {pass, details.str()};
}

// ---------------------------------------------------------------------------
// AUC oracle equivalence: rank-based AUC vs quadratic brute force on 1000
// randomized tie-bearing instances, agreement within 1e-12.
Criterion check_auc_equivalence() {
  Rng rng(29);
  auto engine = rng.stream("accept.auc");
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(uniform_below(engine, 400));
    ScoredSet set;
    set.scores.reserve(n);
    set.labels.reserve(n);
    // Coarse score grids guarantee plenty of exact ties, including
    // cross-class ties; grid size varies per instance.
    const std::uint64_t grid = 2 + uniform_below(engine, 12);
    for (std::size_t i = 0; i < n; ++i) {
      set.scores.push_back(static_cast<double>(uniform_below(engine, grid)) /
                           static_cast<double>(grid));
      set.labels.push_back(uniform01(engine) < 0.5 ? 1 : 0);
    }
    set.labels[0] = 1;  // both classes present
    set.labels[n - 1] = 0;
    worst = std::max(worst, std::abs(auc(set) - auc_bruteforce(set)));
    ++checked;
  }
  const bool pass = worst <= 1e-12 && checked == 1000;
  std::ostringstream details;
  details << "1000 tie-bearing instances (2..401 points), worst |fast - brute| = "
          << fmt(worst, 3) << ", tol 1e-12";
  return {pass, details.str()};
}

// ---------------------------------------------------------------------------
// Ablation behavior: (a) threshold extraction (AL-1) keeps every field when
// all fields help and the keep probabilities sit in a near-uniform band just
// above one half; (b) the gumbel search's selected set is stable across
// seeds on planted data, while plain-softmax (AL-2) is merely reported.
Criterion check_ablation_behavior() {
  bool pass = true;
  std::ostringstream details;

  // (a) AL-1 "None dropped": every field informative with equal strength.
  {
    SyntheticSpec spec;
    spec.n_fields = 6;
    spec.informative = {0, 1, 2, 3, 4, 5};
    spec.cardinalities.assign(6, 6);
    spec.label_noise = 0.1;
    spec.rows = 12000;
    spec.seed = 41;
    SyntheticData synth = generate_synthetic(spec);

    SearchConfig config = planted_search_config(4, 1);
    config.mode = SearchMode::al1;
    config.max_epochs = 10;
    config.patience = 10;
    SearchEngine engine(config, synth.dataset, synth.splits);
    SearchResult result = engine.run();

    double lo = 1.0;
    double hi = 0.0;
    for (double a : result.alpha) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    const bool all_selected = result.selected.size() == 6;
    const bool near_uniform = lo > 0.5 && hi < 0.75;
    if (!(all_selected && near_uniform)) pass = false;
    details << "AL-1 on all-informative data: selected " << result.selected.size()
            << "/6 fields, alpha in [" << fmt(lo, 3) << "," << fmt(hi, 3)
            << "] (need all 6, band above 0.5); ";
  }

  // (b) Gumbel-mode stability across 10 search seeds on one fixed dataset.
  {
    SyntheticSpec spec;
    spec.n_fields = 10;
    spec.informative = {1, 3, 5, 7};
    spec.cardinalities.assign(10, 8);
    spec.label_noise = 0.1;
    spec.rows = 24000;
    spec.seed = 424;  // dataset fixed; only the search seed varies
    SyntheticData synth = generate_synthetic(spec);

    std::map<std::string, std::size_t> gumbel_sets;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      SearchEngine engine(planted_search_config(seed, 4), synth.dataset, synth.splits);
      ++gumbel_sets[join_fields(engine.run().selected)];
    }
    std::size_t modal = 0;
    std::string modal_set;
    for (const auto& [set, count] : gumbel_sets) {
      if (count > modal) {
        modal = count;
        modal_set = set;
      }
    }
    if (modal < 8) pass = false;
    details << "gumbel modal set " << modal_set << " in " << modal
            << "/10 seeds (need >=8); ";

    std::set<std::string> plain_sets;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      SearchConfig config = planted_search_config(seed, 4);
      config.mode = SearchMode::al2;
      SearchEngine engine(config, synth.dataset, synth.splits);
      plain_sets.insert(join_fields(engine.run().selected));
    }
    details << "plain-softmax produced " << plain_sets.size()
            << " distinct set(s) over 3 seeds (no stability requirement)";
  }

  return {pass, details.str()};
}

// ---------------------------------------------------------------------------
// Determinism: the CLI pipeline rerun with an identical config and seed
// reproduces selection.json byte for byte.
Criterion check_determinism() {
#ifndef AUTOFIELD_CLI_PATH
  return {false, "AUTOFIELD_CLI_PATH not compiled in"};
#else
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "autofield_accept_determinism";
  std::error_code ec;
  fs::remove_all(root, ec);
  fs::create_directories(root);

  const fs::path config_path = root / "run.ini";
  {
    std::ofstream out(config_path);
    out << "[run]\nseed = 12\nmode = autofield\n"
        << "[synth]\nfields = 6\ninformative = 0,2\ncardinalities = 6\n"
        << "label_noise = 0.1\nrows = 4000\n"
        << "[optimizer]\nlearning_rate = 0.001\n"
        << "[model]\nembedding_dim = 8\nhidden = 12,6\n"
        << "[search]\nk = 2\nbatch_size = 256\nmax_epochs = 4\npatience = 4\n"
        << "[retrain]\nbatch_size = 256\nmax_epochs = 3\nfixed_epochs = 3\n";
  }

  auto run_once = [&](const std::string& out_dir) {
    std::string command = std::string(AUTOFIELD_CLI_PATH) + " pipeline --config " +
                          config_path.string() + " --out " + out_dir + " > /dev/null 2>&1";
    return std::system(command.c_str());
  };

  const std::string dir_a = (root / "a").string();
  const std::string dir_b = (root / "b").string();
  const int rc_a = run_once(dir_a);
  const int rc_b = run_once(dir_b);

  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  const std::string selection_a = slurp(dir_a + "/selection.json");
  const std::string selection_b = slurp(dir_b + "/selection.json");
  const std::string trace_a = slurp(dir_a + "/trace.jsonl");
  const std::string trace_b = slurp(dir_b + "/trace.jsonl");

  const bool pass = rc_a == 0 && rc_b == 0 && !selection_a.empty() &&
                    selection_a == selection_b;
  std::ostringstream details;
  details << "two pipeline runs, selection.json " << selection_a.size() << " bytes, "
          << (selection_a == selection_b && !selection_a.empty() ? "byte-identical"
                                                                 : "DIFFERENT")
          << "; trace.jsonl " << (trace_a == trace_b ? "also identical" : "differs (timing)")
          << "; exit codes " << rc_a << "/" << rc_b;
  fs::remove_all(root, ec);
  return {pass, details.str()};
#endif
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Criterion()>>> criteria{
      {"gradient_fidelity", check_gradient_fidelity},
      {"gumbel_max_law", check_gumbel_max_law},
      {"annealing_hardness", check_annealing_hardness},
      {"expectation_bridge", check_expectation_bridge},
      {"planted_recovery", check_planted_recovery},
      {"enumeration_dominance", check_enumeration_dominance},
      {"retrain_efficiency", check_retrain_efficiency},
      {"auc_equivalence", check_auc_equivalence},
      {"ablation_behavior", check_ablation_behavior},
      {"determinism", check_determinism},
  };

  std::vector<std::string> requested;
  for (int i = 1; i < argc; ++i) requested.emplace_back(argv[i]);
  if (requested.empty() || (requested.size() == 1 && requested[0] == "all")) {
    requested.clear();
    for (const auto& [name, fn] : criteria) requested.push_back(name);
  }

  bool all_pass = true;
  for (const std::string& name : requested) {
    auto it = std::find_if(criteria.begin(), criteria.end(),
                           [&](const auto& entry) { return entry.first == name; });
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion '%s'\n", name.c_str());
      return 2;
    }
    Criterion result;
    try {
      result = it->second();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", result.pass ? "PASS" : "FAIL", name.c_str(),
                result.details.c_str());
    std::fflush(stdout);
    if (!result.pass) all_pass = false;
  }
  return all_pass ? 0 : 1;
}
