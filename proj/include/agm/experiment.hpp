#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "agm/baselines.hpp"
#include "agm/dataset.hpp"
#include "agm/learner.hpp"
#include "agm/predictors.hpp"
#include "agm/synthetic.hpp"

namespace agm {

/// Invalid experiment configuration or command-line settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One loss metric as written in the config: a loss spec string ("absolute",
/// "zero_one:weighted", ...) and, for cost_sensitive, an optional explicit
/// matrix. Without a matrix, cost_sensitive uses the seeded random ordinal cost.
struct LossEntry {
  std::string spec = "zero_one";
  std::optional<Matrix> matrix;
};

/// How AGM turns potentials into predictions.
enum class AgmDecoder { kMap, kProbabilistic };

/// Model columns of a report. kGold predicts the gold labels (a sanity column).
enum class ReportModel { kAgm, kCrf, kSsvm, kGold };

std::string to_string(ReportModel m);
ReportModel parse_report_model(const std::string& name);

struct ExperimentConfig {
  std::vector<LossEntry> losses{LossEntry{}};
  std::vector<ReportModel> models{ReportModel::kAgm, ReportModel::kCrf, ReportModel::kSsvm};
  TrainConfig agm;
  CrfConfig crf;
  SsvmConfig ssvm;
  AgmDecoder agm_decoder = AgmDecoder::kMap;
  ProbabilisticConfig probabilistic;
  double train_fraction = 0.7;
  int splits = 5;
  /// Regularization grid searched by cross-validation; empty keeps each
  /// model's configured lambda.
  std::vector<double> lambda_grid;
  int folds = 3;
  double alpha = 0.05;
  std::uint64_t seed = 1;
};

/// Parses the JSON experiment config. Unknown keys are errors. Throws ConfigError.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Resolves a loss entry against the dataset's label count. Throws ConfigError.
LossSpec resolve_loss(const LossEntry& entry, int k, std::uint64_t seed);

struct Split {
  std::vector<int> train;  // ascending instance indices
  std::vector<int> test;   // ascending, disjoint from train
};

/// `count` seeded random splits with round(train_fraction * n) training
/// instances, clamped so both sides are nonempty.
std::vector<Split> make_splits(int n, double train_fraction, int count, std::uint64_t seed);

/// Contiguous folds of a seeded permutation of `indices`.
std::vector<Split> make_folds(const std::vector<int>& indices, int folds, std::uint64_t seed);

/// A trained model for one report column.
struct TrainedModel {
  ReportModel kind = ReportModel::kAgm;
  LossSpec loss;
  ModelParams params;
  bool converged = true;
};

TrainedModel train_model(ReportModel kind, const Dataset& train, const LossSpec& loss,
                         const ExperimentConfig& cfg, double lambda, std::uint64_t seed);

/// Per-node average loss of the model's decision on one instance. A
/// probabilistic AGM decoder is scored by its expected loss.
double instance_loss(const TrainedModel& model, const Instance& inst, const FeatureTemplate& tpl,
                     const ExperimentConfig& cfg);

/// Labels predicted for an instance (mode of p for the probabilistic decoder).
Prediction predict(const TrainedModel& model, const Instance& inst, const FeatureTemplate& tpl,
                   const ExperimentConfig& cfg);

/// The configured lambda of a model kind (kGold has none and returns 0).
double configured_lambda(ReportModel kind, const ExperimentConfig& cfg);

struct CrossValidation {
  std::vector<double> lambdas;
  std::vector<double> mean_loss;  // mean validation loss per lambda
  double best_lambda = 0.0;
};

/// k-fold cross-validation of lambda over cfg.lambda_grid on data[indices];
/// the smallest mean loss wins, earlier grid entries on ties.
CrossValidation cross_validate(ReportModel kind, const Dataset& data, const std::vector<int>& indices,
                               const LossSpec& loss, const ExperimentConfig& cfg,
                               std::uint64_t seed);

struct WilcoxonResult {
  int n = 0;               // nonzero paired differences
  double w_plus = 0.0;     // rank sum of positive differences
  double p_value = 1.0;    // two-sided
};

/// Wilcoxon signed-rank test of paired samples. Zero differences are dropped,
/// tied magnitudes get average ranks. Exact null distribution up to 25 pairs,
/// normal approximation with tie and continuity corrections beyond.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

struct InstanceLog {
  int split = 0;
  int metric = 0;
  int model = 0;
  int instance = 0;
  double loss = 0.0;
};

struct Comparison {
  int metric = 0;
  int model_a = 0;
  int model_b = 0;
  WilcoxonResult test;
};

struct ExperimentReport {
  std::vector<std::string> metric_names;
  std::vector<std::string> model_names;
  /// split_mean[metric][model][split]
  std::vector<std::vector<std::vector<double>>> split_mean;
  /// mean[metric][model]: average of split means
  std::vector<std::vector<double>> mean;
  /// lambda[metric][model][split] used for training
  std::vector<std::vector<std::vector<double>>> lambda;
  /// Bayes risk per metric when a generator description is supplied.
  std::optional<std::vector<double>> bayes_risk;
  std::vector<Comparison> comparisons;
  std::vector<InstanceLog> logs;
  double alpha = 0.05;
  int splits = 0;
  /// Number of trained models whose training reported non-convergence.
  int non_converged = 0;
};

/// For every split, metric and model: train (cross-validating lambda when a
/// grid is configured), decode the test part and record per-instance losses.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& data,
                                const GeneratorModel* generator = nullptr);

/// Aligned text table (rows = metrics, columns = models) with significance lines.
std::string format_report_text(const ExperimentReport& report);
/// Comma-separated rows: kind,metric,model,split,instance,value.
std::string format_report_csv(const ExperimentReport& report);

}  // namespace agm
