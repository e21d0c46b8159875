// Command-line front end: synth, train, predict, eval, xval, report.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 non-convergence, 1 anything else.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "agm/experiment.hpp"

namespace {

using namespace agm;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;

struct Options {
  std::uint64_t seed = 1;
  std::string config_path;
  std::string data_path;
  std::string model_path;
  std::string out_path;
  std::string csv_path;
  std::string report_path;
  std::string generator_path;
  std::string model_kind = "agm";
  std::vector<std::string> losses;
  std::string decoder = "map";
  std::vector<double> lambdas;
  double lambda = -1.0;
  int epochs = 0;
  int folds = 0;
  GeneratorConfig gen;
};

ExperimentConfig base_config(const Options& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = load_experiment_config(o.config_path);
  cfg.seed = o.seed;
  if (o.decoder == "map") {
    cfg.agm_decoder = AgmDecoder::kMap;
  } else if (o.decoder == "probabilistic") {
    cfg.agm_decoder = AgmDecoder::kProbabilistic;
  } else {
    throw ConfigError("--decoder must be 'map' or 'probabilistic'");
  }
  if (!o.losses.empty()) {
    cfg.losses.clear();
    for (const std::string& l : o.losses) cfg.losses.push_back(LossEntry{l, std::nullopt});
  }
  if (o.lambda >= 0.0) cfg.agm.lambda = cfg.crf.lambda = cfg.ssvm.lambda = o.lambda;
  if (o.epochs > 0) cfg.agm.epochs = cfg.ssvm.epochs = o.epochs;
  if (!o.lambdas.empty()) cfg.lambda_grid = o.lambdas;
  if (o.folds > 0) cfg.folds = o.folds;
  return cfg;
}

/// Writes to the file, or to stdout when path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

ReportModel report_model(ModelKind k) {
  switch (k) {
    case ModelKind::kAgm: return ReportModel::kAgm;
    case ModelKind::kCrf: return ReportModel::kCrf;
    case ModelKind::kSsvm: return ReportModel::kSsvm;
  }
  return ReportModel::kAgm;
}

void check_model_matches(const ModelFile& m, const Dataset& data) {
  if (!(m.tpl == data.feature_template())) {
    throw DataError("model template (k=" + std::to_string(m.tpl.k) + " d=" + std::to_string(m.tpl.d) +
                    " de=" + std::to_string(m.tpl.d_e) + ") does not match the dataset");
  }
}

int run_synth(const Options& o) {
  GeneratorConfig g = o.gen;
  g.seed = o.seed;
  if (o.out_path.empty()) throw ConfigError("synth needs --out");
  GeneratedData gen;
  try {
    gen = generate_synthetic(g);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  save_dataset(o.out_path, gen.data);
  emit(o.out_path + ".gen.json", generator_to_json(g, gen.model));
  std::cout << "wrote " << gen.data.instances.size() << " instances (k=" << g.k << ", d=" << g.d
            << ") to " << o.out_path << "\n";
  return 0;
}

int run_train(const Options& o) {
  if (o.data_path.empty() || o.out_path.empty()) throw ConfigError("train needs --data and --out");
  const ExperimentConfig cfg = base_config(o);
  ModelKind kind;
  try {
    kind = parse_model_kind(o.model_kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const Dataset data = load_dataset(o.data_path);
  if (data.instances.empty()) throw DataError("dataset '" + o.data_path + "' has no instances");
  const LossSpec loss = resolve_loss(cfg.losses.front(), data.k, o.seed);
  const FeatureTemplate tpl = data.feature_template();

  ModelFile model;
  model.kind = kind;
  model.tpl = tpl;
  model.loss = loss;
  std::ostringstream rep;
  rep << "model " << to_string(kind) << "  loss " << loss.name() << "  instances "
      << data.instances.size() << "\n";
  switch (kind) {
    case ModelKind::kAgm: {
      TrainConfig tc = cfg.agm;
      tc.seed = o.seed;
      TrainReport tr;
      model.params = train_agm(data.instances, loss, tpl, tc, &tr);
      rep << "lambda " << format_double(tc.lambda) << "  epochs " << tc.epochs << "  updates "
          << tr.updates << "\n";
      for (std::size_t e = 0; e < tr.epoch_objective.size(); ++e) {
        rep << "epoch " << e + 1 << " objective " << format_double(tr.epoch_objective[e]) << "\n";
      }
      rep << "moment violation node " << format_double(tr.node_violation) << " edge "
          << format_double(tr.edge_violation) << "\n";
      rep << "inner solves " << tr.inner_solves << " failures " << tr.inner_failures
          << " exact fallbacks " << tr.exact_fallbacks << "\n";
      rep << "converged " << (tr.converged ? "yes" : "no") << "\n";
      break;
    }
    case ModelKind::kCrf: {
      const CrfModel crf = train_crf(data.instances, tpl, cfg.crf);
      model.params = crf.params;
      rep << "lambda " << format_double(cfg.crf.lambda) << "  iterations " << crf.iterations << "\n"
          << "objective " << format_double(crf.objective) << "  gradient norm "
          << format_double(crf.grad_norm) << "\n"
          << "converged " << (crf.converged ? "yes" : "no") << "\n";
      break;
    }
    case ModelKind::kSsvm: {
      SsvmConfig sc = cfg.ssvm;
      sc.seed = o.seed;
      const SsvmModel ssvm = train_ssvm(data.instances, loss, tpl, sc);
      model.params = ssvm.params;
      rep << "lambda " << format_double(sc.lambda) << "  updates " << ssvm.updates << "\n"
          << "mean hinge " << format_double(ssvm.mean_hinge) << "\n";
      break;
    }
  }
  save_model(o.out_path, model);
  emit(o.report_path, rep.str());
  return 0;
}

TrainedModel as_trained(const ModelFile& m) {
  TrainedModel t;
  t.kind = report_model(m.kind);
  t.loss = m.loss;
  t.params = m.params;
  return t;
}

int run_predict(const Options& o) {
  if (o.data_path.empty() || o.model_path.empty()) throw ConfigError("predict needs --model and --data");
  const ExperimentConfig cfg = base_config(o);
  const ModelFile m = load_model(o.model_path);
  const Dataset data = load_dataset(o.data_path);
  check_model_matches(m, data);
  const TrainedModel model = as_trained(m);
  const bool probabilistic = m.kind == ModelKind::kAgm && cfg.agm_decoder == AgmDecoder::kProbabilistic;
  std::ostringstream os;
  for (const Instance& inst : data.instances) {
    const Prediction p = predict(model, inst, m.tpl, cfg);
    if (probabilistic) {
      for (int i = 1; i <= inst.size(); ++i) {
        os << (i > 1 ? " " : "");
        for (Eigen::Index a = 0; a < p.distributions[i].size(); ++a) {
          os << (a ? "," : "") << format_double(p.distributions[i](a));
        }
      }
    } else {
      for (std::size_t i = 0; i < p.labels.size(); ++i) os << (i ? " " : "") << p.labels[i];
    }
    os << "\n";
  }
  emit(o.out_path, os.str());
  return 0;
}

int run_eval(const Options& o) {
  if (o.data_path.empty() || o.model_path.empty()) throw ConfigError("eval needs --model and --data");
  ExperimentConfig cfg = base_config(o);
  const ModelFile m = load_model(o.model_path);
  const Dataset data = load_dataset(o.data_path);
  check_model_matches(m, data);
  if (data.instances.empty()) throw DataError("dataset '" + o.data_path + "' has no instances");
  for (const Instance& inst : data.instances)
    if (!inst.labeled()) throw DataError("eval needs a labeled dataset");
  std::vector<LossSpec> metrics;
  if (o.losses.empty()) {
    metrics.push_back(m.loss);
  } else {
    for (const LossEntry& e : cfg.losses) metrics.push_back(resolve_loss(e, data.k, o.seed));
  }
  TrainedModel model = as_trained(m);
  std::ostringstream os;
  os << "model " << to_string(m.kind) << "  trained on " << m.loss.name() << "  instances "
     << data.instances.size() << "\n";
  for (const LossSpec& metric : metrics) {
    // CRF decisions and the loss being scored follow the metric.
    model.loss = metric;
    double sum = 0.0;
    for (const Instance& inst : data.instances) sum += instance_loss(model, inst, m.tpl, cfg);
    os << metric.name() << " " << format_double(sum / data.instances.size()) << "\n";
  }
  emit(o.out_path, os.str());
  return 0;
}

int run_xval(const Options& o) {
  if (o.data_path.empty()) throw ConfigError("xval needs --data");
  const ExperimentConfig cfg = base_config(o);
  if (cfg.lambda_grid.empty()) throw ConfigError("xval needs a lambda grid (--lambdas or xval.lambdas)");
  ReportModel kind;
  kind = parse_report_model(o.model_kind);
  if (kind == ReportModel::kGold) throw ConfigError("the gold column has nothing to cross-validate");
  const Dataset data = load_dataset(o.data_path);
  for (const Instance& inst : data.instances)
    if (!inst.labeled()) throw DataError("xval needs a labeled dataset");
  std::vector<int> all(data.instances.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  std::ostringstream os;
  os << "model " << to_string(kind) << "  folds " << cfg.folds << "\n";
  for (std::size_t m = 0; m < cfg.losses.size(); ++m) {
    const LossSpec loss = resolve_loss(cfg.losses[m], data.k, o.seed);
    const CrossValidation cv = cross_validate(kind, data, all, loss, cfg, o.seed);
    os << loss.name() << "\n";
    for (std::size_t l = 0; l < cv.lambdas.size(); ++l) {
      os << "  lambda " << format_double(cv.lambdas[l]) << "  mean loss " << format_double(cv.mean_loss[l])
         << (cv.lambdas[l] == cv.best_lambda ? "  *" : "") << "\n";
    }
    os << "  best lambda " << format_double(cv.best_lambda) << "\n";
  }
  emit(o.out_path, os.str());
  return 0;
}

int run_report(const Options& o) {
  if (o.data_path.empty()) throw ConfigError("report needs --data");
  const ExperimentConfig cfg = base_config(o);
  const Dataset data = load_dataset(o.data_path);
  std::optional<GeneratorModel> gen;
  if (!o.generator_path.empty()) {
    std::ifstream in(o.generator_path);
    if (!in) throw DataError("cannot open generator description '" + o.generator_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    gen = generator_from_json(ss.str());
    if (gen->k != data.k || gen->d != data.d) throw DataError("generator does not match the dataset");
  }
  const ExperimentReport rep = run_experiment(cfg, data, gen ? &*gen : nullptr);
  emit(o.out_path, format_report_text(rep));
  if (!o.csv_path.empty()) emit(o.csv_path, format_report_csv(rep));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial graphical models for structured prediction on trees"};
  app.require_subcommand(1);
  // Lets --seed follow the subcommand as well.
  app.fallthrough();
  Options o;
  app.add_option("--seed", o.seed, "Seed for every random choice")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic ordinal-chain dataset");
  synth->add_option("--out", o.out_path, "Dataset path; the generator goes to <out>.gen.json")->required();
  synth->add_option("--instances", o.gen.instances)->capture_default_str();
  synth->add_option("--min-length", o.gen.min_length)->capture_default_str();
  synth->add_option("--max-length", o.gen.max_length)->capture_default_str();
  synth->add_option("--k", o.gen.k, "Label count")->capture_default_str();
  synth->add_option("--d", o.gen.d, "Node input dimension")->capture_default_str();
  synth->add_option("--stay", o.gen.stay, "Probability of keeping the hidden level")->capture_default_str();
  synth->add_option("--sigma", o.gen.sigma, "Emission noise")->capture_default_str();
  synth->add_option("--noise", o.gen.noise, "Label flip probability")->capture_default_str();

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "JSON experiment config");
    cmd->add_option("--data", o.data_path, "Dataset file");
    cmd->add_option("--out", o.out_path, "Output file (stdout when omitted)");
    cmd->add_option("--loss", o.losses, "Loss spec, e.g. zero_one, absolute:weighted (repeatable)");
    cmd->add_option("--decoder", o.decoder, "AGM decoder: map or probabilistic")->capture_default_str();
    cmd->add_option("--lambda", o.lambda, "Regularization weight for every model");
    cmd->add_option("--epochs", o.epochs, "Training epochs for AGM and SSVM");
  };
  auto* train = app.add_subcommand("train", "Train a model and write a model file");
  add_common(train);
  train->add_option("--model-kind", o.model_kind, "agm, crf or ssvm")->capture_default_str();
  train->add_option("--report", o.report_path, "Training report file (stdout when omitted)");
  auto* pred = app.add_subcommand("predict", "Decode a dataset with a model file");
  add_common(pred);
  pred->add_option("--model", o.model_path, "Model file")->required();
  auto* eval = app.add_subcommand("eval", "Average loss of a model on a labeled dataset");
  add_common(eval);
  eval->add_option("--model", o.model_path, "Model file")->required();
  auto* xval = app.add_subcommand("xval", "Cross-validate lambda");
  add_common(xval);
  xval->add_option("--model-kind", o.model_kind, "agm, crf or ssvm")->capture_default_str();
  xval->add_option("--lambdas", o.lambdas, "Lambda grid");
  xval->add_option("--folds", o.folds, "Fold count");
  auto* report = app.add_subcommand("report", "Split-averaged comparison table of all models");
  add_common(report);
  report->add_option("--csv", o.csv_path, "Machine-readable output");
  report->add_option("--generator", o.generator_path, "Generator description for a Bayes-risk column");
  report->add_option("--lambdas", o.lambdas, "Lambda grid for per-split cross-validation");
  report->add_option("--folds", o.folds, "Fold count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (synth->parsed()) return run_synth(o);
    if (train->parsed()) return run_train(o);
    if (pred->parsed()) return run_predict(o);
    if (eval->parsed()) return run_eval(o);
    if (xval->parsed()) return run_xval(o);
    if (report->parsed()) return run_report(o);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const LossError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DimensionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const StructureError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
