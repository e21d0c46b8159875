#include "agm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace agm {

namespace {

using nlohmann::json;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  // splitmix64 finalizer over a running combination.
  std::uint64_t z = seed;
  for (std::uint64_t v : {a, b, c}) {
    z += 0x9e3779b97f4a7c15ULL + v;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
  }
  return z;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_solver(const json& j, SolverConfig& s) {
  check_keys(j, "agm.solver",
             {"gap_tol", "max_iters", "step0", "step_rule", "primal_every", "epsilon",
              "exact_transport", "exact_fallback_max_vars", "node_method"});
  read(j, "gap_tol", s.gap_tol);
  read(j, "max_iters", s.max_iters);
  read(j, "step0", s.step0);
  read(j, "primal_every", s.primal_every);
  read(j, "epsilon", s.transport.epsilon);
  read(j, "exact_transport", s.transport.exact);
  read(j, "exact_fallback_max_vars", s.exact_fallback_max_vars);
  if (j.contains("step_rule")) {
    const std::string r = j.at("step_rule").get<std::string>();
    if (r == "polyak") {
      s.step_rule = StepRule::kPolyak;
    } else if (r == "inv_sqrt") {
      s.step_rule = StepRule::kInvSqrt;
    } else {
      throw ConfigError("agm.solver.step_rule must be 'polyak' or 'inv_sqrt'");
    }
  }
  if (j.contains("node_method")) {
    const std::string m = j.at("node_method").get<std::string>();
    if (m == "auto") {
      s.node_method = NodeGameMethod::kAuto;
    } else if (m == "enumerate") {
      s.node_method = NodeGameMethod::kEnumerate;
    } else {
      throw ConfigError("agm.solver.node_method must be 'auto' or 'enumerate'");
    }
  }
  if (s.max_iters < 1 || s.gap_tol < 0.0 || s.step0 <= 0.0) {
    throw ConfigError("agm.solver needs max_iters >= 1, gap_tol >= 0, step0 > 0");
  }
}

void validate(const ExperimentConfig& c) {
  if (c.losses.empty()) throw ConfigError("at least one loss metric is required");
  if (c.models.empty()) throw ConfigError("at least one model is required");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
    throw ConfigError("split.train_fraction must lie in (0, 1)");
  }
  if (c.splits < 1) throw ConfigError("split.splits must be at least 1");
  if (c.agm.lambda < 0.0 || c.crf.lambda < 0.0 || c.ssvm.lambda < 0.0) {
    throw ConfigError("lambda must be nonnegative");
  }
  if (c.agm.epochs < 1 || c.ssvm.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (c.agm.batch_size < 1) throw ConfigError("agm.batch_size must be at least 1");
  if (c.agm.step0 <= 0.0 || c.ssvm.step0 <= 0.0) throw ConfigError("step0 must be positive");
  for (double l : c.lambda_grid)
    if (!(l >= 0.0)) throw ConfigError("xval.lambdas must be nonnegative");
  if (!c.lambda_grid.empty() && c.folds < 2) throw ConfigError("xval.folds must be at least 2");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

}  // namespace

std::string to_string(ReportModel m) {
  switch (m) {
    case ReportModel::kAgm: return "agm";
    case ReportModel::kCrf: return "crf";
    case ReportModel::kSsvm: return "ssvm";
    case ReportModel::kGold: return "gold";
  }
  return "?";
}

ReportModel parse_report_model(const std::string& name) {
  if (name == "agm") return ReportModel::kAgm;
  if (name == "crf") return ReportModel::kCrf;
  if (name == "ssvm") return ReportModel::kSsvm;
  if (name == "gold") return ReportModel::kGold;
  throw ConfigError("unknown model '" + name + "' (agm, crf, ssvm, gold)");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(text);
    check_keys(j, "config", {"losses", "models", "agm", "crf", "ssvm", "probabilistic", "split",
                             "xval", "alpha", "seed"});
    if (j.contains("losses")) {
      c.losses.clear();
      for (const json& e : j.at("losses")) {
        LossEntry entry;
        if (e.is_string()) {
          entry.spec = e.get<std::string>();
        } else {
          check_keys(e, "losses[]", {"spec", "matrix"});
          entry.spec = e.at("spec").get<std::string>();
          if (e.contains("matrix")) {
            const auto rows = e.at("matrix").get<std::vector<std::vector<double>>>();
            Matrix m(rows.size(), rows.size());
            for (std::size_t a = 0; a < rows.size(); ++a) {
              if (rows[a].size() != rows.size()) throw ConfigError("loss matrix must be square");
              for (std::size_t b = 0; b < rows.size(); ++b) m(a, b) = rows[a][b];
            }
            entry.matrix = m;
          }
        }
        c.losses.push_back(entry);
      }
    }
    if (j.contains("models")) {
      c.models.clear();
      for (const json& m : j.at("models")) c.models.push_back(parse_report_model(m.get<std::string>()));
    }
    if (j.contains("agm")) {
      const json& a = j.at("agm");
      check_keys(a, "agm", {"lambda", "epochs", "batch_size", "step0", "step_decay",
                            "tail_fraction", "decoder", "solver"});
      read(a, "lambda", c.agm.lambda);
      read(a, "epochs", c.agm.epochs);
      read(a, "batch_size", c.agm.batch_size);
      read(a, "step0", c.agm.step0);
      read(a, "step_decay", c.agm.step_decay);
      read(a, "tail_fraction", c.agm.tail_fraction);
      if (a.contains("decoder")) {
        const std::string d = a.at("decoder").get<std::string>();
        if (d == "map") {
          c.agm_decoder = AgmDecoder::kMap;
        } else if (d == "probabilistic") {
          c.agm_decoder = AgmDecoder::kProbabilistic;
        } else {
          throw ConfigError("agm.decoder must be 'map' or 'probabilistic'");
        }
      }
      if (a.contains("solver")) read_solver(a.at("solver"), c.agm.inner);
    }
    if (j.contains("probabilistic")) {
      const json& p = j.at("probabilistic");
      check_keys(p, "probabilistic", {"tol", "max_iters", "step0", "check_every"});
      read(p, "tol", c.probabilistic.tol);
      read(p, "max_iters", c.probabilistic.max_iters);
      read(p, "step0", c.probabilistic.step0);
      read(p, "check_every", c.probabilistic.check_every);
    }
    if (j.contains("crf")) {
      const json& r = j.at("crf");
      check_keys(r, "crf", {"lambda", "max_iters", "grad_tol"});
      read(r, "lambda", c.crf.lambda);
      read(r, "max_iters", c.crf.max_iters);
      read(r, "grad_tol", c.crf.grad_tol);
    }
    if (j.contains("ssvm")) {
      const json& s = j.at("ssvm");
      check_keys(s, "ssvm", {"lambda", "epochs", "step0", "step_decay", "tail_fraction"});
      read(s, "lambda", c.ssvm.lambda);
      read(s, "epochs", c.ssvm.epochs);
      read(s, "step0", c.ssvm.step0);
      read(s, "step_decay", c.ssvm.step_decay);
      read(s, "tail_fraction", c.ssvm.tail_fraction);
    }
    if (j.contains("split")) {
      const json& s = j.at("split");
      check_keys(s, "split", {"train_fraction", "splits"});
      read(s, "train_fraction", c.train_fraction);
      read(s, "splits", c.splits);
    }
    if (j.contains("xval")) {
      const json& x = j.at("xval");
      check_keys(x, "xval", {"lambdas", "folds"});
      read(x, "lambdas", c.lambda_grid);
      read(x, "folds", c.folds);
    }
    read(j, "alpha", c.alpha);
    read(j, "seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

LossSpec resolve_loss(const LossEntry& entry, int k, std::uint64_t seed) {
  LossSpec spec;
  try {
    spec = parse_loss_spec(entry.spec, k);
    if (spec.k != k) throw ConfigError("loss '" + entry.spec + "' has k != dataset k");
    if (entry.matrix) {
      if (spec.kind != LossKind::kCostSensitive) throw ConfigError("only cost_sensitive takes a matrix");
      spec.custom = *entry.matrix;
    }
    if (spec.kind == LossKind::kCostSensitive && !spec.custom) {
      spec.custom = random_ordinal_cost(k, seed);
    }
    // Surface table errors now rather than mid-experiment.
    make_losses(spec, 1);
  } catch (const LossError& e) {
    throw ConfigError(std::string("loss '") + entry.spec + "': " + e.what());
  }
  return spec;
}

std::vector<Split> make_splits(int n, double train_fraction, int count, std::uint64_t seed) {
  if (n < 2) throw ConfigError("splitting needs at least two instances");
  const int n_train = std::clamp(static_cast<int>(std::lround(train_fraction * n)), 1, n - 1);
  std::vector<Split> out;
  for (int s = 0; s < count; ++s) {
    Rng rng(mix_seed(seed, 1, static_cast<std::uint64_t>(s)));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Split sp;
    sp.train.assign(perm.begin(), perm.begin() + n_train);
    sp.test.assign(perm.begin() + n_train, perm.end());
    std::sort(sp.train.begin(), sp.train.end());
    std::sort(sp.test.begin(), sp.test.end());
    out.push_back(std::move(sp));
  }
  return out;
}

std::vector<Split> make_folds(const std::vector<int>& indices, int folds, std::uint64_t seed) {
  const int n = static_cast<int>(indices.size());
  if (folds < 2 || folds > n) throw ConfigError("cross-validation needs 2 <= folds <= training size");
  std::vector<int> perm = indices;
  Rng rng(mix_seed(seed, 2));
  rng.shuffle(perm);
  std::vector<Split> out(folds);
  for (int f = 0; f < folds; ++f) {
    const int lo = f * n / folds, hi = (f + 1) * n / folds;
    for (int i = 0; i < n; ++i) (i >= lo && i < hi ? out[f].test : out[f].train).push_back(perm[i]);
    std::sort(out[f].train.begin(), out[f].train.end());
    std::sort(out[f].test.begin(), out[f].test.end());
  }
  return out;
}

double configured_lambda(ReportModel kind, const ExperimentConfig& cfg) {
  switch (kind) {
    case ReportModel::kAgm: return cfg.agm.lambda;
    case ReportModel::kCrf: return cfg.crf.lambda;
    case ReportModel::kSsvm: return cfg.ssvm.lambda;
    case ReportModel::kGold: return 0.0;
  }
  return 0.0;
}

TrainedModel train_model(ReportModel kind, const Dataset& train, const LossSpec& loss,
                         const ExperimentConfig& cfg, double lambda, std::uint64_t seed) {
  const FeatureTemplate tpl = train.feature_template();
  TrainedModel m;
  m.kind = kind;
  m.loss = loss;
  switch (kind) {
    case ReportModel::kAgm: {
      TrainConfig tc = cfg.agm;
      tc.lambda = lambda;
      tc.seed = seed;
      TrainReport rep;
      m.params = train_agm(train.instances, loss, tpl, tc, &rep);
      m.converged = rep.converged;
      break;
    }
    case ReportModel::kCrf: {
      CrfConfig cc = cfg.crf;
      cc.lambda = lambda;
      CrfModel crf = train_crf(train.instances, tpl, cc);
      m.params = crf.params;
      m.converged = crf.converged;
      break;
    }
    case ReportModel::kSsvm: {
      SsvmConfig sc = cfg.ssvm;
      sc.lambda = lambda;
      sc.seed = seed;
      m.params = train_ssvm(train.instances, loss, tpl, sc).params;
      break;
    }
    case ReportModel::kGold:
      m.params = ModelParams::zeros(tpl);
      break;
  }
  return m;
}

Prediction predict(const TrainedModel& model, const Instance& inst, const FeatureTemplate& tpl,
                   const ExperimentConfig& cfg) {
  switch (model.kind) {
    case ReportModel::kAgm:
      if (cfg.agm_decoder == AgmDecoder::kProbabilistic) {
        Prediction p = predict_probabilistic(model.params, inst, make_losses(model.loss, inst.size()),
                                             tpl, cfg.probabilistic);
        p.labels = mode_labels(p.distributions);
        return p;
      }
      return predict_map(model.params, inst, tpl);
    case ReportModel::kCrf:
      return crf_bayes_decode(model.params, inst, model.loss, tpl);
    case ReportModel::kSsvm:
      return predict_map(model.params, inst, tpl);
    case ReportModel::kGold: {
      Prediction p;
      p.labels = inst.y;
      return p;
    }
  }
  return {};
}

double instance_loss(const TrainedModel& model, const Instance& inst, const FeatureTemplate& tpl,
                     const ExperimentConfig& cfg) {
  const Prediction p = predict(model, inst, tpl, cfg);
  if (model.kind == ReportModel::kAgm && cfg.agm_decoder == AgmDecoder::kProbabilistic) {
    const std::vector<LossMatrix> losses = make_losses(model.loss, inst.size());
    double sum = 0.0;
    for (int i = 1; i <= inst.size(); ++i) {
      sum += losses[i].matrix().col(inst.y[i - 1] - 1).dot(p.distributions[i]);
    }
    return sum / inst.size();
  }
  return evaluate_loss(model.loss, p.labels, inst.y);
}

CrossValidation cross_validate(ReportModel kind, const Dataset& data, const std::vector<int>& indices,
                               const LossSpec& loss, const ExperimentConfig& cfg,
                               std::uint64_t seed) {
  CrossValidation cv;
  cv.lambdas = cfg.lambda_grid;
  if (cv.lambdas.empty()) cv.lambdas.push_back(configured_lambda(kind, cfg));
  const std::vector<Split> folds = make_folds(indices, std::max(2, cfg.folds), seed);
  const FeatureTemplate tpl = data.feature_template();
  for (std::size_t l = 0; l < cv.lambdas.size(); ++l) {
    double total = 0.0;
    int count = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const TrainedModel m = train_model(kind, subset(data, folds[f].train), loss, cfg, cv.lambdas[l],
                                         mix_seed(seed, 3, f));
      for (int i : folds[f].test) {
        total += instance_loss(m, data.instances[i], tpl, cfg);
        ++count;
      }
    }
    cv.mean_loss.push_back(total / count);
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < cv.lambdas.size(); ++l)
    if (cv.mean_loss[l] < cv.mean_loss[best]) best = l;
  cv.best_lambda = cv.lambdas[best];
  return cv;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: samples differ in length");
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (std::abs(diff) > 1e-12 * std::max(1.0, scale)) d.push_back(diff);
  }
  WilcoxonResult res;
  const int n = static_cast<int>(d.size());
  res.n = n;
  if (n == 0) return res;

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int x, int y) { return std::abs(d[x]) < std::abs(d[y]); });
  // Doubled average ranks stay integral.
  std::vector<int> rank2(n);
  double tie_term = 0.0;
  for (int i = 0; i < n;) {
    int j = i;
    while (j + 1 < n && std::abs(d[idx[j + 1]]) == std::abs(d[idx[i]])) ++j;
    for (int t = i; t <= j; ++t) rank2[idx[t]] = i + j + 2;
    const double t = j - i + 1;
    tie_term += t * t * t - t;
    i = j + 1;
  }
  int w2 = 0, total2 = 0;
  for (int i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (d[i] > 0.0) w2 += rank2[i];
  }
  res.w_plus = w2 / 2.0;

  if (n <= 25) {
    // Null: each rank enters the positive sum independently with probability 1/2.
    std::vector<double> ways(total2 + 1, 0.0);
    ways[0] = 1.0;
    for (int i = 0; i < n; ++i)
      for (int s = total2; s >= rank2[i]; --s) ways[s] += ways[s - rank2[i]];
    const double all = std::ldexp(1.0, n);
    const int lo = std::min(w2, total2 - w2);
    double tail = 0.0;
    for (int s = 0; s <= lo; ++s) tail += ways[s];
    res.p_value = std::min(1.0, 2.0 * tail / all);
  } else {
    const double mean = n * (n + 1) / 4.0;
    const double var = n * (n + 1) * (2.0 * n + 1) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(res.w_plus - mean) - 0.5) / std::sqrt(var);
    res.p_value = std::erfc(z / std::sqrt(2.0));
  }
  return res;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& data,
                                const GeneratorModel* generator) {
  validate(cfg);
  for (const Instance& inst : data.instances) {
    if (!inst.labeled()) throw DataError("experiments need labeled instances");
  }
  const FeatureTemplate tpl = data.feature_template();
  const int n_metrics = static_cast<int>(cfg.losses.size());
  const int n_models = static_cast<int>(cfg.models.size());
  std::vector<LossSpec> specs;
  for (int m = 0; m < n_metrics; ++m) {
    specs.push_back(resolve_loss(cfg.losses[m], data.k, mix_seed(cfg.seed, 4, m)));
  }

  ExperimentReport rep;
  rep.alpha = cfg.alpha;
  rep.splits = cfg.splits;
  std::map<std::string, int> seen;
  for (const LossSpec& s : specs) {
    std::string name = s.name();
    if (int c = ++seen[name]; c > 1) name += "#" + std::to_string(c);
    rep.metric_names.push_back(name);
  }
  seen.clear();
  for (ReportModel m : cfg.models) {
    std::string name = to_string(m);
    if (int c = ++seen[name]; c > 1) name += "#" + std::to_string(c);
    rep.model_names.push_back(name);
  }
  rep.split_mean.assign(n_metrics, std::vector<std::vector<double>>(n_models));
  rep.lambda.assign(n_metrics, std::vector<std::vector<double>>(n_models));
  rep.mean.assign(n_metrics, std::vector<double>(n_models, 0.0));

  const std::vector<Split> splits =
      make_splits(static_cast<int>(data.instances.size()), cfg.train_fraction, cfg.splits, cfg.seed);
  if (generator) rep.bayes_risk = std::vector<double>(n_metrics, 0.0);
  for (int s = 0; s < cfg.splits; ++s) {
    const Dataset train = subset(data, splits[s].train);
    const Dataset test = subset(data, splits[s].test);
    for (int m = 0; m < n_metrics; ++m) {
      if (generator) (*rep.bayes_risk)[m] += bayes_risk(*generator, test, specs[m]) / cfg.splits;
      for (int j = 0; j < n_models; ++j) {
        const ReportModel kind = cfg.models[j];
        // Duplicate columns share seeds, so identical configurations give identical columns.
        const std::uint64_t seed = mix_seed(cfg.seed, 5, static_cast<std::uint64_t>(s),
                                            static_cast<std::uint64_t>(m) * 16 + static_cast<int>(kind));
        double lambda = configured_lambda(kind, cfg);
        if (!cfg.lambda_grid.empty() && kind != ReportModel::kGold) {
          lambda = cross_validate(kind, data, splits[s].train, specs[m], cfg, seed).best_lambda;
        }
        const TrainedModel model = train_model(kind, train, specs[m], cfg, lambda, seed);
        if (!model.converged) ++rep.non_converged;
        double sum = 0.0;
        for (int i : splits[s].test) {
          const double l = instance_loss(model, data.instances[i], tpl, cfg);
          rep.logs.push_back({s, m, j, i, l});
          sum += l;
        }
        rep.split_mean[m][j].push_back(sum / splits[s].test.size());
        rep.lambda[m][j].push_back(lambda);
      }
    }
  }
  for (int m = 0; m < n_metrics; ++m) {
    for (int j = 0; j < n_models; ++j) {
      const auto& v = rep.split_mean[m][j];
      rep.mean[m][j] = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    }
    for (int a = 0; a < n_models; ++a) {
      for (int b = a + 1; b < n_models; ++b) {
        rep.comparisons.push_back({m, a, b, wilcoxon_signed_rank(rep.split_mean[m][a], rep.split_mean[m][b])});
      }
    }
  }
  return rep;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

std::string format_report_text(const ExperimentReport& r) {
  std::ostringstream os;
  std::size_t w0 = std::string("loss metric").size();
  for (const auto& name : r.metric_names) w0 = std::max(w0, name.size());
  std::size_t w = 8;
  for (const auto& name : r.model_names) w = std::max(w, name.size() + 1);
  const bool bayes = r.bayes_risk.has_value();
  os << "average test loss over " << r.splits << " split" << (r.splits == 1 ? "" : "s") << "\n";
  os << std::left << std::setw(static_cast<int>(w0)) << "loss metric" << std::right;
  for (const auto& name : r.model_names) os << std::setw(static_cast<int>(w) + 1) << name;
  if (bayes) os << std::setw(static_cast<int>(w) + 1) << "bayes";
  os << "\n";
  for (std::size_t m = 0; m < r.metric_names.size(); ++m) {
    os << std::left << std::setw(static_cast<int>(w0)) << r.metric_names[m] << std::right;
    for (double v : r.mean[m]) os << std::setw(static_cast<int>(w) + 1) << fixed(v, 4);
    if (bayes) os << std::setw(static_cast<int>(w) + 1) << fixed((*r.bayes_risk)[m], 4);
    os << "\n";
  }
  if (!r.comparisons.empty()) {
    os << "\nWilcoxon signed-rank over split means (alpha = " << r.alpha << ")\n";
    for (const Comparison& c : r.comparisons) {
      os << "  " << r.metric_names[c.metric] << ": " << r.model_names[c.model_a] << " vs "
         << r.model_names[c.model_b] << "  n=" << c.test.n << " W+=" << fixed(c.test.w_plus, 1)
         << " p=" << fixed(c.test.p_value, 4)
         << (c.test.p_value < r.alpha ? "  significant" : "  not significant") << "\n";
    }
  }
  if (r.non_converged > 0) {
    os << "\nwarning: " << r.non_converged << " trained model(s) reported non-convergence\n";
  }
  return os.str();
}

std::string format_report_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "kind,metric,model,split,instance,value\n";
  auto row = [&](const char* kind, const std::string& metric, const std::string& model,
                 const std::string& split, const std::string& instance, double v) {
    os << kind << "," << metric << "," << model << "," << split << "," << instance << ","
       << format_double(v) << "\n";
  };
  for (std::size_t m = 0; m < r.metric_names.size(); ++m) {
    const std::string& metric = r.metric_names[m];
    for (std::size_t j = 0; j < r.model_names.size(); ++j) {
      row("mean", metric, r.model_names[j], "", "", r.mean[m][j]);
      for (std::size_t s = 0; s < r.split_mean[m][j].size(); ++s) {
        row("split_mean", metric, r.model_names[j], std::to_string(s), "", r.split_mean[m][j][s]);
        row("lambda", metric, r.model_names[j], std::to_string(s), "", r.lambda[m][j][s]);
      }
    }
    if (r.bayes_risk) row("bayes", metric, "", "", "", (*r.bayes_risk)[m]);
  }
  for (const Comparison& c : r.comparisons) {
    row("wilcoxon_p", r.metric_names[c.metric],
        r.model_names[c.model_a] + ":" + r.model_names[c.model_b], "", "", c.test.p_value);
  }
  for (const InstanceLog& l : r.logs) {
    row("instance_loss", r.metric_names[l.metric], r.model_names[l.model], std::to_string(l.split),
        std::to_string(l.instance), l.loss);
  }
  return os.str();
}

}  // namespace agm
