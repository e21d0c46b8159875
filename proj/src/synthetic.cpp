#include "agm/synthetic.hpp"

#include <cmath>
#include <json.hpp>
#include <stdexcept>

namespace agm {

namespace {

using nlohmann::json;

// Per-level emission likelihoods of x, scaled so the largest is one.
Vector emission(const GeneratorModel& m, const Vector& x) {
  Vector e(m.k);
  if (m.sigma == 0.0) {
    for (int a = 0; a < m.k; ++a) e(a) = (m.means.row(a).transpose() - x).cwiseAbs().maxCoeff() == 0.0;
    if (e.sum() == 0.0) throw DataError("input matches no emission mean of a noiseless generator");
    return e;
  }
  for (int a = 0; a < m.k; ++a) {
    e(a) = -(m.means.row(a).transpose() - x).squaredNorm() / (2.0 * m.sigma * m.sigma);
  }
  return (e.array() - e.maxCoeff()).exp().matrix();
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    json row = json::array();
    for (Eigen::Index b = 0; b < m.cols(); ++b) row.push_back(m(a, b));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) throw DataError("bad matrix shape");
  Matrix m(rows, cols);
  for (int a = 0; a < rows; ++a) {
    if (!j[a].is_array() || static_cast<int>(j[a].size()) != cols) throw DataError("bad matrix shape");
    for (int b = 0; b < cols; ++b) m(a, b) = j[a][b].get<double>();
  }
  return m;
}

}  // namespace

GeneratedData generate_synthetic(const GeneratorConfig& cfg) {
  if (cfg.instances < 1) throw std::invalid_argument("generator needs at least one instance");
  if (cfg.min_length < 1 || cfg.max_length < cfg.min_length) {
    throw std::invalid_argument("generator needs 1 <= min_length <= max_length");
  }
  if (cfg.k < 2 || cfg.d < 0) throw std::invalid_argument("generator needs k >= 2 and d >= 0");
  if (!(cfg.stay >= 0.0 && cfg.stay <= 1.0)) throw std::invalid_argument("stay must lie in [0, 1]");
  if (!(cfg.noise >= 0.0 && cfg.noise <= 1.0)) throw std::invalid_argument("noise must lie in [0, 1]");
  if (!(cfg.sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");

  Rng rng(cfg.seed);
  GeneratedData out;
  GeneratorModel& m = out.model;
  m.k = cfg.k;
  m.d = cfg.d;
  m.sigma = cfg.sigma;
  m.noise = cfg.noise;
  m.initial = Vector::Constant(cfg.k, 1.0 / cfg.k);
  m.transition = Matrix::Zero(cfg.k, cfg.k);
  for (int a = 0; a < cfg.k; ++a) {
    m.transition(a, a) = cfg.stay;
    const bool lo = a > 0, hi = a + 1 < cfg.k;
    const double move = (1.0 - cfg.stay) / (lo && hi ? 2.0 : 1.0);
    if (lo) m.transition(a, a - 1) = move;
    if (hi) m.transition(a, a + 1) = move;
  }
  m.means = Matrix(cfg.k, cfg.d);
  for (int a = 0; a < cfg.k; ++a)
    for (int j = 0; j < cfg.d; ++j) m.means(a, j) = rng.uniform(-1.0, 1.0);

  auto draw = [&](const Vector& probs) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (int a = 0; a + 1 < probs.size(); ++a) {
      cum += probs(a);
      if (u < cum) return a;
    }
    return static_cast<int>(probs.size()) - 1;
  };

  Dataset& data = out.data;
  data.k = cfg.k;
  data.d = cfg.d;
  data.d_e = 0;
  for (int s = 0; s < cfg.instances; ++s) {
    const int n = cfg.min_length +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_length - cfg.min_length + 1)));
    Instance inst;
    inst.tree = make_chain(n);
    inst.x.assign(n + 1, Vector());
    inst.x_edge.assign(n + 1, Vector());
    int h = draw(m.initial);
    for (int i = 1; i <= n; ++i) {
      if (i > 1) h = draw(m.transition.row(h).transpose());
      inst.x[i] = Vector(cfg.d);
      for (int j = 0; j < cfg.d; ++j) inst.x[i](j) = m.means(h, j) + cfg.sigma * rng.normal();
      int y = h;
      if (rng.uniform() < cfg.noise) {
        y = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.k - 1)));
        if (y >= h) ++y;
      }
      inst.y.push_back(y + 1);
    }
    data.instances.push_back(std::move(inst));
  }
  return out;
}

std::vector<Vector> label_posteriors(const GeneratorModel& m, const Instance& inst) {
  const int n = inst.size();
  for (int i = 2; i <= n; ++i) {
    if (inst.tree.parent(i) != i - 1) throw DataError("generator posteriors need a chain 1-2-...-n");
  }
  std::vector<Vector> alpha(n + 1), beta(n + 2), e(n + 1);
  for (int i = 1; i <= n; ++i) e[i] = emission(m, inst.x[i]);
  alpha[1] = m.initial.cwiseProduct(e[1]);
  alpha[1] /= alpha[1].sum();
  for (int i = 2; i <= n; ++i) {
    alpha[i] = (m.transition.transpose() * alpha[i - 1]).cwiseProduct(e[i]);
    const double z = alpha[i].sum();
    if (!(z > 0.0)) throw DataError("inputs have zero probability under the generator");
    alpha[i] /= z;
  }
  beta[n] = Vector::Ones(m.k);
  for (int i = n - 1; i >= 1; --i) {
    beta[i] = m.transition * beta[i + 1].cwiseProduct(e[i + 1]);
    beta[i] /= beta[i].sum();
  }
  std::vector<Vector> out(n + 1);
  const double flip = m.k > 1 ? m.noise / (m.k - 1) : 0.0;
  for (int i = 1; i <= n; ++i) {
    Vector hidden = alpha[i].cwiseProduct(beta[i]);
    hidden /= hidden.sum();
    out[i] = (1.0 - m.noise) * hidden + flip * (Vector::Ones(m.k) - hidden);
  }
  return out;
}

double bayes_risk(const GeneratorModel& model, const Dataset& data, const LossSpec& loss) {
  if (data.instances.empty()) throw DataError("Bayes risk of an empty dataset");
  double total = 0.0;
  for (const Instance& inst : data.instances) {
    const std::vector<Vector> post = label_posteriors(model, inst);
    const std::vector<LossMatrix> losses = make_losses(loss, inst.size());
    double sum = 0.0;
    for (int i = 1; i <= inst.size(); ++i) sum += (losses[i].matrix() * post[i]).minCoeff();
    total += sum / inst.size();
  }
  return total / static_cast<double>(data.instances.size());
}

std::string generator_to_json(const GeneratorConfig& cfg, const GeneratorModel& m) {
  json j;
  j["config"] = {{"instances", cfg.instances}, {"min_length", cfg.min_length},
                 {"max_length", cfg.max_length}, {"k", cfg.k}, {"d", cfg.d},
                 {"stay", cfg.stay}, {"sigma", cfg.sigma}, {"noise", cfg.noise},
                 {"seed", cfg.seed}};
  j["model"] = {{"k", m.k}, {"d", m.d}, {"sigma", m.sigma}, {"noise", m.noise},
                {"initial", std::vector<double>(m.initial.data(), m.initial.data() + m.k)},
                {"transition", matrix_json(m.transition)}, {"means", matrix_json(m.means)}};
  return j.dump(2) + "\n";
}

GeneratorModel generator_from_json(const std::string& text) {
  try {
    const json j = json::parse(text).at("model");
    GeneratorModel m;
    m.k = j.at("k").get<int>();
    m.d = j.at("d").get<int>();
    m.sigma = j.at("sigma").get<double>();
    m.noise = j.at("noise").get<double>();
    const auto init = j.at("initial").get<std::vector<double>>();
    if (static_cast<int>(init.size()) != m.k) throw DataError("initial distribution has wrong length");
    m.initial = Eigen::Map<const Vector>(init.data(), m.k);
    m.transition = matrix_from(j.at("transition"), m.k, m.k);
    m.means = matrix_from(j.at("means"), m.k, m.d);
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad generator description: ") + e.what());
  }
}

}  // namespace agm
