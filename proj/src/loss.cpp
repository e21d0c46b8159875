#include "agm/loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace agm {

LossMatrix::LossMatrix(Matrix entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1) throw LossError("loss matrix must be square");
  for (Eigen::Index a = 0; a < m_.rows(); ++a) {
    for (Eigen::Index b = 0; b < m_.cols(); ++b) {
      const double v = m_(a, b);
      if (!std::isfinite(v)) throw LossError("loss matrix has a non-finite entry");
      if (v < 0.0) throw LossError("loss matrix has a negative entry");
    }
  }
}

bool LossMatrix::is_zero_one() const {
  const double scale = m_.size() > 1 ? m_(0, 1) : 0.0;
  if (scale <= 0.0) return false;
  for (Eigen::Index a = 0; a < m_.rows(); ++a) {
    for (Eigen::Index b = 0; b < m_.cols(); ++b) {
      if (m_(a, b) != (a == b ? 0.0 : scale)) return false;
    }
  }
  return true;
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kZeroOne: return "zero_one";
    case LossKind::kAbsolute: return "absolute";
    case LossKind::kSquared: return "squared";
    case LossKind::kCostSensitive: return "cost_sensitive";
  }
  return "?";
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "zero_one" || s == "zero-one" || s == "zeroone") return LossKind::kZeroOne;
  if (s == "absolute") return LossKind::kAbsolute;
  if (s == "squared") return LossKind::kSquared;
  if (s == "cost_sensitive" || s == "cost-sensitive") return LossKind::kCostSensitive;
  throw LossError("unknown loss kind '" + s + "'");
}

std::string LossSpec::name() const {
  std::string s = to_string(kind);
  if (weighting == NodeWeighting::kPosition) s += "-weighted";
  if (weighting == NodeWeighting::kExplicit) s += "-custom_weights";
  return s;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string LossSpec::canonical() const {
  std::ostringstream os;
  os << to_string(kind) << ";k=" << k;
  switch (weighting) {
    case NodeWeighting::kNone: os << ";w=none"; break;
    case NodeWeighting::kPosition: os << ";w=position"; break;
    case NodeWeighting::kExplicit:
      os << ";w=";
      for (std::size_t i = 0; i < node_weights.size(); ++i) {
        os << (i ? "," : "") << fmt_double(node_weights[i]);
      }
      break;
  }
  if (custom) {
    os << ";m=";
    for (Eigen::Index a = 0; a < custom->rows(); ++a) {
      for (Eigen::Index b = 0; b < custom->cols(); ++b) {
        os << (a || b ? "," : "") << fmt_double((*custom)(a, b));
      }
    }
  }
  return os.str();
}

std::uint64_t LossSpec::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::vector<double> parse_csv(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw LossError("bad number '" + tok + "'");
    } catch (const std::logic_error&) {
      throw LossError("bad number '" + tok + "' in loss spec");
    }
  }
  return out;
}

}  // namespace

LossSpec parse_loss_spec(const std::string& text, int k) {
  LossSpec spec;
  spec.k = k;
  std::vector<std::string> parts;
  {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ';')) parts.push_back(tok);
  }
  if (parts.empty()) throw LossError("empty loss spec");
  std::string head = parts[0];
  if (auto colon = head.find(':'); colon != std::string::npos) {
    const std::string mod = head.substr(colon + 1);
    head = head.substr(0, colon);
    if (mod == "weighted") {
      spec.weighting = NodeWeighting::kPosition;
    } else {
      throw LossError("unknown loss modifier '" + mod + "'");
    }
  }
  if (auto dash = head.find("-weighted"); dash != std::string::npos) {
    head = head.substr(0, dash);
    spec.weighting = NodeWeighting::kPosition;
  }
  spec.kind = parse_loss_kind(head);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    if (p.rfind("k=", 0) == 0) {
      spec.k = std::stoi(p.substr(2));
    } else if (p == "w=none") {
      spec.weighting = NodeWeighting::kNone;
    } else if (p == "w=position") {
      spec.weighting = NodeWeighting::kPosition;
    } else if (p.rfind("w=", 0) == 0) {
      spec.weighting = NodeWeighting::kExplicit;
      spec.node_weights = parse_csv(p.substr(2));
    } else if (p.rfind("m=", 0) == 0) {
      auto vals = parse_csv(p.substr(2));
      const int kk = static_cast<int>(std::lround(std::sqrt(static_cast<double>(vals.size()))));
      if (kk * kk != static_cast<int>(vals.size())) throw LossError("custom loss matrix not square");
      Matrix m(kk, kk);
      for (int a = 0; a < kk; ++a)
        for (int b = 0; b < kk; ++b) m(a, b) = vals[a * kk + b];
      spec.custom = m;
    } else {
      throw LossError("unknown loss spec field '" + p + "'");
    }
  }
  if (spec.k < 2) throw LossError("loss spec needs k >= 2");
  if (spec.custom && spec.custom->rows() != spec.k) throw LossError("custom loss matrix size != k");
  return spec;
}

Matrix base_loss(LossKind kind, int k) {
  if (k < 1) throw LossError("label count must be positive");
  Matrix m(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const double d = std::abs(a - b);
      switch (kind) {
        case LossKind::kZeroOne: m(a, b) = a == b ? 0.0 : 1.0; break;
        case LossKind::kAbsolute: m(a, b) = d; break;
        case LossKind::kSquared: m(a, b) = d * d; break;
        case LossKind::kCostSensitive:
          throw LossError("cost_sensitive loss needs an explicit matrix");
      }
    }
  }
  return m;
}

LossMatrix make_loss(const LossSpec& spec, int node, int n_nodes) {
  if (node < 1 || node > n_nodes) throw LossError("node outside the graph");
  Matrix m;
  if (spec.kind == LossKind::kCostSensitive) {
    if (!spec.custom) throw LossError("cost_sensitive loss needs an explicit matrix");
    m = *spec.custom;
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
      if (m(a, a) != 0.0) throw LossError("cost_sensitive matrix must have a zero diagonal");
    }
  } else {
    m = base_loss(spec.kind, spec.k);
  }
  double w = 1.0;
  switch (spec.weighting) {
    case NodeWeighting::kNone: break;
    case NodeWeighting::kPosition: w = 2.0 * node / (n_nodes + 1.0); break;
    case NodeWeighting::kExplicit:
      if (static_cast<int>(spec.node_weights.size()) < node) {
        throw LossError("node_weights shorter than the graph");
      }
      w = spec.node_weights[node - 1];
      break;
  }
  if (!(w > 0.0) || !std::isfinite(w)) throw LossError("node weight must be positive");
  return LossMatrix(m * w);
}

std::vector<LossMatrix> make_losses(const LossSpec& spec, int n_nodes) {
  std::vector<LossMatrix> out(n_nodes + 1);
  for (int i = 1; i <= n_nodes; ++i) out[i] = make_loss(spec, i, n_nodes);
  return out;
}

double total_loss(const std::vector<LossMatrix>& losses, const Labeling& predicted,
                  const Labeling& truth) {
  if (predicted.size() != truth.size()) throw LossError("label sequences differ in length");
  if (losses.size() != predicted.size() + 1) throw LossError("loss matrices do not match length");
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const LossMatrix& L = losses[i + 1];
    const int a = predicted[i], b = truth[i];
    if (a < 1 || a > L.k() || b < 1 || b > L.k()) {
      throw LossError("label out of range at node " + std::to_string(i + 1));
    }
    total += L(a, b);
  }
  return total;
}

double evaluate_loss(const LossSpec& spec, const Labeling& predicted, const Labeling& truth) {
  if (predicted.size() != truth.size()) throw LossError("label sequences differ in length");
  if (predicted.empty()) throw LossError("empty label sequence");
  const int n = static_cast<int>(predicted.size());
  return total_loss(make_losses(spec, n), predicted, truth) / n;
}

Matrix random_ordinal_cost(int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  rng.shuffle(order);
  Matrix m(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) m(a, b) = std::abs(order[a] - order[b]);
  return m;
}

}  // namespace agm
