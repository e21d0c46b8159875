#include "agm/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace agm {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  /// Next non-blank line with comments stripped, split on whitespace.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::istringstream ss(line);
      tokens.clear();
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  double number(const std::string& tok) const {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) fail("bad number '" + tok + "'");
    return v;
  }

  int integer(const std::string& tok) const {
    int v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) fail("bad integer '" + tok + "'");
    return v;
  }

 private:
  std::istream& in_;
  std::string source_;
  int line_no_ = 0;
};

std::map<std::string, std::string> key_values(const std::vector<std::string>& tokens,
                                              std::size_t from, const LineReader& rd) {
  std::map<std::string, std::string> kv;
  for (std::size_t i = from; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string::npos) rd.fail("expected key=value, got '" + tokens[i] + "'");
    kv[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
  }
  return kv;
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source) {
  LineReader rd(in, source);
  std::vector<std::string> tok;
  if (!rd.next(tok) || tok.size() < 2 || tok[0] != "agmdata") rd.fail("missing 'agmdata' header");
  if (tok[1] != "v1") rd.fail("unsupported dataset version '" + tok[1] + "'");
  auto kv = key_values(tok, 2, rd);
  Dataset data;
  for (const char* key : {"k", "d", "de"})
    if (!kv.count(key)) rd.fail(std::string("header lacks ") + key + "=");
  data.k = rd.integer(kv["k"]);
  data.d = rd.integer(kv["d"]);
  data.d_e = rd.integer(kv["de"]);
  if (kv.count("template") && kv["template"] != kTemplateId) {
    rd.fail("unknown feature template '" + kv["template"] + "'");
  }
  if (data.k < 2 || data.d < 0 || data.d_e < 0) rd.fail("header needs k >= 2, d >= 0, de >= 0");
  const FeatureTemplate tpl = data.feature_template();

  while (rd.next(tok)) {
    const std::string where = "instance " + std::to_string(data.instances.size() + 1);
    if (tok[0] != "instance" || tok.size() < 3) rd.fail("expected 'instance <n> <root> edges...'");
    const int n = rd.integer(tok[1]);
    const int root = rd.integer(tok[2]);
    if (n < 1) rd.fail(where + ": needs at least one node");
    if (static_cast<int>(tok.size()) != 3 + 2 * (n - 1)) {
      rd.fail(where + ": expected " + std::to_string(n - 1) + " edges");
    }
    std::vector<Edge> edges;
    for (int e = 0; e < n - 1; ++e) {
      edges.emplace_back(rd.integer(tok[3 + 2 * e]), rd.integer(tok[4 + 2 * e]));
    }
    Instance inst;
    try {
      inst.tree = build_tree(n, edges, root);
    } catch (const StructureError& e) {
      rd.fail(where + ": " + e.what());
    }
    inst.x.assign(n + 1, Vector());
    inst.x_edge.assign(n + 1, Vector());
    Labeling y;
    int unlabeled = 0;
    for (int i = 1; i <= n; ++i) {
      if (!rd.next(tok)) rd.fail(where + ": truncated node block");
      if (static_cast<int>(tok.size()) != 1 + data.d) {
        rd.fail(where + ", node " + std::to_string(i) + ": expected label and " +
                std::to_string(data.d) + " features, got " + std::to_string(tok.size()) + " fields");
      }
      if (tok[0] == "?") {
        ++unlabeled;
      } else {
        const int label = rd.integer(tok[0]);
        if (label < 1 || label > data.k) {
          rd.fail(where + ", node " + std::to_string(i) + ": label " + tok[0] + " outside 1.." +
                  std::to_string(data.k));
        }
        y.push_back(label);
      }
      inst.x[i] = Vector(data.d);
      for (int j = 0; j < data.d; ++j) inst.x[i](j) = rd.number(tok[1 + j]);
    }
    if (unlabeled != 0 && unlabeled != n) rd.fail(where + ": mixes labeled and '?' nodes");
    if (unlabeled == 0) inst.y = std::move(y);
    if (data.d_e > 0) {
      for (int e = 0; e < n - 1; ++e) {
        if (!rd.next(tok)) rd.fail(where + ": truncated edge block");
        if (static_cast<int>(tok.size()) != 2 + data.d_e) rd.fail(where + ": ragged edge row");
        const int u = rd.integer(tok[0]), v = rd.integer(tok[1]);
        int child = 0;
        if (u >= 1 && u <= n && v >= 1 && v <= n) {
          if (inst.tree.parent(v) == u) child = v;
          if (inst.tree.parent(u) == v) child = u;
        }
        if (child == 0) rd.fail(where + ": edge row " + tok[0] + " " + tok[1] + " is not a tree edge");
        if (inst.x_edge[child].size()) rd.fail(where + ": duplicate edge row");
        inst.x_edge[child] = Vector(data.d_e);
        for (int j = 0; j < data.d_e; ++j) inst.x_edge[child](j) = rd.number(tok[2 + j]);
      }
    }
    try {
      validate_instance(inst, tpl);
    } catch (const std::exception& e) {
      rd.fail(where + ": " + e.what());
    }
    data.instances.push_back(std::move(inst));
  }
  return data;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return parse_dataset(in, path);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  out << "agmdata v1 k=" << data.k << " d=" << data.d << " de=" << data.d_e
      << " template=" << kTemplateId << "\n";
  for (const Instance& inst : data.instances) {
    const TreeGraph& t = inst.tree;
    out << "instance " << t.size() << " " << t.root();
    for (const auto& [u, v] : t.edges()) out << " " << u << " " << v;
    out << "\n";
    for (int i = 1; i <= t.size(); ++i) {
      if (inst.labeled()) {
        out << inst.y[i - 1];
      } else {
        out << "?";
      }
      for (int j = 0; j < data.d; ++j) out << " " << format_double(inst.x[i](j));
      out << "\n";
    }
    if (data.d_e > 0) {
      for (const auto& [u, v] : t.edges()) {
        out << u << " " << v;
        for (int j = 0; j < data.d_e; ++j) out << " " << format_double(inst.x_edge[v](j));
        out << "\n";
      }
    }
  }
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset '" + path + "'");
  write_dataset(out, data);
}

Dataset subset(const Dataset& data, const std::vector<int>& indices) {
  Dataset out;
  out.k = data.k;
  out.d = data.d;
  out.d_e = data.d_e;
  for (int i : indices) out.instances.push_back(data.instances.at(i));
  return out;
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kAgm: return "agm";
    case ModelKind::kCrf: return "crf";
    case ModelKind::kSsvm: return "ssvm";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "agm") return ModelKind::kAgm;
  if (name == "crf") return ModelKind::kCrf;
  if (name == "ssvm") return ModelKind::kSsvm;
  throw std::invalid_argument("unknown model kind '" + name + "' (agm, crf, ssvm)");
}

void write_model(std::ostream& out, const ModelFile& m) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.loss.hash()));
  out << "agmmodel v1\n"
      << "kind " << to_string(m.kind) << "\n"
      << "template " << kTemplateId << " k=" << m.tpl.k << " d=" << m.tpl.d << " de=" << m.tpl.d_e
      << "\n"
      << "loss " << m.loss.canonical() << "\n"
      << "loss_hash " << hash << "\n"
      << "theta_v " << m.params.theta_v.size() << "\n";
  for (double v : m.params.theta_v) out << format_double(v) << "\n";
  out << "theta_e " << m.params.theta_e.size() << "\n";
  for (double v : m.params.theta_e) out << format_double(v) << "\n";
}

void save_model(const std::string& path, const ModelFile& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model '" + path + "'");
  write_model(out, model);
}

ModelFile parse_model(std::istream& in, const std::string& source) {
  LineReader rd(in, source);
  std::vector<std::string> tok;
  auto expect = [&](const char* head, std::size_t fields) {
    if (!rd.next(tok) || tok[0] != head || tok.size() != fields) {
      rd.fail(std::string("expected '") + head + "' line");
    }
  };
  expect("agmmodel", 2);
  if (tok[1] != "v1") rd.fail("unsupported model version '" + tok[1] + "'");
  ModelFile m;
  expect("kind", 2);
  try {
    m.kind = parse_model_kind(tok[1]);
  } catch (const std::invalid_argument& e) {
    rd.fail(e.what());
  }
  expect("template", 5);
  if (tok[1] != kTemplateId) rd.fail("unknown feature template '" + tok[1] + "'");
  auto kv = key_values(tok, 2, rd);
  m.tpl = feature_template(rd.integer(kv["d"]), rd.integer(kv["de"]), rd.integer(kv["k"]));
  expect("loss", 2);
  try {
    m.loss = parse_loss_spec(tok[1], m.tpl.k);
  } catch (const std::exception& e) {
    rd.fail(e.what());
  }
  expect("loss_hash", 2);
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.loss.hash()));
  if (tok[1] != hash) rd.fail("loss hash does not match the loss spec");
  auto read_block = [&](const char* head, int expected) {
    expect(head, 2);
    const int count = rd.integer(tok[1]);
    if (count != expected) rd.fail(std::string(head) + " length does not match the template");
    Vector v(count);
    for (int i = 0; i < count; ++i) {
      if (!rd.next(tok) || tok.size() != 1) rd.fail(std::string("truncated ") + head);
      v(i) = rd.number(tok[0]);
    }
    return v;
  };
  m.params.theta_v = read_block("theta_v", m.tpl.node_dim());
  m.params.theta_e = read_block("theta_e", m.tpl.edge_dim());
  return m;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model '" + path + "'");
  return parse_model(in, path);
}

}  // namespace agm
