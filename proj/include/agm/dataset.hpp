#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "agm/features.hpp"
#include "agm/loss.hpp"

namespace agm {

/// Malformed or inconsistent input data. The message names the source and line.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text dataset:
///
///   agmdata v1 k=<k> d=<d> de=<d_e> template=indicator-cross
///   instance <n> <root> <u_1> <v_1> ... <u_{n-1}> <v_{n-1}>
///   <label|?> <x_1> ... <x_d>                  (n lines, node 1 first)
///   <u> <v> <g_1> ... <g_{d_e}>                 (n-1 lines, only when d_e > 0)
///
/// '#' starts a comment; blank lines are ignored. Either all labels of an
/// instance are given or all are '?'.
struct Dataset {
  int k = 2;
  int d = 0;
  int d_e = 0;
  std::vector<Instance> instances;

  FeatureTemplate feature_template() const { return agm::feature_template(d, d_e, k); }
};

inline constexpr const char* kTemplateId = "indicator-cross";

Dataset parse_dataset(std::istream& in, const std::string& source = "<input>");
Dataset load_dataset(const std::string& path);
void write_dataset(std::ostream& out, const Dataset& data);
void save_dataset(const std::string& path, const Dataset& data);

/// Subset by instance index, keeping the header.
Dataset subset(const Dataset& data, const std::vector<int>& indices);

enum class ModelKind { kAgm, kCrf, kSsvm };

std::string to_string(ModelKind kind);
/// Throws std::invalid_argument on unknown names.
ModelKind parse_model_kind(const std::string& name);

/// Versioned model file: header with kind, template dimensions and loss spec
/// (canonical text and hash), then theta_v and theta_e, one value per line.
struct ModelFile {
  ModelKind kind = ModelKind::kAgm;
  FeatureTemplate tpl;
  LossSpec loss;
  ModelParams params;
};

void write_model(std::ostream& out, const ModelFile& model);
void save_model(const std::string& path, const ModelFile& model);
ModelFile parse_model(std::istream& in, const std::string& source = "<input>");
ModelFile load_model(const std::string& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace agm
