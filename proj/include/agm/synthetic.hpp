#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agm/dataset.hpp"

namespace agm {

/// Hidden ordinal chain with Gaussian emissions and symmetric label noise.
///
/// h_1 is uniform; h_{i+1} stays at h_i with probability `stay` and otherwise
/// moves to an adjacent ordinal level (the only neighbor at the ends).
/// x_i = mean[h_i] + sigma * N(0, I). The observed label equals h_i with
/// probability 1 - noise and is uniform over the other k - 1 labels otherwise.
struct GeneratorConfig {
  int instances = 100;
  int min_length = 6;
  int max_length = 6;
  int k = 3;
  int d = 4;
  double stay = 0.6;
  double sigma = 0.5;
  double noise = 0.1;
  std::uint64_t seed = 1;
};

/// The distribution a dataset was drawn from; saved next to the dataset.
struct GeneratorModel {
  int k = 0;
  int d = 0;
  double sigma = 0.0;
  double noise = 0.0;
  Vector initial;     // k
  Matrix transition;  // k x k, rows sum to one
  Matrix means;       // k x d, row a is the emission mean of level a+1
};

struct GeneratedData {
  Dataset data;
  GeneratorModel model;
};

/// Throws std::invalid_argument on out-of-range settings.
GeneratedData generate_synthetic(const GeneratorConfig& cfg);

/// P(observed y_i = b | x) for every node of a chain instance, by
/// forward-backward over the hidden levels. With sigma = 0 an emission is
/// matched to the level whose mean equals it exactly.
std::vector<Vector> label_posteriors(const GeneratorModel& model, const Instance& inst);

/// Mean over instances of the per-node average of min_a sum_b L_i[a][b] P(y_i = b | x):
/// the expected loss of the Bayes decision, on the scale of evaluate_loss.
double bayes_risk(const GeneratorModel& model, const Dataset& data, const LossSpec& loss);

std::string generator_to_json(const GeneratorConfig& cfg, const GeneratorModel& model);
/// Throws DataError on malformed input.
GeneratorModel generator_from_json(const std::string& text);

}  // namespace agm
