#pragma once

#include "agm/linalg.hpp"
#include "agm/loss.hpp"

namespace agm {

/// Solution of  max_{r in simplex} a'r + min_{p in simplex} p' L r.
struct NodeGameResult {
  Vector r;      // adversary node marginal
  Vector p;      // predictor node marginal
  double value = 0.0;
  /// Only filled by the matrix overload: column b's mass r[b] split evenly
  /// over the rows attaining the maximum of column b.
  Matrix row_assignment;
};

enum class NodeGameMethod {
  kAuto,       // zero-one fast path when L is a scaled zero-one matrix
  kEnumerate,  // support enumeration for any loss matrix
};

/// Throws std::invalid_argument on non-finite or mis-sized input.
NodeGameResult solve_node_game(const Vector& a, const LossMatrix& L,
                               NodeGameMethod method = NodeGameMethod::kAuto);

/// Same game with a = column-wise maximum of A; also fills row_assignment.
NodeGameResult solve_node_game(const Matrix& A, const LossMatrix& L,
                               NodeGameMethod method = NodeGameMethod::kAuto);

/// Shapley-Snow kernel enumeration over square sub-games of 1a' + L,
/// visiting adversary supports by size and then lexicographically; the first
/// kernel that certifies an equilibrium wins.
NodeGameResult solve_node_game_enumerate(const Vector& a, const LossMatrix& L);

/// O(k log k) solver for L = w(11' - I): the adversary is uniform over the
/// s largest potentials, for the s maximizing (sum_top_s a + w(s-1)) / s.
NodeGameResult solve_node_game_zero_one(const Vector& a, double weight);

}  // namespace agm
