#pragma once

#include "agm/linalg.hpp"

namespace agm {

/// maximize c'x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
/// Either constraint block may be empty (zero rows).
struct LpProblem {
  Vector c;
  Matrix a_ub;
  Vector b_ub;
  Matrix a_eq;
  Vector b_eq;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  Vector x;
  double objective = 0.0;
};

/// Dense two-phase tableau simplex. Dantzig pricing with a switch to Bland's
/// rule after a run of degenerate pivots, so it terminates on degenerate
/// problems. Intended for the small exact oracles in this library.
LpResult solve_lp(const LpProblem& problem, int max_pivots = 200000);

/// Value and optimal mixed strategies of the zero-sum game in which the
/// column player maximizes and the row player minimizes row' * payoff * col.
struct MatrixGameSolution {
  double value = 0.0;
  Vector row_strategy;
  Vector col_strategy;
};

MatrixGameSolution solve_matrix_game_lp(const Matrix& payoff);

}  // namespace agm
