#pragma once

#include <stdexcept>

#include "agm/linalg.hpp"

namespace agm {

class MarginalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TransportConfig {
  /// Entropic regularization; <= 0 selects 1e-2 * max|B|.
  double epsilon = 0.0;
  /// Solve the transport LP exactly instead of running Sinkhorn.
  bool exact = false;
  /// Sinkhorn iteration budget; when it runs out before reaching tol the
  /// coupling is computed by the exact LP instead.
  int max_iters = 1000;
  /// Stop Sinkhorn once the row-marginal l1 error falls below this; the
  /// rounding step makes the marginals exact afterwards.
  double tol = 1e-6;
};

/// Coupling Q (parent states x child states) maximizing <Q, B> with
/// Q 1 = r_parent and Q' 1 = r_child. Sinkhorn on cost -B followed by
/// rounding onto the exact marginals, or an exact LP when cfg.exact is set.
/// Labels carrying zero mass are removed before solving and padded back.
Matrix recover_pairwise(const Matrix& B, const Vector& r_child, const Vector& r_parent,
                        const TransportConfig& cfg = {});

/// Exact optimum of the same transport problem by linear programming.
Matrix exact_transport(const Matrix& B, const Vector& r_child, const Vector& r_parent);

/// Log-domain Sinkhorn for max <Q,B> + eps H(Q) with the given marginals,
/// annealing the regularization down to eps. Both marginals must be
/// strictly positive. `converged` (optional) reports whether the final
/// row error reached tol within max_iters.
Matrix sinkhorn(const Matrix& B, const Vector& rows, const Vector& cols, double eps,
                int max_iters, double tol, bool* converged = nullptr);

/// Projects a nonnegative plan onto the coupling set of (rows, cols): shrink
/// rows, shrink columns, then add the rank-one residual.
Matrix round_to_marginals(Matrix plan, const Vector& rows, const Vector& cols);

}  // namespace agm
