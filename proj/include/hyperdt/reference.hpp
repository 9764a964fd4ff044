#pragma once

#include "hyperdt/cart.hpp"
#include "hyperdt/geometry.hpp"

// Angle-based hyperbolic decision trees operating directly on Lorentz
// coordinates. Splits are homogeneous hyperplanes n(i, theta) =
// (-cos theta, 0, ..., sin theta, ..., 0); a point goes right iff
// x_i sin(theta) - x_0 cos(theta) > 0, so the boundary itself routes left.
//
// This learner shares the impurity/gain/tie-break code with the cart
// module and enumerates split candidates in ascending order of the Klein
// coordinate x_i / x_0, which makes it exactly comparable to the
// Klein-threshold trees. Unlike cart it deliberately re-derives and
// re-sorts the per-node angles at every node and recomputes each
// candidate's partition statistics from scratch, which is what the
// original formulation does; it serves as the equivalence and timing
// baseline.

namespace hyperdt::reference {

struct AngularNode {
  int feature = -1;   // spacelike axis, 0-based over the d Klein features
  double theta = 0.0; // split angle in (0, pi)
  int left = -1;
  int right = -1;
  std::vector<double> probs;
  double value = 0.0;
  int sample_count = 0;

  bool is_leaf() const { return feature < 0; }
};

struct AngularTree {
  std::vector<AngularNode> nodes;
  cart::Task task = cart::Task::classification;
  int n_classes = 0;
  std::size_t ambient_dim = 0;  // d + 1 Lorentz coordinates
  int depth_limit = 0;

  int internal_node_count() const;
};

// True iff x crosses to the positive side of the hyperplane.
bool angular_split_sign(std::span<const double> x, int feature, double theta);

// X holds Lorentz rows (d+1 columns, timelike first). Angles with
// sin(theta) < 1e-12 are excluded from the candidate set.
AngularTree fit_reference(const cart::Matrix& X, std::span<const double> y,
                          const cart::FitParams& params,
                          long long* gain_eval_counter = nullptr);

std::vector<double> predict_reference(const AngularTree& tree,
                                      const cart::Matrix& X);

}  // namespace hyperdt::reference
