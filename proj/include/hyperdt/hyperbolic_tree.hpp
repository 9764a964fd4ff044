#pragma once

#include <string>

#include "hyperdt/cart.hpp"
#include "hyperdt/geometry.hpp"

// Fast hyperbolic decision trees: project the input to Klein coordinates,
// fit a Euclidean cart tree, then recursively replace each interim
// arithmetic-midpoint threshold with the Einstein midpoint of the two
// training values straddling it. Training-set routing is unchanged by the
// adjustment; only the geometry of the decision boundary moves.

namespace hyperdt {

enum class Geometry { hyperboloid, klein, poincare };

std::string to_string(Geometry g);
Geometry geometry_from_string(const std::string& s);

struct ModelSpec {
  geom::Curvature K{-1.0};
  Geometry input_geometry = Geometry::hyperboloid;
  cart::Task task = cart::Task::classification;
};

struct HyperbolicTree {
  ModelSpec spec;
  cart::DecisionTree tree;  // thresholds in Klein coordinates
  bool postprocessed = false;
};

struct AdjustWarning {
  int node = 0;
  std::string message;
};

// Converts raw rows in the declared geometry to Klein coordinates.
// Hyperboloid rows have d+1 columns; klein and poincare rows have d.
// Throws with the offending row number on invalid input.
cart::Matrix preprocess(const cart::Matrix& X_raw, const ModelSpec& spec);

// Recursive Einstein-midpoint threshold adjustment over the rows named by
// tree.training_indices (with multiplicity for bootstrap samples). If a
// node's active rows leave one side of its threshold empty, the threshold
// is left as-is and a warning record is emitted; this only happens for
// trees that were not fitted on X_klein.
std::vector<AdjustWarning> adjust_thresholds(cart::DecisionTree& tree,
                                             const cart::Matrix& X_klein,
                                             geom::Curvature K);

HyperbolicTree fit(const cart::Matrix& X_raw, std::span<const double> y,
                   const ModelSpec& spec, const cart::FitParams& params);

// Bootstrap-aware variant: fits on (and postprocesses with) the given rows.
HyperbolicTree fit(const cart::Matrix& X_raw, std::span<const double> y,
                   std::span<const int> rows, const ModelSpec& spec,
                   const cart::FitParams& params);

// Preprocess-then-predict path (the default).
std::vector<double> predict_simple(const HyperbolicTree& model,
                                   const cart::Matrix& X_raw);

// O(h)-coordinates-per-row path for hyperboloid input: walks the tree
// computing only the visited node's Klein ratio. Falls back to
// predict_simple for klein/poincare input. ratio_evals, when given,
// receives the number of per-node coordinate computations performed.
std::vector<double> predict_selective(const HyperbolicTree& model,
                                      const cart::Matrix& X_raw,
                                      long long* ratio_evals = nullptr);

}  // namespace hyperdt
