#pragma once

#include <cstdint>

#include "hyperdt/hyperbolic_tree.hpp"

// Random forests of hyperbolic trees. Each tree draws its own bootstrap
// sample and is postprocessed against exactly those rows. Per-tree seeds
// are derived from the master seed by tree index, so fitting trees in
// parallel (any thread count, any order) gives the same forest.

namespace hyperdt::forest {

enum class Aggregation { majority_vote, probability_mean, regression_mean };

std::string to_string(Aggregation a);
Aggregation aggregation_from_string(const std::string& s);

struct ForestParams {
  int n_trees = 100;
  bool bootstrap = true;
  int depth_limit = 3;
  int min_samples_split = 2;
  int feature_subsample = -1;  // -1: sqrt(d) for classification, d for regression
  std::uint64_t seed = 0;
  Aggregation aggregation = Aggregation::majority_vote;
};

struct Forest {
  ModelSpec spec;
  std::vector<HyperbolicTree> trees;
  Aggregation aggregation = Aggregation::majority_vote;
  std::uint64_t seed = 0;
};

// SplitMix64 step; also used to derive independent per-tree seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

Forest fit_forest(const cart::Matrix& X_raw, std::span<const double> y,
                  const ModelSpec& spec, const ForestParams& params);

// Majority vote resolves ties toward the lower class id.
std::vector<double> predict_forest(const Forest& forest,
                                   const cart::Matrix& X_raw);

}  // namespace hyperdt::forest
