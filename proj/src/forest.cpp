#include "hyperdt/forest.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hyperdt::forest {

std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::majority_vote: return "majority";
    case Aggregation::probability_mean: return "probability-mean";
    case Aggregation::regression_mean: return "mean";
  }
  return "?";
}

Aggregation aggregation_from_string(const std::string& s) {
  if (s == "majority") return Aggregation::majority_vote;
  if (s == "probability-mean") return Aggregation::probability_mean;
  if (s == "mean") return Aggregation::regression_mean;
  throw std::invalid_argument("unknown aggregation: " + s);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::vector<int> bootstrap_rows(std::size_t n, std::uint64_t seed) {
  std::vector<int> rows(n);
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < n; ++i) {
    state = derive_seed(state, i);
    rows[i] = static_cast<int>(state % n);
  }
  return rows;
}

}  // namespace

Forest fit_forest(const cart::Matrix& X_raw, std::span<const double> y,
                  const ModelSpec& spec, const ForestParams& params) {
  if (params.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  const cart::Matrix X_klein = preprocess(X_raw, spec);
  const std::size_t d = X_klein.cols;

  int feature_subsample = params.feature_subsample;
  if (feature_subsample < 0) {
    feature_subsample =
        spec.task == cart::Task::classification
            ? std::max(1, static_cast<int>(std::lround(std::sqrt(double(d)))))
            : static_cast<int>(d);
  }

  Forest forest;
  forest.spec = spec;
  forest.aggregation = params.aggregation;
  forest.seed = params.seed;
  forest.trees.resize(params.n_trees);

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < params.n_trees; ++t) {
    try {
      const std::uint64_t tree_seed = derive_seed(params.seed, t);
      std::vector<int> rows;
      if (params.bootstrap) {
        rows = bootstrap_rows(X_klein.rows, tree_seed);
      } else {
        rows.resize(X_klein.rows);
        std::iota(rows.begin(), rows.end(), 0);
      }
      cart::FitParams fit_params;
      fit_params.depth_limit = params.depth_limit;
      fit_params.min_samples_split = params.min_samples_split;
      fit_params.task = spec.task;
      fit_params.feature_subsample =
          feature_subsample >= static_cast<int>(d) ? 0 : feature_subsample;
      fit_params.seed = derive_seed(tree_seed, 1);

      HyperbolicTree model{spec, cart::fit_tree(X_klein, y, rows, fit_params),
                           false};
      adjust_thresholds(model.tree, X_klein, spec.K);
      model.postprocessed = true;
      forest.trees[t] = std::move(model);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return forest;
}

std::vector<double> predict_forest(const Forest& forest,
                                   const cart::Matrix& X_raw) {
  if (forest.trees.empty()) throw std::invalid_argument("empty forest");
  const cart::Matrix X_klein = preprocess(X_raw, forest.spec);
  const std::size_t n = X_klein.rows;
  std::vector<double> out(n);

  if (forest.spec.task == cart::Task::regression ||
      forest.aggregation == Aggregation::regression_mean) {
    std::vector<double> acc(n, 0.0);
    for (const HyperbolicTree& model : forest.trees) {
      const auto p = cart::predict_tree(model.tree, X_klein);
      for (std::size_t i = 0; i < n; ++i) acc[i] += p[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = acc[i] / forest.trees.size();
    return out;
  }

  const int n_classes = forest.trees[0].tree.n_classes;
  cart::Matrix tally(n, static_cast<std::size_t>(n_classes));
  for (const HyperbolicTree& model : forest.trees) {
    if (forest.aggregation == Aggregation::majority_vote) {
      const auto p = cart::predict_tree(model.tree, X_klein);
      for (std::size_t i = 0; i < n; ++i)
        tally(i, static_cast<std::size_t>(p[i])) += 1.0;
    } else {
      const auto p = cart::predict_proba(model.tree, X_klein);
      for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < n_classes; ++c) tally(i, c) += p(i, c);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<double>(cart::detail::leaf_argmax(tally.row(i)));
  return out;
}

}  // namespace hyperdt::forest
