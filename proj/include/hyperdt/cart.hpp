#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Euclidean CART engine: axis-parallel splits, Gini / variance impurity,
// information-gain maximization with deterministic tie-breaking, and
// presorted-index training (per-feature argsort computed once at the root
// and subdivided down the tree).
//
// The split rule is x <= t goes left, x > t goes right. Ties between
// candidate splits are broken by lower feature index, then lower
// threshold; the first strict maximum is kept.

namespace hyperdt::cart {

enum class Task { classification, regression };

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
};

struct Node {
  int feature = -1;             // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> probs;    // classification leaves: class distribution
  double value = 0.0;           // regression leaves: mean target
  int sample_count = 0;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<Node> nodes;  // nodes[0] is the root
  Task task = Task::classification;
  int n_classes = 0;
  std::size_t n_features = 0;
  int depth_limit = 0;
  std::vector<int> training_indices;  // rows of the original X used to fit

  int depth() const;
  int internal_node_count() const;
};

struct SplitCandidate {
  int feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

struct FitParams {
  int depth_limit = 3;
  int min_samples_split = 2;
  Task task = Task::classification;
  int feature_subsample = 0;  // features tried per node; 0 means all
  std::uint64_t seed = 0;     // only consumed when feature_subsample > 0
  long long* gain_evals = nullptr;  // optional instrumentation counter
};

// Gini impurity (classification) or variance about the mean (regression).
double impurity(std::span<const double> labels, Task task);

double information_gain(std::span<const double> labels,
                        std::span<const double> left,
                        std::span<const double> right, Task task);

// Exhaustive single-node search over boundaries between consecutive
// distinct sorted values of each allowed feature. Returns nullopt when no
// candidate has gain > 0. Candidate thresholds are arithmetic midpoints.
std::optional<SplitCandidate> best_split(const Matrix& X,
                                         std::span<const double> y,
                                         std::span<const int> features,
                                         Task task);

// Greedy recursive fit. `rows` selects (with multiplicity) which rows of X
// participate; it becomes the tree's training_indices. Pass all rows for a
// plain fit.
DecisionTree fit_tree(const Matrix& X, std::span<const double> y,
                      const FitParams& params);
DecisionTree fit_tree(const Matrix& X, std::span<const double> y,
                      std::span<const int> rows, const FitParams& params);

std::vector<double> predict_tree(const DecisionTree& tree, const Matrix& X);

// Classification only: per-row class distributions.
Matrix predict_proba(const DecisionTree& tree, const Matrix& X);

// Shared gain bookkeeping, used verbatim by the angle-based reference
// learner so that any fast-vs-reference disagreement isolates geometry
// handling rather than impurity arithmetic.
namespace detail {

double gini_from_counts(std::span<const int> counts, int n);

double gain_classification(std::span<const int> parent_counts,
                           std::span<const int> left_counts, int n_left,
                           int n_total);

double gain_regression(double sum, double sum_sq, int n_total, double left_sum,
                       double left_sum_sq, int n_left);

int leaf_argmax(std::span<const double> probs);

}  // namespace detail

}  // namespace hyperdt::cart
