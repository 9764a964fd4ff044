#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "doctest.h"
#include "hyperdt/cart.hpp"
#include "hyperdt/datagen.hpp"

using namespace hyperdt;
using cart::Matrix;
using cart::Task;

namespace {

// O(n^2 d) reference search with the same tie-break rules, built only on
// impurity() and information_gain().
std::optional<cart::SplitCandidate> brute_best_split(
    const Matrix& X, std::span<const double> y, std::span<const int> features,
    Task task) {
  std::optional<cart::SplitCandidate> best;
  for (int f : features) {
    std::vector<double> values;
    for (std::size_t r = 0; r < X.rows; ++r) values.push_back(X(r, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double t = (values[i] + values[i + 1]) / 2.0;
      std::vector<double> left, right;
      for (std::size_t r = 0; r < X.rows; ++r)
        (X(r, f) <= t ? left : right).push_back(y[r]);
      const double g = cart::information_gain(
          std::span<const double>(y.data(), y.size()), left, right, task);
      if (g > 0.0 && (!best || g > best->gain))
        best = cart::SplitCandidate{f, t, g};
    }
  }
  return best;
}

Matrix random_matrix(datagen::Rng& rng, int n, int d, int levels) {
  Matrix X(n, d);
  for (double& v : X.data)
    v = static_cast<double>(rng.next_u64() % levels) / 2.0;
  return X;
}

}  // namespace

TEST_CASE("impurity basics") {
  std::vector<double> half{0, 0, 1, 1};
  CHECK(cart::impurity(half, Task::classification) == doctest::Approx(0.5));
  std::vector<double> pure{1, 1, 1};
  CHECK(cart::impurity(pure, Task::classification) == doctest::Approx(0.0));
  std::vector<double> skew{0, 0, 0, 1};
  CHECK(cart::impurity(skew, Task::classification) ==
        doctest::Approx(1.0 - 0.5625 - 0.0625));

  std::vector<double> reg{1.0, 3.0};
  CHECK(cart::impurity(reg, Task::regression) == doctest::Approx(1.0));
  CHECK(cart::impurity(pure, Task::regression) == doctest::Approx(0.0));
}

TEST_CASE("information gain of a clean separation") {
  std::vector<double> y{0, 0, 1, 1};
  std::vector<double> l{0, 0}, r{1, 1};
  CHECK(cart::information_gain(y, l, r, Task::classification) ==
        doctest::Approx(0.5));
}

TEST_CASE("best_split matches the brute-force oracle") {
  datagen::Rng rng(71);
  const std::vector<int> features2{0, 1};
  const std::vector<int> features3{0, 1, 2};
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 4 + static_cast<int>(rng.next_u64() % 28);
    const int d = 1 + static_cast<int>(rng.next_u64() % 3);
    const Matrix X = random_matrix(rng, n, d, 6);
    std::vector<double> y(n);
    for (double& v : y) v = static_cast<double>(rng.next_u64() % 3);
    std::vector<int> features(d);
    for (int f = 0; f < d; ++f) features[f] = f;

    for (Task task : {Task::classification, Task::regression}) {
      const auto got = cart::best_split(X, y, features, task);
      const auto want = brute_best_split(X, y, features, task);
      REQUIRE(got.has_value() == want.has_value());
      if (got) {
        CHECK(got->feature == want->feature);
        CHECK(got->threshold == doctest::Approx(want->threshold).epsilon(1e-12));
        CHECK(got->gain == doctest::Approx(want->gain).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("tie-break prefers the lower feature, then lower threshold") {
  // Feature 1 duplicates feature 0; both offer the same best split.
  Matrix X(4, 2);
  for (int r = 0; r < 4; ++r) X(r, 0) = X(r, 1) = r;
  std::vector<double> y{0, 0, 1, 1};
  const auto s = cart::best_split(X, y, std::vector<int>{0, 1},
                                  Task::classification);
  REQUIRE(s.has_value());
  CHECK(s->feature == 0);
  CHECK(s->threshold == doctest::Approx(1.5));
}

TEST_CASE("no positive gain yields no split") {
  Matrix X(4, 1);
  for (int r = 0; r < 4; ++r) X(r, 0) = r;
  std::vector<double> y{0, 1, 0, 1};
  // Constant labels: nothing to gain.
  std::vector<double> constant{1, 1, 1, 1};
  CHECK_FALSE(cart::best_split(X, constant, std::vector<int>{0},
                               Task::classification)
                  .has_value());
  CHECK(cart::best_split(X, y, std::vector<int>{0}, Task::classification)
            .has_value());
}

TEST_CASE("fit_tree separates separable data and respects limits") {
  datagen::Rng rng(5);
  const int n = 64;
  Matrix X(n, 2);
  std::vector<double> y(n);
  for (int r = 0; r < n; ++r) {
    const int cls = r % 4;
    X(r, 0) = (cls & 1) * 4.0 + rng.uniform();
    X(r, 1) = (cls >> 1) * 4.0 + rng.uniform();
    y[r] = cls;
  }
  cart::FitParams params;
  params.depth_limit = 3;
  const cart::DecisionTree tree = cart::fit_tree(X, y, params);
  CHECK(tree.depth() <= 3);
  CHECK(tree.nodes.size() <= 15);
  const auto pred = cart::predict_tree(tree, X);
  for (int r = 0; r < n; ++r) CHECK(pred[r] == y[r]);

  params.depth_limit = 1;
  const cart::DecisionTree stump = cart::fit_tree(X, y, params);
  CHECK(stump.depth() == 1);
  CHECK(stump.internal_node_count() == 1);
  // The stump's root must be the globally best split.
  const auto root = cart::best_split(X, y, std::vector<int>{0, 1},
                                     Task::classification);
  CHECK(stump.nodes[0].feature == root->feature);
  CHECK(stump.nodes[0].threshold == doctest::Approx(root->threshold));
}

TEST_CASE("min_samples_split stops growth") {
  Matrix X(3, 1);
  X(0, 0) = 0;
  X(1, 0) = 1;
  X(2, 0) = 2;
  std::vector<double> y{0, 1, 2};
  cart::FitParams params;
  params.depth_limit = 5;
  params.min_samples_split = 4;
  const cart::DecisionTree tree = cart::fit_tree(X, y, params);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].is_leaf());
}

TEST_CASE("probabilities sum to one and argmax matches predictions") {
  datagen::Rng rng(9);
  Matrix X = random_matrix(rng, 80, 3, 8);
  std::vector<double> y(80);
  for (double& v : y) v = static_cast<double>(rng.next_u64() % 4);
  cart::FitParams params;
  const cart::DecisionTree tree = cart::fit_tree(X, y, params);
  const Matrix proba = cart::predict_proba(tree, X);
  const auto pred = cart::predict_tree(tree, X);
  for (std::size_t r = 0; r < X.rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < proba.cols; ++c) total += proba(r, c);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cart::detail::leaf_argmax(proba.row(r)) == static_cast<int>(pred[r]));
  }
}

TEST_CASE("regression tree predicts leaf means") {
  Matrix X(6, 1);
  std::vector<double> y{1.0, 1.2, 0.8, 5.0, 5.4, 4.6};
  for (int r = 0; r < 6; ++r) X(r, 0) = r < 3 ? 0.0 : 1.0;
  cart::FitParams params;
  params.task = Task::regression;
  params.depth_limit = 1;
  const cart::DecisionTree tree = cart::fit_tree(X, y, params);
  const auto pred = cart::predict_tree(tree, X);
  CHECK(pred[0] == doctest::Approx(1.0));
  CHECK(pred[3] == doctest::Approx(5.0));
}

TEST_CASE("bootstrap rows participate with multiplicity") {
  Matrix X(4, 1);
  for (int r = 0; r < 4; ++r) X(r, 0) = r;
  std::vector<double> y{0, 0, 1, 1};
  const std::vector<int> rows{0, 0, 0, 3};
  cart::FitParams params;
  const cart::DecisionTree tree = cart::fit_tree(X, y, rows, params);
  CHECK(tree.training_indices == rows);
  CHECK(tree.nodes[0].sample_count == 4);
}

TEST_CASE("gain evaluation counter is wired") {
  datagen::Rng rng(13);
  Matrix X = random_matrix(rng, 40, 2, 10);
  std::vector<double> y(40);
  for (double& v : y) v = static_cast<double>(rng.next_u64() % 2);
  long long evals = 0;
  cart::FitParams params;
  params.gain_evals = &evals;
  cart::fit_tree(X, y, params);
  CHECK(evals > 0);
}

TEST_CASE("feature subsampling is deterministic in the seed") {
  datagen::Rng rng(29);
  Matrix X = random_matrix(rng, 100, 8, 12);
  std::vector<double> y(100);
  for (double& v : y) v = static_cast<double>(rng.next_u64() % 3);
  cart::FitParams params;
  params.feature_subsample = 3;
  params.seed = 99;
  const cart::DecisionTree a = cart::fit_tree(X, y, params);
  const cart::DecisionTree b = cart::fit_tree(X, y, params);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].feature == b.nodes[i].feature);
    CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
  }
}
