#include "hyperdt/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hyperdt::reference {

namespace {

using cart::Matrix;
using cart::Task;

constexpr double kDegenerateSin = 1e-12;

struct Builder {
  const Matrix& X;  // Lorentz rows
  std::span<const double> y;
  const cart::FitParams& params;
  int n_classes;
  AngularTree& tree;
  long long* gain_evals;

  int make_leaf(const std::vector<int>& rows) {
    AngularNode node;
    node.sample_count = static_cast<int>(rows.size());
    if (params.task == Task::classification) {
      node.probs.assign(n_classes, 0.0);
      for (int r : rows) node.probs[static_cast<int>(y[r])] += 1.0;
      for (double& p : node.probs) p /= rows.size();
    } else {
      double sum = 0.0;
      for (int r : rows) sum += y[r];
      node.value = sum / rows.size();
    }
    tree.nodes.push_back(std::move(node));
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  int build(const std::vector<int>& rows, int depth) {
    const int m = static_cast<int>(rows.size());
    const int d = static_cast<int>(X.cols) - 1;

    struct Best {
      double gain;
      int feature;
      double theta;
    };
    std::optional<Best> best;

    if (depth < params.depth_limit && m >= params.min_samples_split) {
      std::vector<int> idx(m);
      std::vector<double> ratios(m), thetas(m), values(m), labels(m);
      for (int f = 0; f < d; ++f) {
        // Recompute and re-sort the node's split angles from scratch; the
        // angles are enumerated in ascending Klein-coordinate order.
        for (int i = 0; i < m; ++i) {
          const int r = rows[i];
          ratios[i] = X(r, f + 1) / X(r, 0);
          thetas[i] = geom::arccot(ratios[i]);
        }
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
          return ratios[a] < ratios[b] ||
                 (ratios[a] == ratios[b] && rows[a] < rows[b]);
        });
        for (int i = 0; i < m; ++i) {
          values[i] = ratios[idx[i]];
          labels[i] = y[rows[idx[i]]];
        }

        // Same boundary enumeration and gain arithmetic as the cart
        // engine, inlined here over the angle arrays.
        // Like the original formulation, every candidate recomputes its
        // partition statistics from scratch rather than carrying a running
        // prefix, which is what makes this backend quadratic per node. The
        // counts and sums come out identical either way, so the gains stay
        // bitwise comparable with the cart engine.
        std::optional<Best> feature_best;
        if (params.task == Task::classification) {
          std::vector<int> parent(n_classes, 0);
          for (double l : labels) parent[static_cast<int>(l)]++;
          std::vector<int> left(n_classes, 0);
          for (int i = 0; i + 1 < m; ++i) {
            if (values[i + 1] > values[i]) {
              const double tl = thetas[idx[i]], tr = thetas[idx[i + 1]];
              if (std::sin(tl) < kDegenerateSin || std::sin(tr) < kDegenerateSin)
                continue;
              if (gain_evals) ++*gain_evals;
              std::fill(left.begin(), left.end(), 0);
              for (int j = 0; j <= i; ++j) left[static_cast<int>(labels[j])]++;
              const double g =
                  cart::detail::gain_classification(parent, left, i + 1, m);
              if (g > 0.0 && (!feature_best || g > feature_best->gain)) {
                const double mid =
                    geom::angular_midpoint(geom::SplitAngle(tl),
                                           geom::SplitAngle(tr))
                        .theta;
                feature_best = Best{g, f, mid};
              }
            }
          }
        } else {
          double sum = 0.0, sum_sq = 0.0;
          for (double l : labels) {
            sum += l;
            sum_sq += l * l;
          }
          for (int i = 0; i + 1 < m; ++i) {
            if (values[i + 1] > values[i]) {
              const double tl = thetas[idx[i]], tr = thetas[idx[i + 1]];
              if (std::sin(tl) < kDegenerateSin || std::sin(tr) < kDegenerateSin)
                continue;
              if (gain_evals) ++*gain_evals;
              double lsum = 0.0, lsum_sq = 0.0;
              for (int j = 0; j <= i; ++j) {
                lsum += labels[j];
                lsum_sq += labels[j] * labels[j];
              }
              const double g = cart::detail::gain_regression(sum, sum_sq, m,
                                                             lsum, lsum_sq, i + 1);
              if (g > 0.0 && (!feature_best || g > feature_best->gain)) {
                const double mid =
                    geom::angular_midpoint(geom::SplitAngle(tl),
                                           geom::SplitAngle(tr))
                        .theta;
                feature_best = Best{g, f, mid};
              }
            }
          }
        }
        if (feature_best && (!best || feature_best->gain > best->gain))
          best = feature_best;
      }
    }
    if (!best) return make_leaf(rows);

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
      if (angular_split_sign(X.row(r), best->feature, best->theta))
        right_rows.push_back(r);
      else
        left_rows.push_back(r);
    }

    const int id = static_cast<int>(tree.nodes.size());
    {
      AngularNode node;
      node.feature = best->feature;
      node.theta = best->theta;
      node.sample_count = m;
      tree.nodes.push_back(std::move(node));
    }
    const int left = build(left_rows, depth + 1);
    const int right = build(right_rows, depth + 1);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }
};

}  // namespace

int AngularTree::internal_node_count() const {
  int n = 0;
  for (const AngularNode& node : nodes)
    if (!node.is_leaf()) ++n;
  return n;
}

bool angular_split_sign(std::span<const double> x, int feature, double theta) {
  return x[feature + 1] * std::sin(theta) - x[0] * std::cos(theta) > 0.0;
}

AngularTree fit_reference(const cart::Matrix& X, std::span<const double> y,
                          const cart::FitParams& params,
                          long long* gain_eval_counter) {
  if (X.rows == 0 || X.cols < 2)
    throw std::invalid_argument("fit_reference: need Lorentz rows with >= 2 coords");
  if (y.size() != X.rows)
    throw std::invalid_argument("fit_reference: label count mismatch");
  for (double v : X.data)
    if (!std::isfinite(v)) throw std::invalid_argument("fit_reference: non-finite input");

  AngularTree tree;
  tree.task = params.task;
  tree.ambient_dim = X.cols;
  tree.depth_limit = params.depth_limit;
  if (params.task == Task::classification) {
    int n_classes = 1;
    for (double l : y) n_classes = std::max(n_classes, static_cast<int>(l) + 1);
    tree.n_classes = n_classes;
  }

  std::vector<int> rows(X.rows);
  std::iota(rows.begin(), rows.end(), 0);
  Builder builder{X, y, params, tree.n_classes, tree, gain_eval_counter};
  builder.build(rows, 0);
  return tree;
}

std::vector<double> predict_reference(const AngularTree& tree,
                                      const cart::Matrix& X) {
  if (X.cols != tree.ambient_dim)
    throw std::invalid_argument("predict_reference: dimension mismatch");
  std::vector<double> out(X.rows);
  for (std::size_t r = 0; r < X.rows; ++r) {
    const AngularNode* node = &tree.nodes[0];
    while (!node->is_leaf())
      node = angular_split_sign(X.row(r), node->feature, node->theta)
                 ? &tree.nodes[node->right]
                 : &tree.nodes[node->left];
    out[r] = tree.task == Task::classification
                 ? static_cast<double>(cart::detail::leaf_argmax(node->probs))
                 : node->value;
  }
  return out;
}

}  // namespace hyperdt::reference
