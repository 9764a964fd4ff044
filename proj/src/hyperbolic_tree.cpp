#include "hyperdt/hyperbolic_tree.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hyperdt {

std::string to_string(Geometry g) {
  switch (g) {
    case Geometry::hyperboloid: return "hyperboloid";
    case Geometry::klein: return "klein";
    case Geometry::poincare: return "poincare";
  }
  return "?";
}

Geometry geometry_from_string(const std::string& s) {
  if (s == "hyperboloid") return Geometry::hyperboloid;
  if (s == "klein") return Geometry::klein;
  if (s == "poincare") return Geometry::poincare;
  throw std::invalid_argument("unknown geometry: " + s);
}

cart::Matrix preprocess(const cart::Matrix& X_raw, const ModelSpec& spec) {
  const std::size_t n = X_raw.rows;
  if (spec.input_geometry == Geometry::hyperboloid) {
    if (X_raw.cols < 2)
      throw std::invalid_argument("hyperboloid input needs >= 2 columns");
    cart::Matrix out(n, X_raw.cols - 1);
    for (std::size_t r = 0; r < n; ++r) {
      try {
        geom::normalize_lorentz(X_raw.row(r), spec.K);
      } catch (const std::exception& e) {
        throw std::invalid_argument("row " + std::to_string(r) + ": " + e.what());
      }
      const double u0 = X_raw(r, 0);
      for (std::size_t c = 1; c < X_raw.cols; ++c)
        out(r, c - 1) = X_raw(r, c) / u0;
    }
    return out;
  }

  cart::Matrix out(n, X_raw.cols);
  for (std::size_t r = 0; r < n; ++r) {
    if (!geom::is_in_unit_ball(X_raw.row(r)))
      throw std::invalid_argument("row " + std::to_string(r) +
                                  ": point outside the ball");
    if (spec.input_geometry == Geometry::klein) {
      for (std::size_t c = 0; c < X_raw.cols; ++c) out(r, c) = X_raw(r, c);
    } else {
      const auto k = geom::poincare_to_klein(X_raw.row(r), spec.K);
      for (std::size_t c = 0; c < X_raw.cols; ++c) out(r, c) = k[c];
    }
  }
  return out;
}

namespace {

struct Adjuster {
  cart::DecisionTree& tree;
  const cart::Matrix& X;
  geom::Curvature K;
  std::vector<AdjustWarning> warnings;

  void visit(int id, std::vector<int>& rows) {
    cart::Node& node = tree.nodes[id];
    if (node.is_leaf()) return;

    const int f = node.feature;
    const double t = node.threshold;
    std::vector<int> left_rows, right_rows;
    bool have_l = false, have_r = false;
    double L = 0.0, R = 0.0;
    for (int r : rows) {
      const double v = X(r, f);
      if (v <= t) {
        left_rows.push_back(r);
        if (!have_l || v > L) { L = v; have_l = true; }
      } else {
        right_rows.push_back(r);
        if (!have_r || v < R) { R = v; have_r = true; }
      }
    }

    if (have_l && have_r) {
      node.threshold = geom::scalar_einstein_midpoint(L, R, K);
    } else {
      warnings.push_back(
          {id, "no straddling sample pair; threshold left unchanged"});
    }
    rows.clear();
    visit(node.left, left_rows);
    visit(node.right, right_rows);
  }
};

}  // namespace

std::vector<AdjustWarning> adjust_thresholds(cart::DecisionTree& tree,
                                             const cart::Matrix& X_klein,
                                             geom::Curvature K) {
  std::vector<int> rows = tree.training_indices;
  if (rows.empty()) {
    rows.resize(X_klein.rows);
    std::iota(rows.begin(), rows.end(), 0);
  }
  Adjuster adjuster{tree, X_klein, K, {}};
  adjuster.visit(0, rows);
  return adjuster.warnings;
}

HyperbolicTree fit(const cart::Matrix& X_raw, std::span<const double> y,
                   const ModelSpec& spec, const cart::FitParams& params) {
  std::vector<int> rows(X_raw.rows);
  std::iota(rows.begin(), rows.end(), 0);
  return fit(X_raw, y, rows, spec, params);
}

HyperbolicTree fit(const cart::Matrix& X_raw, std::span<const double> y,
                   std::span<const int> rows, const ModelSpec& spec,
                   const cart::FitParams& params) {
  if (params.task != spec.task)
    throw std::invalid_argument("fit: task mismatch between spec and params");
  const cart::Matrix X_klein = preprocess(X_raw, spec);
  HyperbolicTree model{spec, cart::fit_tree(X_klein, y, rows, params), false};
  adjust_thresholds(model.tree, X_klein, spec.K);
  model.postprocessed = true;
  return model;
}

std::vector<double> predict_simple(const HyperbolicTree& model,
                                   const cart::Matrix& X_raw) {
  if (X_raw.rows == 0) return {};
  return cart::predict_tree(model.tree, preprocess(X_raw, model.spec));
}

std::vector<double> predict_selective(const HyperbolicTree& model,
                                      const cart::Matrix& X_raw,
                                      long long* ratio_evals) {
  if (model.spec.input_geometry != Geometry::hyperboloid)
    return predict_simple(model, X_raw);
  if (X_raw.rows == 0) return {};
  if (X_raw.cols != model.tree.n_features + 1)
    throw std::invalid_argument("predict_selective: dimension mismatch");

  const cart::DecisionTree& tree = model.tree;
  std::vector<double> out(X_raw.rows);
  for (std::size_t r = 0; r < X_raw.rows; ++r) {
    const auto x = X_raw.row(r);
    const cart::Node* node = &tree.nodes[0];
    while (!node->is_leaf()) {
      const double ratio = x[node->feature + 1] / x[0];
      if (ratio_evals) ++*ratio_evals;
      node = ratio <= node->threshold ? &tree.nodes[node->left]
                                      : &tree.nodes[node->right];
    }
    out[r] = tree.task == cart::Task::classification
                 ? static_cast<double>(cart::detail::leaf_argmax(node->probs))
                 : node->value;
  }
  return out;
}

}  // namespace hyperdt
