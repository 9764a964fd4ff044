#include <cmath>

#include "doctest.h"
#include "hyperdt/datagen.hpp"
#include "hyperdt/hyperbolic_tree.hpp"

using namespace hyperdt;
using cart::Matrix;

namespace {

datagen::Dataset make_data(std::uint64_t seed, int n = 200, int classes = 4,
                           int dim = 2, double K = -1.0) {
  datagen::MixtureConfig cfg;
  cfg.n_classes = classes;
  cfg.n_samples = n;
  cfg.dim = dim;
  cfg.K = K;
  cfg.seed = seed;
  return datagen::sample_mixture(cfg);
}

}  // namespace

TEST_CASE("geometry names round trip") {
  for (Geometry g : {Geometry::hyperboloid, Geometry::klein, Geometry::poincare})
    CHECK(geometry_from_string(to_string(g)) == g);
  CHECK_THROWS(geometry_from_string("euclidean"));
}

TEST_CASE("preprocess projects each geometry to the same klein coordinates") {
  const datagen::Dataset data = make_data(2, 50);
  const geom::Curvature K(-1.0);
  const ModelSpec hyper{K, Geometry::hyperboloid, cart::Task::classification};
  const Matrix klein = preprocess(data.X, hyper);
  REQUIRE(klein.cols == 2);
  for (std::size_t r = 0; r < klein.rows; ++r)
    for (std::size_t c = 0; c < 2; ++c)
      CHECK(klein(r, c) == data.X(r, c + 1) / data.X(r, 0));

  const ModelSpec as_klein{K, Geometry::klein, cart::Task::classification};
  const Matrix passthrough = preprocess(klein, as_klein);
  CHECK(passthrough.data == klein.data);

  Matrix poincare(klein.rows, 2);
  for (std::size_t r = 0; r < klein.rows; ++r) {
    const geom::Vec p = geom::klein_to_poincare(
        geom::Vec(klein.row(r).begin(), klein.row(r).end()), K);
    poincare(r, 0) = p[0];
    poincare(r, 1) = p[1];
  }
  const ModelSpec as_poincare{K, Geometry::poincare, cart::Task::classification};
  const Matrix recovered = preprocess(poincare, as_poincare);
  for (std::size_t i = 0; i < recovered.data.size(); ++i)
    CHECK(recovered.data[i] == doctest::Approx(klein.data[i]).epsilon(1e-12));
}

TEST_CASE("preprocess rejects invalid rows by number") {
  Matrix bad(2, 3);
  bad(0, 0) = 1.0;  // valid K=-1 origin
  bad(1, 0) = 5.0;  // not on the sheet
  bad(1, 1) = 0.1;
  const ModelSpec spec{geom::Curvature(-1.0), Geometry::hyperboloid,
                       cart::Task::classification};
  try {
    preprocess(bad, spec);
    FAIL("expected preprocess to throw");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }

  Matrix outside(1, 2);
  outside(0, 0) = 1.5;
  const ModelSpec klein_spec{geom::Curvature(-1.0), Geometry::klein,
                             cart::Task::classification};
  CHECK_THROWS(preprocess(outside, klein_spec));
}

TEST_CASE("thresholds become einstein midpoints of the straddling values") {
  const datagen::Dataset data = make_data(7);
  const ModelSpec spec{geom::Curvature(-1.0), Geometry::hyperboloid,
                       cart::Task::classification};
  cart::FitParams params;
  const HyperbolicTree model = fit(data.X, data.y, spec, params);
  const Matrix klein = preprocess(data.X, spec);

  // Re-derive each node's active rows and check its threshold.
  std::vector<std::vector<int>> active(model.tree.nodes.size());
  for (std::size_t r = 0; r < klein.rows; ++r) active[0].push_back(r);
  int checked = 0;
  for (std::size_t i = 0; i < model.tree.nodes.size(); ++i) {
    const cart::Node& node = model.tree.nodes[i];
    if (node.is_leaf()) continue;
    double L = -2.0, R = 2.0;
    for (int r : active[i]) {
      const double v = klein(r, node.feature);
      if (v <= node.threshold) {
        L = std::max(L, v);
        active[node.left].push_back(r);
      } else {
        R = std::min(R, v);
        active[node.right].push_back(r);
      }
    }
    REQUIRE(L > -2.0);
    REQUIRE(R < 2.0);
    CHECK(node.threshold ==
          doctest::Approx(geom::scalar_einstein_midpoint(L, R, spec.K))
              .epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("adjustment leaves training predictions unchanged") {
  const datagen::Dataset data = make_data(11, 300, 6);
  const ModelSpec spec{geom::Curvature(-1.0), Geometry::hyperboloid,
                       cart::Task::classification};
  const Matrix klein = preprocess(data.X, spec);
  cart::FitParams params;
  cart::DecisionTree interim = cart::fit_tree(klein, data.y, params);
  const auto before = cart::predict_tree(interim, klein);
  const auto warnings = adjust_thresholds(interim, klein, spec.K);
  CHECK(warnings.empty());
  CHECK(cart::predict_tree(interim, klein) == before);
}

TEST_CASE("adjusting a foreign tree warns instead of throwing") {
  const datagen::Dataset data = make_data(13, 100);
  const ModelSpec spec{geom::Curvature(-1.0), Geometry::hyperboloid,
                       cart::Task::classification};
  const Matrix klein = preprocess(data.X, spec);
  cart::FitParams params;
  cart::DecisionTree tree = cart::fit_tree(klein, data.y, params);

  // Push the root threshold past every training value on its feature.
  REQUIRE_FALSE(tree.nodes[0].is_leaf());
  tree.nodes[0].threshold = 0.999;
  const auto warnings = adjust_thresholds(tree, klein, spec.K);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("selective prediction agrees with the simple path") {
  const datagen::Dataset data = make_data(17, 250, 5);
  const ModelSpec spec{geom::Curvature(-1.0), Geometry::hyperboloid,
                       cart::Task::classification};
  cart::FitParams params;
  const HyperbolicTree model = fit(data.X, data.y, spec, params);

  long long ratio_evals = 0;
  const auto simple = predict_simple(model, data.X);
  const auto selective = predict_selective(model, data.X, &ratio_evals);
  CHECK(simple == selective);
  CHECK(ratio_evals > 0);
  // At most depth ratios per row.
  CHECK(ratio_evals <= static_cast<long long>(data.X.rows) * model.tree.depth());
}

TEST_CASE("fit on klein input gives the identical tree") {
  const datagen::Dataset data = make_data(19, 150, 3);
  const ModelSpec hyper{geom::Curvature(-1.0), Geometry::hyperboloid,
                        cart::Task::classification};
  const Matrix klein = preprocess(data.X, hyper);
  const ModelSpec as_klein{geom::Curvature(-1.0), Geometry::klein,
                           cart::Task::classification};
  cart::FitParams params;
  const HyperbolicTree a = fit(data.X, data.y, hyper, params);
  const HyperbolicTree b = fit(klein, data.y, as_klein, params);
  REQUIRE(a.tree.nodes.size() == b.tree.nodes.size());
  for (std::size_t i = 0; i < a.tree.nodes.size(); ++i) {
    CHECK(a.tree.nodes[i].feature == b.tree.nodes[i].feature);
    CHECK(a.tree.nodes[i].threshold == b.tree.nodes[i].threshold);
  }
}
