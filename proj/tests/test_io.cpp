#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "hyperdt/datagen.hpp"
#include "hyperdt/forest.hpp"
#include "hyperdt/io.hpp"

using namespace hyperdt;

TEST_CASE("shortest round-trip double formatting") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e308, 0.0, -0.0,
                   std::numeric_limits<double>::denorm_min(),
                   0.2679491924311227, 12345.678901234567}) {
    const std::string s = io::format_double(v);
    const double back = io::parse_double(s);
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  CHECK(io::format_double(0.1) == "0.1");
  CHECK_THROWS(io::parse_double("1.2.3"));
  CHECK_THROWS(io::parse_double("abc"));
}

TEST_CASE("dataset files round trip bitwise") {
  datagen::MixtureConfig cfg;
  cfg.n_classes = 3;
  cfg.n_samples = 50;
  cfg.seed = 5;
  const datagen::Dataset data = datagen::sample_mixture(cfg);

  io::DatasetFile file;
  file.geometry = Geometry::hyperboloid;
  file.K = -1.0;
  file.d = 2;
  file.task = cart::Task::classification;
  file.X = data.X;
  file.y = data.y;

  std::stringstream ss;
  io::write_dataset(ss, file);
  const io::DatasetFile back = io::read_dataset(ss);
  CHECK(back.geometry == file.geometry);
  CHECK(back.K == file.K);
  CHECK(back.d == file.d);
  CHECK(back.task == file.task);
  CHECK(back.X.data == file.X.data);
  CHECK(back.y == file.y);
}

TEST_CASE("malformed datasets are rejected") {
  std::stringstream no_header("1,2,3\n");
  CHECK_THROWS(io::read_dataset(no_header));
  std::stringstream bad_columns(
      "# geometry=klein K=-1 d=2 task=classification\n0.1,0\n");
  CHECK_THROWS(io::read_dataset(bad_columns));
  std::stringstream bad_number(
      "# geometry=klein K=-1 d=1 task=classification\nx,0\n");
  CHECK_THROWS(io::read_dataset(bad_number));
}

TEST_CASE("model files round trip and preserve predictions") {
  datagen::MixtureConfig cfg;
  cfg.n_classes = 4;
  cfg.n_samples = 300;
  cfg.seed = 11;
  const datagen::Dataset data = datagen::sample_mixture(cfg);
  const ModelSpec spec{geom::Curvature(-1.0), Geometry::hyperboloid,
                       cart::Task::classification};

  forest::ForestParams params;
  params.n_trees = 5;
  params.seed = 2;
  const forest::Forest f = forest::fit_forest(data.X, data.y, spec, params);

  io::ModelFile model;
  model.spec = spec;
  model.aggregation = f.aggregation;
  model.seed = params.seed;
  model.bootstrap = true;
  model.n_classes = 4;
  model.d = 2;
  for (const HyperbolicTree& t : f.trees) model.trees.push_back(t.tree);

  std::stringstream ss;
  io::write_model(ss, model);
  const io::ModelFile back = io::read_model(ss);

  // Save -> load -> save is byte identical.
  std::stringstream again;
  io::write_model(again, back);
  CHECK(again.str() == ss.str());

  // Loaded model predicts exactly like the in-memory forest.
  CHECK(io::model_predict(back, data.X) == forest::predict_forest(f, data.X));
}

TEST_CASE("reference-backend models round trip") {
  datagen::MixtureConfig cfg;
  cfg.n_classes = 3;
  cfg.n_samples = 120;
  cfg.seed = 19;
  const datagen::Dataset data = datagen::sample_mixture(cfg);

  cart::FitParams params;
  io::ModelFile model;
  model.backend = io::Backend::reference;
  model.spec = ModelSpec{geom::Curvature(-1.0), Geometry::hyperboloid,
                         cart::Task::classification};
  model.d = 2;
  model.reference_trees.push_back(
      reference::fit_reference(data.X, data.y, params));
  model.n_classes = model.reference_trees[0].n_classes;

  std::stringstream ss;
  io::write_model(ss, model);
  const io::ModelFile back = io::read_model(ss);
  REQUIRE(back.backend == io::Backend::reference);
  CHECK(io::model_predict(back, data.X) ==
        reference::predict_reference(model.reference_trees[0], data.X));
}

TEST_CASE("truncated and corrupt model files are rejected") {
  std::stringstream not_a_model("hello\n");
  CHECK_THROWS(io::read_model(not_a_model));
  std::stringstream truncated("hyperdt-model v1\nbackend fast\n");
  CHECK_THROWS(io::read_model(truncated));
}
