#pragma once

#include <iosfwd>
#include <string>

#include "hyperdt/forest.hpp"
#include "hyperdt/reference.hpp"

// File formats.
//
// Dataset CSV:
//   # geometry=<hyperboloid|klein|poincare> K=<float> d=<int> task=<t>
//   <coord>,<coord>,...,<label>
// Hyperboloid rows carry d+1 coordinates, klein/poincare rows carry d.
//
// Model file: versioned structured text, one record per line, numbers in
// shortest round-trip decimal form so that load(save(m)) reproduces
// predictions exactly.

namespace hyperdt::io {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

struct DatasetFile {
  Geometry geometry = Geometry::hyperboloid;
  double K = -1.0;
  int d = 0;
  cart::Task task = cart::Task::classification;
  cart::Matrix X;
  std::vector<double> y;
};

void write_dataset(std::ostream& os, const DatasetFile& data);
void write_dataset_file(const std::string& path, const DatasetFile& data);
DatasetFile read_dataset(std::istream& is);
DatasetFile read_dataset_file(const std::string& path);

enum class Backend { fast, reference };
std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct ModelFile {
  int format_version = 1;
  Backend backend = Backend::fast;
  ModelSpec spec;
  forest::Aggregation aggregation = forest::Aggregation::majority_vote;
  std::uint64_t seed = 0;
  int depth_limit = 3;
  int min_samples_split = 2;
  int feature_subsample = 0;
  bool bootstrap = false;
  int n_classes = 0;
  int d = 0;

  // Exactly one of the two is populated, by backend.
  std::vector<cart::DecisionTree> trees;
  std::vector<reference::AngularTree> reference_trees;
};

void write_model(std::ostream& os, const ModelFile& model);
void write_model_file(const std::string& path, const ModelFile& model);
ModelFile read_model(std::istream& is);
ModelFile read_model_file(const std::string& path);

// The tree sections of the model format, without the header; fitting the
// same data presented in different geometries yields identical bytes here.
std::string serialize_trees(const ModelFile& model);

std::vector<double> model_predict(const ModelFile& model,
                                  const cart::Matrix& X_raw);

}  // namespace hyperdt::io
