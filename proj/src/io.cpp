#include "hyperdt/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hyperdt::io {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad number: '" + s + "'");
  return v;
}

std::string to_string(Backend b) {
  return b == Backend::fast ? "fast" : "reference";
}

Backend backend_from_string(const std::string& s) {
  if (s == "fast") return Backend::fast;
  if (s == "reference") return Backend::reference;
  throw std::invalid_argument("unknown backend: " + s);
}

static std::string task_name(cart::Task t) {
  return t == cart::Task::classification ? "classification" : "regression";
}

static cart::Task task_from_string(const std::string& s) {
  if (s == "classification") return cart::Task::classification;
  if (s == "regression") return cart::Task::regression;
  throw std::invalid_argument("unknown task: " + s);
}

void write_dataset(std::ostream& os, const DatasetFile& data) {
  os << "# geometry=" << to_string(data.geometry) << " K=" << format_double(data.K)
     << " d=" << data.d << " task=" << task_name(data.task) << "\n";
  for (std::size_t r = 0; r < data.X.rows; ++r) {
    for (std::size_t c = 0; c < data.X.cols; ++c)
      os << format_double(data.X(r, c)) << ',';
    os << format_double(data.y[r]) << "\n";
  }
}

void write_dataset_file(const std::string& path, const DatasetFile& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_dataset(os, data);
}

static std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

DatasetFile read_dataset(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("# ", 0) != 0)
    throw std::runtime_error("dataset: missing header line");

  DatasetFile data;
  std::istringstream hs(header.substr(2));
  std::string kv;
  while (hs >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("dataset: malformed header field '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "geometry") data.geometry = geometry_from_string(value);
    else if (key == "K") data.K = parse_double(value);
    else if (key == "d") data.d = std::stoi(value);
    else if (key == "task") data.task = task_from_string(value);
    else throw std::runtime_error("dataset: unknown header field '" + key + "'");
  }
  const std::size_t n_coords =
      data.geometry == Geometry::hyperboloid ? data.d + 1 : data.d;

  std::vector<double> coords;
  std::string line;
  std::size_t n_rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != n_coords + 1)
      throw std::runtime_error("dataset: row " + std::to_string(n_rows) +
                               " has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(n_coords + 1));
    for (std::size_t c = 0; c < n_coords; ++c)
      coords.push_back(parse_double(fields[c]));
    data.y.push_back(parse_double(fields.back()));
    ++n_rows;
  }
  data.X.rows = n_rows;
  data.X.cols = n_coords;
  data.X.data = std::move(coords);
  return data;
}

DatasetFile read_dataset_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_dataset(is);
}

namespace {

void write_cart_tree(std::ostream& os, const cart::DecisionTree& tree, int id) {
  os << "tree " << id << " nodes " << tree.nodes.size() << "\n";
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const cart::Node& n = tree.nodes[i];
    if (n.is_leaf()) {
      os << "node " << i << " leaf " << n.sample_count;
      if (!n.probs.empty())
        for (double p : n.probs) os << ' ' << format_double(p);
      else
        os << ' ' << format_double(n.value);
      os << "\n";
    } else {
      os << "node " << i << " split " << n.feature << ' '
         << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
         << n.sample_count << "\n";
    }
  }
}

void write_reference_tree(std::ostream& os, const reference::AngularTree& tree,
                          int id) {
  os << "tree " << id << " nodes " << tree.nodes.size() << "\n";
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const reference::AngularNode& n = tree.nodes[i];
    if (n.is_leaf()) {
      os << "node " << i << " leaf " << n.sample_count;
      if (!n.probs.empty())
        for (double p : n.probs) os << ' ' << format_double(p);
      else
        os << ' ' << format_double(n.value);
      os << "\n";
    } else {
      os << "node " << i << " split " << n.feature << ' '
         << format_double(n.theta) << ' ' << n.left << ' ' << n.right << ' '
         << n.sample_count << "\n";
    }
  }
}

}  // namespace

std::string serialize_trees(const ModelFile& model) {
  std::ostringstream os;
  if (model.backend == Backend::fast) {
    os << "trees " << model.trees.size() << "\n";
    for (std::size_t i = 0; i < model.trees.size(); ++i)
      write_cart_tree(os, model.trees[i], static_cast<int>(i));
  } else {
    os << "trees " << model.reference_trees.size() << "\n";
    for (std::size_t i = 0; i < model.reference_trees.size(); ++i)
      write_reference_tree(os, model.reference_trees[i], static_cast<int>(i));
  }
  return os.str();
}

void write_model(std::ostream& os, const ModelFile& model) {
  os << "hyperdt-model v" << model.format_version << "\n"
     << "backend " << to_string(model.backend) << "\n"
     << "geometry " << to_string(model.spec.input_geometry) << "\n"
     << "K " << format_double(model.spec.K.K) << "\n"
     << "task " << task_name(model.spec.task) << "\n"
     << "n_classes " << model.n_classes << "\n"
     << "d " << model.d << "\n"
     << "aggregation " << forest::to_string(model.aggregation) << "\n"
     << "seed " << model.seed << "\n"
     << "depth_limit " << model.depth_limit << "\n"
     << "min_samples_split " << model.min_samples_split << "\n"
     << "feature_subsample " << model.feature_subsample << "\n"
     << "bootstrap " << (model.bootstrap ? 1 : 0) << "\n"
     << serialize_trees(model) << "end\n";
}

void write_model_file(const std::string& path, const ModelFile& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_model(os, model);
}

namespace {

std::vector<std::string> next_record(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) return split(line, ' ');
  }
  throw std::runtime_error("model: unexpected end of file");
}

void expect(const std::vector<std::string>& rec, const std::string& tag,
            std::size_t min_fields) {
  if (rec.empty() || rec[0] != tag || rec.size() < min_fields)
    throw std::runtime_error("model: expected '" + tag + "' record");
}

template <typename NodeT>
void read_nodes(std::istream& is, std::vector<NodeT>& nodes, std::size_t count,
                cart::Task task, int n_classes) {
  nodes.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rec = next_record(is);
    expect(rec, "node", 4);
    const std::size_t id = std::stoul(rec[1]);
    if (id >= count) throw std::runtime_error("model: node id out of range");
    NodeT& n = nodes[id];
    if (rec[2] == "split") {
      if (rec.size() != 8) throw std::runtime_error("model: malformed split node");
      n.feature = std::stoi(rec[3]);
      if constexpr (requires { n.threshold; })
        n.threshold = parse_double(rec[4]);
      else
        n.theta = parse_double(rec[4]);
      n.left = std::stoi(rec[5]);
      n.right = std::stoi(rec[6]);
      n.sample_count = std::stoi(rec[7]);
    } else if (rec[2] == "leaf") {
      n.sample_count = std::stoi(rec[3]);
      if (task == cart::Task::classification) {
        if (rec.size() != 4 + static_cast<std::size_t>(n_classes))
          throw std::runtime_error("model: leaf probability count mismatch");
        for (int c = 0; c < n_classes; ++c)
          n.probs.push_back(parse_double(rec[4 + c]));
      } else {
        if (rec.size() != 5) throw std::runtime_error("model: malformed leaf");
        n.value = parse_double(rec[4]);
      }
    } else {
      throw std::runtime_error("model: unknown node kind '" + rec[2] + "'");
    }
  }
}

}  // namespace

ModelFile read_model(std::istream& is) {
  ModelFile model;
  auto rec = next_record(is);
  if (rec.size() != 2 || rec[0] != "hyperdt-model" || rec[1] != "v1")
    throw std::runtime_error("model: unsupported format");
  model.format_version = 1;

  rec = next_record(is);
  expect(rec, "backend", 2);
  model.backend = backend_from_string(rec[1]);
  rec = next_record(is);
  expect(rec, "geometry", 2);
  model.spec.input_geometry = geometry_from_string(rec[1]);
  rec = next_record(is);
  expect(rec, "K", 2);
  model.spec.K = geom::Curvature(parse_double(rec[1]));
  rec = next_record(is);
  expect(rec, "task", 2);
  model.spec.task = task_from_string(rec[1]);
  rec = next_record(is);
  expect(rec, "n_classes", 2);
  model.n_classes = std::stoi(rec[1]);
  rec = next_record(is);
  expect(rec, "d", 2);
  model.d = std::stoi(rec[1]);
  rec = next_record(is);
  expect(rec, "aggregation", 2);
  model.aggregation = forest::aggregation_from_string(rec[1]);
  rec = next_record(is);
  expect(rec, "seed", 2);
  model.seed = std::stoull(rec[1]);
  rec = next_record(is);
  expect(rec, "depth_limit", 2);
  model.depth_limit = std::stoi(rec[1]);
  rec = next_record(is);
  expect(rec, "min_samples_split", 2);
  model.min_samples_split = std::stoi(rec[1]);
  rec = next_record(is);
  expect(rec, "feature_subsample", 2);
  model.feature_subsample = std::stoi(rec[1]);
  rec = next_record(is);
  expect(rec, "bootstrap", 2);
  model.bootstrap = std::stoi(rec[1]) != 0;

  rec = next_record(is);
  expect(rec, "trees", 2);
  const std::size_t n_trees = std::stoul(rec[1]);
  for (std::size_t t = 0; t < n_trees; ++t) {
    rec = next_record(is);
    expect(rec, "tree", 4);
    const std::size_t n_nodes = std::stoul(rec[3]);
    if (model.backend == Backend::fast) {
      cart::DecisionTree tree;
      tree.task = model.spec.task;
      tree.n_classes = model.n_classes;
      tree.n_features = model.d;
      tree.depth_limit = model.depth_limit;
      read_nodes(is, tree.nodes, n_nodes, model.spec.task, model.n_classes);
      model.trees.push_back(std::move(tree));
    } else {
      reference::AngularTree tree;
      tree.task = model.spec.task;
      tree.n_classes = model.n_classes;
      tree.ambient_dim = model.d + 1;
      tree.depth_limit = model.depth_limit;
      read_nodes(is, tree.nodes, n_nodes, model.spec.task, model.n_classes);
      model.reference_trees.push_back(std::move(tree));
    }
  }
  rec = next_record(is);
  expect(rec, "end", 1);
  return model;
}

ModelFile read_model_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_model(is);
}

std::vector<double> model_predict(const ModelFile& model,
                                  const cart::Matrix& X_raw) {
  if (model.backend == Backend::reference) {
    if (model.spec.input_geometry != Geometry::hyperboloid)
      throw std::runtime_error("reference models require hyperboloid input");
    if (model.reference_trees.size() == 1)
      return reference::predict_reference(model.reference_trees[0], X_raw);
    // Majority vote across reference trees.
    const std::size_t n = X_raw.rows;
    cart::Matrix tally(n, static_cast<std::size_t>(std::max(1, model.n_classes)));
    std::vector<double> acc(n, 0.0);
    for (const auto& tree : model.reference_trees) {
      const auto p = reference::predict_reference(tree, X_raw);
      for (std::size_t i = 0; i < n; ++i) {
        if (model.spec.task == cart::Task::classification)
          tally(i, static_cast<std::size_t>(p[i])) += 1.0;
        else
          acc[i] += p[i];
      }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = model.spec.task == cart::Task::classification
                   ? static_cast<double>(cart::detail::leaf_argmax(tally.row(i)))
                   : acc[i] / model.reference_trees.size();
    return out;
  }

  forest::Forest f;
  f.spec = model.spec;
  f.aggregation = model.aggregation;
  f.seed = model.seed;
  for (const auto& tree : model.trees)
    f.trees.push_back(HyperbolicTree{model.spec, tree, true});
  return forest::predict_forest(f, X_raw);
}

}  // namespace hyperdt::io
