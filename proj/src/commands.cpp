#include "hyperdt/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "hyperdt/forest.hpp"

namespace hyperdt::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Gain of the rule value <= threshold on the selected rows.
double split_gain(const cart::Matrix& Xk, std::span<const double> y,
                  std::span<const int> rows, int feature, double threshold,
                  cart::Task task) {
  std::vector<double> labels, left, right;
  for (int r : rows) {
    labels.push_back(y[r]);
    (Xk(r, feature) <= threshold ? left : right).push_back(y[r]);
  }
  if (left.empty() || right.empty()) return 0.0;
  return cart::information_gain(labels, left, right, task);
}

// Best and second-best candidate gains over all features at one node.
// Equal-best candidates land in `second`, so best - second is the tie margin.
void scan_candidate_gains(const cart::Matrix& Xk, std::span<const double> y,
                          std::span<const int> rows, cart::Task task,
                          double& best, double& second) {
  best = second = -1.0;
  const int n = static_cast<int>(rows.size());
  int n_classes = 0;
  if (task == cart::Task::classification)
    for (int r : rows) n_classes = std::max(n_classes, static_cast<int>(y[r]) + 1);

  std::vector<std::pair<double, double>> vl(n);  // (value, label)
  for (std::size_t f = 0; f < Xk.cols; ++f) {
    for (int i = 0; i < n; ++i) vl[i] = {Xk(rows[i], f), y[rows[i]]};
    std::sort(vl.begin(), vl.end());

    std::vector<int> parent(n_classes, 0), left_counts(n_classes, 0);
    double sum = 0.0, sum_sq = 0.0, left_sum = 0.0, left_sum_sq = 0.0;
    if (task == cart::Task::classification) {
      for (auto& [v, l] : vl) ++parent[static_cast<int>(l)];
    } else {
      for (auto& [v, l] : vl) sum += l, sum_sq += l * l;
    }
    for (int i = 0; i < n - 1; ++i) {
      const auto& [v, l] = vl[i];
      if (task == cart::Task::classification)
        ++left_counts[static_cast<int>(l)];
      else
        left_sum += l, left_sum_sq += l * l;
      if (v == vl[i + 1].first) continue;
      const double g =
          task == cart::Task::classification
              ? cart::detail::gain_classification(parent, left_counts, i + 1, n)
              : cart::detail::gain_regression(sum, sum_sq, n, left_sum,
                                              left_sum_sq, i + 1);
      if (g > best) {
        second = best;
        best = g;
      } else if (g > second) {
        second = g;
      }
    }
  }
}

double agreement(std::span<const double> a, std::span<const double> b) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return a.empty() ? 1.0 : static_cast<double>(same) / a.size();
}

}  // namespace

CompareRow compare_seed(const CompareConfig& cfg) {
  const datagen::Dataset train = datagen::sample_mixture(cfg.data);
  datagen::MixtureConfig test_cfg = cfg.data;
  test_cfg.seed = forest::derive_seed(cfg.data.seed, 0x7e57);
  if (cfg.test_samples > 0) test_cfg.n_samples = cfg.test_samples;
  const datagen::Dataset test = datagen::sample_mixture(test_cfg);

  const ModelSpec spec{geom::Curvature(cfg.data.K), Geometry::hyperboloid,
                       cfg.data.task};
  cart::FitParams fit_params;
  fit_params.depth_limit = cfg.depth_limit;
  fit_params.task = cfg.data.task;

  const HyperbolicTree fast = fit(train.X, train.y, spec, fit_params);
  const reference::AngularTree ref =
      reference::fit_reference(train.X, train.y, fit_params);
  const cart::Matrix Xk = preprocess(train.X, spec);

  CompareRow row;
  row.seed = cfg.data.seed;
  row.tie_free = true;

  std::vector<int> all_rows(train.X.rows);
  std::iota(all_rows.begin(), all_rows.end(), 0);

  std::function<void(int, int, std::vector<int>&)> walk =
      [&](int fi, int ri, std::vector<int>& rows) {
        const cart::Node& fn = fast.tree.nodes[fi];
        const reference::AngularNode& rn = ref.nodes[ri];
        if (fn.is_leaf() && rn.is_leaf()) return;
        ++row.nodes;
        if (fn.is_leaf() != rn.is_leaf()) {
          ++row.mismatch;
          row.tie_free = false;
          return;
        }
        double best, second;
        scan_candidate_gains(Xk, train.y, rows, cfg.data.task, best, second);
        if (second >= 0.0 && best - second <= 1e-4) row.tie_free = false;

        const double ref_cot = std::cos(rn.theta) / std::sin(rn.theta);
        if (fn.feature == rn.feature &&
            std::abs(fn.threshold - ref_cot) < 1e-9) {
          ++row.exact;
          std::vector<int> left, right;
          for (int r : rows)
            (Xk(r, fn.feature) <= fn.threshold ? left : right).push_back(r);
          walk(fn.left, rn.left, left);
          walk(fn.right, rn.right, right);
          return;
        }
        const double g_fast = split_gain(Xk, train.y, rows, fn.feature,
                                         fn.threshold, cfg.data.task);
        const double g_ref =
            split_gain(Xk, train.y, rows, rn.feature, ref_cot, cfg.data.task);
        if (std::abs(g_fast - g_ref) <= 1e-4)
          ++row.tie_equiv;
        else
          ++row.mismatch;
      };
  walk(0, 0, all_rows);

  row.train_agree = agreement(predict_simple(fast, train.X),
                              predict_reference(ref, train.X));
  row.test_agree = agreement(predict_simple(fast, test.X),
                             predict_reference(ref, test.X));
  return row;
}

double time_fit(io::Backend backend, const cart::Matrix& X_lorentz,
                std::span<const double> y, int depth_limit, int repeats) {
  const ModelSpec spec{geom::Curvature(-1.0), Geometry::hyperboloid,
                       cart::Task::classification};
  cart::FitParams params;
  params.depth_limit = depth_limit;
  std::vector<double> times;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    const auto t0 = Clock::now();
    if (backend == io::Backend::fast) {
      volatile int sink = fit(X_lorentz, y, spec, params).tree.nodes.size();
      (void)sink;
    } else {
      volatile int sink =
          reference::fit_reference(X_lorentz, y, params).nodes.size();
      (void)sink;
    }
    times.push_back(seconds_since(t0));
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

namespace {

cart::Task parse_task(const std::string& s) {
  if (s == "classification") return cart::Task::classification;
  if (s == "regression") return cart::Task::regression;
  throw CLI::ValidationError("--task", "must be classification or regression");
}

int count_classes(std::span<const double> y) {
  int n = 0;
  for (double v : y) n = std::max(n, static_cast<int>(v) + 1);
  return n;
}

struct GenerateArgs {
  std::string out, task = "classification", geometry = "hyperboloid";
  datagen::MixtureConfig cfg;
};

void run_generate(const GenerateArgs& a, std::ostream& os) {
  datagen::MixtureConfig cfg = a.cfg;
  cfg.task = parse_task(a.task);
  const Geometry geometry = geometry_from_string(a.geometry);
  const datagen::Dataset data = datagen::sample_mixture(cfg);

  io::DatasetFile file;
  file.geometry = geometry;
  file.K = cfg.K;
  file.d = cfg.dim;
  file.task = cfg.task;
  file.y = data.y;
  if (geometry == Geometry::hyperboloid) {
    file.X = data.X;
  } else {
    file.X = cart::Matrix(data.X.rows, cfg.dim);
    for (std::size_t r = 0; r < data.X.rows; ++r) {
      geom::Vec klein(cfg.dim);
      for (int c = 0; c < cfg.dim; ++c)
        klein[c] = data.X(r, c + 1) / data.X(r, 0);
      const geom::Vec v =
          geometry == Geometry::klein
              ? klein
              : geom::klein_to_poincare(klein, geom::Curvature(cfg.K));
      for (int c = 0; c < cfg.dim; ++c) file.X(r, c) = v[c];
    }
  }
  io::write_dataset_file(a.out, file);
  os << "wrote " << a.out << ": n=" << data.X.rows << " d=" << cfg.dim
     << " classes=" << cfg.n_classes << " geometry=" << a.geometry
     << " task=" << a.task << "\n";
}

struct TrainArgs {
  std::string data, out, backend = "fast", task;
  std::string geometry;  // optional cross-checks against the file header
  double K = 0.0;
  bool have_K = false;
  int depth = 3, n_trees = 1, min_samples_split = 2, feature_subsample = -2;
  bool bootstrap = false, have_bootstrap = false;
  std::string aggregation = "majority";
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a, std::ostream& os) {
  const io::DatasetFile data = io::read_dataset_file(a.data);
  if (!a.geometry.empty() && geometry_from_string(a.geometry) != data.geometry)
    throw std::runtime_error("--geometry " + a.geometry +
                             " does not match dataset header (" +
                             to_string(data.geometry) + ")");
  if (a.have_K && a.K != data.K)
    throw std::runtime_error("--K does not match dataset header");

  io::ModelFile model;
  model.backend = io::backend_from_string(a.backend);
  model.spec =
      ModelSpec{geom::Curvature(data.K), data.geometry, data.task};
  model.aggregation = data.task == cart::Task::regression
                          ? forest::Aggregation::regression_mean
                          : forest::aggregation_from_string(a.aggregation);
  model.seed = a.seed;
  model.depth_limit = a.depth;
  model.min_samples_split = a.min_samples_split;
  model.bootstrap = a.have_bootstrap ? a.bootstrap : a.n_trees > 1;
  model.feature_subsample =
      a.feature_subsample != -2 ? a.feature_subsample : (a.n_trees > 1 ? -1 : 0);
  model.d = data.d;
  model.n_classes =
      data.task == cart::Task::classification ? count_classes(data.y) : 0;

  const auto t0 = Clock::now();
  std::size_t total_nodes = 0;
  if (model.backend == io::Backend::fast) {
    forest::ForestParams params;
    params.n_trees = a.n_trees;
    params.bootstrap = model.bootstrap;
    params.depth_limit = a.depth;
    params.min_samples_split = a.min_samples_split;
    params.feature_subsample = model.feature_subsample;
    params.seed = a.seed;
    params.aggregation = model.aggregation;
    const forest::Forest f =
        forest::fit_forest(data.X, data.y, model.spec, params);
    for (const HyperbolicTree& t : f.trees) {
      total_nodes += t.tree.nodes.size();
      model.trees.push_back(t.tree);
    }
  } else {
    if (a.n_trees != 1)
      throw std::runtime_error("reference backend supports --n-trees 1 only");
    if (data.geometry != Geometry::hyperboloid)
      throw std::runtime_error("reference backend requires hyperboloid input");
    cart::FitParams params;
    params.depth_limit = a.depth;
    params.min_samples_split = a.min_samples_split;
    params.task = data.task;
    reference::AngularTree tree =
        reference::fit_reference(data.X, data.y, params);
    total_nodes = tree.nodes.size();
    model.n_classes = tree.n_classes;
    model.reference_trees.push_back(std::move(tree));
  }
  const double elapsed = seconds_since(t0);

  io::write_model_file(a.out, model);
  os << "trained " << a.backend << " model: trees=" << a.n_trees
     << " nodes=" << total_nodes << " time=" << std::fixed
     << std::setprecision(3) << elapsed << "s\n";
  os.unsetf(std::ios::fixed);
}

struct PredictArgs {
  std::string model, data, out;
};

std::vector<double> load_and_predict(const PredictArgs& a, io::ModelFile& model,
                                     io::DatasetFile& data) {
  model = io::read_model_file(a.model);
  data = io::read_dataset_file(a.data);
  if (data.d != model.d)
    throw std::runtime_error("dataset dimension " + std::to_string(data.d) +
                             " does not match model dimension " +
                             std::to_string(model.d));
  if (data.geometry != model.spec.input_geometry)
    throw std::runtime_error("dataset geometry does not match model geometry");
  return io::model_predict(model, data.X);
}

void run_predict(const PredictArgs& a, std::ostream& os) {
  io::ModelFile model;
  io::DatasetFile data;
  const std::vector<double> pred = load_and_predict(a, model, data);
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + a.out + " for writing");
  for (double p : pred) out << io::format_double(p) << "\n";
  os << "wrote " << a.out << ": " << pred.size() << " predictions\n";
}

void run_evaluate(const PredictArgs& a, std::ostream& os) {
  io::ModelFile model;
  io::DatasetFile data;
  const std::vector<double> pred = load_and_predict(a, model, data);
  if (model.spec.task == cart::Task::classification) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      correct += pred[i] == data.y[i];
    os << "accuracy " << std::fixed << std::setprecision(6)
       << static_cast<double>(correct) / pred.size() << "\n";
  } else {
    double mse = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double e = pred[i] - data.y[i];
      mse += e * e;
    }
    os << "mse " << std::fixed << std::setprecision(6) << mse / pred.size()
       << "\n";
  }
  os.unsetf(std::ios::fixed);
}

struct CompareArgs {
  std::string out;
  int seeds = 10, n = 1000, dim = 2, classes = 8, depth = 3;
  double K = -1.0;
  std::uint64_t seed = 0;
};

void run_compare(const CompareArgs& a, std::ostream& os) {
  std::ostringstream csv;
  csv << "seed,nodes,exact,tie_equiv,mismatch,train_agree,test_agree\n";
  long long nodes = 0, exact = 0, tie_equiv = 0, mismatch = 0;
  for (int i = 0; i < a.seeds; ++i) {
    CompareConfig cfg;
    cfg.data.n_classes = a.classes;
    cfg.data.n_samples = a.n;
    cfg.data.dim = a.dim;
    cfg.data.K = a.K;
    cfg.data.seed = forest::derive_seed(a.seed, i);
    cfg.depth_limit = a.depth;
    const CompareRow row = compare_seed(cfg);
    csv << row.seed << ',' << row.nodes << ',' << row.exact << ','
        << row.tie_equiv << ',' << row.mismatch << ','
        << io::format_double(row.train_agree) << ','
        << io::format_double(row.test_agree) << "\n";
    nodes += row.nodes;
    exact += row.exact;
    tie_equiv += row.tie_equiv;
    mismatch += row.mismatch;
  }
  if (a.out.empty()) {
    os << csv.str();
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + a.out + " for writing");
    out << csv.str();
    os << "wrote " << a.out << "\n";
  }
  os << "compared " << a.seeds << " seeds: nodes=" << nodes
     << " exact=" << exact << " tie_equiv=" << tie_equiv
     << " mismatch=" << mismatch << "\n";
}

struct BenchArgs {
  std::string out, n_list;
  int dim = 2, depth = 3, repeats = 5, classes = 8;
  std::uint64_t seed = 0;
};

void run_bench(const BenchArgs& a, std::ostream& os) {
  std::vector<int> sizes;
  if (a.n_list.empty()) {
    for (int p = 3; p <= 15; ++p) sizes.push_back(1 << p);
  } else {
    std::istringstream ss(a.n_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) sizes.push_back(std::stoi(tok));
  }

  std::ostringstream csv;
  csv << "backend,n,seconds\n";
  for (io::Backend backend : {io::Backend::fast, io::Backend::reference}) {
    for (int n : sizes) {
      datagen::MixtureConfig cfg;
      cfg.n_classes = a.classes;
      cfg.n_samples = n;
      cfg.dim = a.dim;
      cfg.seed = a.seed;
      const datagen::Dataset data = datagen::sample_mixture(cfg);
      const double t = time_fit(backend, data.X, data.y, a.depth, a.repeats);
      csv << io::to_string(backend) << ',' << n << ',' << io::format_double(t)
          << "\n";
    }
  }
  if (a.out.empty()) {
    os << csv.str();
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + a.out + " for writing");
    out << csv.str();
    os << "wrote " << a.out << "\n";
  }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"Hyperbolic decision trees and random forests"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Sample a mixture dataset");
  generate->add_option("--out", gen.out, "output dataset path")->required();
  generate->add_option("--classes", gen.cfg.n_classes, "number of clusters");
  generate->add_option("--n", gen.cfg.n_samples, "number of samples");
  generate->add_option("--dim", gen.cfg.dim, "hyperbolic dimension d");
  generate->add_option("--K", gen.cfg.K, "curvature (negative)");
  generate->add_option("--seed", gen.cfg.seed, "random seed")->required();
  generate->add_option("--task", gen.task, "classification|regression");
  generate->add_option("--geometry", gen.geometry,
                       "hyperboloid|klein|poincare output coordinates");
  generate->add_option("--mean-scale", gen.cfg.mean_scale, "cluster mean spread");
  generate->add_option("--cluster-scale", gen.cfg.cluster_scale,
                       "within-cluster spread");
  generate->add_option("--noise", gen.cfg.regression_noise,
                       "regression target noise");

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "Fit a tree or forest");
  train->add_option("--data", tr.data, "training dataset")->required();
  train->add_option("--out", tr.out, "output model path")->required();
  train->add_option("--backend", tr.backend, "fast|reference");
  train->add_option("--geometry", tr.geometry, "expected dataset geometry");
  CLI::Option* k_opt = train->add_option("--K", tr.K, "expected curvature");
  train->add_option("--depth", tr.depth, "depth limit");
  train->add_option("--n-trees", tr.n_trees, "ensemble size");
  CLI::Option* boot_opt =
      train->add_flag("--bootstrap,!--no-bootstrap", tr.bootstrap,
                      "bootstrap rows per tree (default: only for forests)");
  train->add_option("--min-samples-split", tr.min_samples_split,
                    "minimum rows to split");
  train->add_option("--feature-subsample", tr.feature_subsample,
                    "features tried per node (-1: auto, 0: all)");
  train->add_option("--aggregation", tr.aggregation,
                    "majority|probability-mean|mean");
  train->add_option("--seed", tr.seed, "random seed")->required();

  PredictArgs pr;
  CLI::App* predict = app.add_subcommand("predict", "Write per-row predictions");
  predict->add_option("--model", pr.model, "model path")->required();
  predict->add_option("--data", pr.data, "dataset path")->required();
  predict->add_option("--out", pr.out, "predictions output path")->required();

  PredictArgs ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Print accuracy or MSE");
  evaluate->add_option("--model", ev.model, "model path")->required();
  evaluate->add_option("--data", ev.data, "dataset path")->required();

  CompareArgs cm;
  CLI::App* compare =
      app.add_subcommand("compare", "Fast-vs-reference agreement report");
  compare->add_option("--seeds", cm.seeds, "number of datasets");
  compare->add_option("--seed", cm.seed, "base seed")->required();
  compare->add_option("--n", cm.n, "samples per dataset");
  compare->add_option("--dim", cm.dim, "hyperbolic dimension");
  compare->add_option("--classes", cm.classes, "clusters per dataset");
  compare->add_option("--K", cm.K, "curvature");
  compare->add_option("--depth", cm.depth, "depth limit");
  compare->add_option("--out", cm.out, "report CSV path (default: stdout)");

  BenchArgs be;
  CLI::App* bench = app.add_subcommand("bench", "Training-time comparison");
  bench->add_option("--n-list", be.n_list, "comma-separated sizes (default 2^3..2^15)");
  bench->add_option("--dim", be.dim, "hyperbolic dimension");
  bench->add_option("--depth", be.depth, "depth limit");
  bench->add_option("--repeats", be.repeats, "repeats per size (median kept)");
  bench->add_option("--classes", be.classes, "clusters per dataset");
  bench->add_option("--seed", be.seed, "dataset seed");
  bench->add_option("--out", be.out, "timing CSV path (default: stdout)");

  std::vector<const char*> argv;
  argv.push_back("hyperdt");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*generate) run_generate(gen, out);
    if (*train) {
      tr.have_K = k_opt->count() > 0;
      tr.have_bootstrap = boot_opt->count() > 0;
      run_train(tr, out);
    }
    if (*predict) run_predict(pr, out);
    if (*evaluate) run_evaluate(ev, out);
    if (*compare) run_compare(cm, out);
    if (*bench) run_bench(be, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hyperdt::cli
