#include "hyperdt/cart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <random>
#include <stdexcept>

namespace hyperdt::cart {

namespace detail {

double gini_from_counts(std::span<const int> counts, int n) {
  double acc = 0.0;
  for (int c : counts) {
    const double p = static_cast<double>(c) / n;
    acc += p * p;
  }
  return 1.0 - acc;
}

double gain_classification(std::span<const int> parent_counts,
                           std::span<const int> left_counts, int n_left,
                           int n_total) {
  const int n_right = n_total - n_left;
  static thread_local std::vector<int> right;
  right.resize(parent_counts.size());
  for (std::size_t c = 0; c < parent_counts.size(); ++c)
    right[c] = parent_counts[c] - left_counts[c];
  const double h = gini_from_counts(parent_counts, n_total);
  const double hl = gini_from_counts(left_counts, n_left);
  const double hr = gini_from_counts(right, n_right);
  return h - (static_cast<double>(n_left) / n_total) * hl -
         (static_cast<double>(n_right) / n_total) * hr;
}

static double variance(double sum, double sum_sq, int n) {
  const double mean = sum / n;
  const double v = sum_sq / n - mean * mean;
  return v > 0.0 ? v : 0.0;
}

double gain_regression(double sum, double sum_sq, int n_total, double left_sum,
                       double left_sum_sq, int n_left) {
  const int n_right = n_total - n_left;
  const double h = variance(sum, sum_sq, n_total);
  const double hl = variance(left_sum, left_sum_sq, n_left);
  const double hr = variance(sum - left_sum, sum_sq - left_sum_sq, n_right);
  return h - (static_cast<double>(n_left) / n_total) * hl -
         (static_cast<double>(n_right) / n_total) * hr;
}

int leaf_argmax(std::span<const double> probs) {
  int best = 0;
  for (std::size_t c = 1; c < probs.size(); ++c)
    if (probs[c] > probs[best]) best = static_cast<int>(c);
  return best;
}

}  // namespace detail

namespace {

struct BestInFeature {
  double gain = 0.0;
  double left_value = 0.0;   // largest value routed left
  double right_value = 0.0;  // smallest value routed right
  int n_left = 0;
};

// Scans boundaries between consecutive distinct values of one feature,
// given the node's samples sorted ascending by that feature. Keeps the
// first strict maximum (i.e. lowest threshold among ties). Returns nullopt
// when no boundary has gain > 0.
std::optional<BestInFeature> scan_sorted_feature(
    std::span<const double> values, std::span<const double> labels, Task task,
    int n_classes, long long* gain_evals = nullptr) {
  const int m = static_cast<int>(values.size());
  long long evals = 0;
  std::optional<BestInFeature> best;

  if (task == Task::classification) {
    std::vector<int> parent(n_classes, 0);
    for (double l : labels) parent[static_cast<int>(l)]++;
    std::vector<int> left(n_classes, 0);
    for (int i = 0; i + 1 < m; ++i) {
      left[static_cast<int>(labels[i])]++;
      if (values[i + 1] > values[i]) {
        ++evals;
        const double g = detail::gain_classification(parent, left, i + 1, m);
        if (g > 0.0 && (!best || g > best->gain))
          best = BestInFeature{g, values[i], values[i + 1], i + 1};
      }
    }
  } else {
    double sum = 0.0, sum_sq = 0.0;
    for (double l : labels) {
      sum += l;
      sum_sq += l * l;
    }
    double lsum = 0.0, lsum_sq = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
      lsum += labels[i];
      lsum_sq += labels[i] * labels[i];
      if (values[i + 1] > values[i]) {
        ++evals;
        const double g =
            detail::gain_regression(sum, sum_sq, m, lsum, lsum_sq, i + 1);
        if (g > 0.0 && (!best || g > best->gain))
          best = BestInFeature{g, values[i], values[i + 1], i + 1};
      }
    }
  }
  if (gain_evals) *gain_evals += evals;
  return best;
}

// Order-preserving bijection from doubles to unsigned keys: flips the
// sign bit for positives and all bits for negatives, so unsigned key
// order equals double order (with -0.0 < +0.0, which only permutes
// identical values).
std::uint64_t sortable_key(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return (bits >> 63) ? ~bits : bits | 0x8000000000000000ull;
}

// Stable LSD radix sort of (key, id) pairs. Stability plus id-ascending
// input gives the same order as sorting by (value, id); being linear and
// streaming it also scales smoothly where comparison sorts fall off the
// cache. Byte passes whose histogram is a single bucket are skipped.
void radix_sort_pairs(std::vector<std::uint64_t>& keys, std::vector<int>& ids,
                      std::vector<std::uint64_t>& tmp_keys,
                      std::vector<int>& tmp_ids) {
  const std::size_t n = keys.size();
  tmp_keys.resize(n);
  tmp_ids.resize(n);
  for (int pass = 0; pass < 8; ++pass) {
    const int shift = pass * 8;
    std::size_t count[256] = {};
    for (std::uint64_t k : keys) ++count[(k >> shift) & 255];
    if (std::any_of(count, count + 256,
                    [n](std::size_t c) { return c == n; }))
      continue;
    std::size_t offset = 0;
    for (std::size_t& c : count) {
      const std::size_t next = offset + c;
      c = offset;
      offset = next;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pos = count[(keys[i] >> shift) & 255]++;
      tmp_keys[pos] = keys[i];
      tmp_ids[pos] = ids[i];
    }
    keys.swap(tmp_keys);
    ids.swap(tmp_ids);
  }
}

// One feature's view of the samples, as parallel contiguous arrays in the
// root's sort order; a node is a [lo, hi) segment. Children are written
// into the same segment of the opposite-parity arena, so the whole fit
// runs on two fixed allocations with sequential access.
struct FeatureColumn {
  std::vector<int> slots;      // sample ids, fixed at the root
  std::vector<double> values;
  std::vector<double> labels;
};

struct Builder {
  const FitParams& params;
  int n_classes;
  DecisionTree& tree;
  std::mt19937_64 rng;
  std::vector<FeatureColumn> arena[2];  // indexed by depth parity
  std::vector<unsigned char> side;      // slot -> routed right? per split

  std::vector<int> pick_features(int d) {
    if (params.feature_subsample <= 0 || params.feature_subsample >= d) {
      std::vector<int> all(d);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    std::vector<int> pool(d);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int> picked;
    for (int i = 0; i < params.feature_subsample; ++i) {
      const std::size_t j = i + rng() % (d - i);
      std::swap(pool[i], pool[j]);
      picked.push_back(pool[i]);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
  }

  int make_leaf(std::span<const double> labels) {
    Node node;
    node.sample_count = static_cast<int>(labels.size());
    if (params.task == Task::classification) {
      node.probs.assign(n_classes, 0.0);
      for (double l : labels) node.probs[static_cast<int>(l)] += 1.0;
      for (double& p : node.probs) p /= labels.size();
    } else {
      double sum = 0.0;
      for (double l : labels) sum += l;
      node.value = sum / labels.size();
    }
    tree.nodes.push_back(std::move(node));
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  int build(int lo, int hi, int depth) {
    std::vector<FeatureColumn>& cols = arena[depth & 1];
    const int d = static_cast<int>(cols.size());
    const int m = hi - lo;

    std::optional<SplitCandidate> split;
    std::optional<BestInFeature> split_detail;
    if (depth < params.depth_limit && m >= params.min_samples_split) {
      for (int f : pick_features(d)) {
        auto found = scan_sorted_feature(
            std::span<const double>(cols[f].values).subspan(lo, m),
            std::span<const double>(cols[f].labels).subspan(lo, m),
            params.task, n_classes, params.gain_evals);
        if (found && (!split || found->gain > split->gain)) {
          split = SplitCandidate{f, 0.5 * (found->left_value + found->right_value),
                                 found->gain};
          split_detail = found;
        }
      }
    }
    if (!split)
      return make_leaf(std::span<const double>(cols[0].labels).subspan(lo, m));

    // The split feature's column is sorted, so the first n_left entries of
    // its segment are exactly the left side; broadcast that through the
    // slot scratch and partition every column stably into the same segment
    // of the other arena.
    const int n_left = split_detail->n_left;
    const std::vector<int>& split_slots = cols[split->feature].slots;
    for (int i = lo; i < hi; ++i) side[split_slots[i]] = i - lo >= n_left;

    std::vector<FeatureColumn>& next = arena[(depth + 1) & 1];
    for (int g = 0; g < d; ++g) {
      const FeatureColumn& src = cols[g];
      FeatureColumn& dst = next[g];
      int l = lo, r = lo + n_left;
      for (int i = lo; i < hi; ++i) {
        const int s = src.slots[i];
        const int pos = side[s] ? r++ : l++;
        dst.slots[pos] = s;
        dst.values[pos] = src.values[i];
        dst.labels[pos] = src.labels[i];
      }
    }

    const int id = static_cast<int>(tree.nodes.size());
    {
      Node node;
      node.feature = split->feature;
      node.threshold = split->threshold;
      node.sample_count = m;
      tree.nodes.push_back(std::move(node));
    }
    const int left = build(lo, lo + n_left, depth + 1);
    const int right = build(lo + n_left, hi, depth + 1);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }
};

int count_classes(std::span<const double> y) {
  int n_classes = 1;
  for (double l : y) {
    const int c = static_cast<int>(l);
    if (c < 0 || static_cast<double>(c) != l)
      throw std::invalid_argument("classification labels must be nonnegative integers");
    n_classes = std::max(n_classes, c + 1);
  }
  return n_classes;
}

}  // namespace

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[id].is_leaf()) {
      stack.push_back({nodes[id].left, d + 1});
      stack.push_back({nodes[id].right, d + 1});
    }
  }
  return deepest;
}

int DecisionTree::internal_node_count() const {
  int n = 0;
  for (const Node& node : nodes)
    if (!node.is_leaf()) ++n;
  return n;
}

double impurity(std::span<const double> labels, Task task) {
  if (labels.empty()) throw std::invalid_argument("impurity of an empty set");
  if (task == Task::classification) {
    std::vector<int> counts(count_classes(labels), 0);
    for (double l : labels) counts[static_cast<int>(l)]++;
    return detail::gini_from_counts(counts, static_cast<int>(labels.size()));
  }
  double sum = 0.0, sum_sq = 0.0;
  for (double l : labels) {
    sum += l;
    sum_sq += l * l;
  }
  const double mean = sum / labels.size();
  const double v = sum_sq / labels.size() - mean * mean;
  return v > 0.0 ? v : 0.0;
}

double information_gain(std::span<const double> labels,
                        std::span<const double> left,
                        std::span<const double> right, Task task) {
  if (left.empty() || right.empty())
    throw std::invalid_argument("information_gain: empty side");
  if (left.size() + right.size() != labels.size())
    throw std::invalid_argument("information_gain: sides do not partition the labels");
  const double n = static_cast<double>(labels.size());
  return impurity(labels, task) -
         (left.size() / n) * impurity(left, task) -
         (right.size() / n) * impurity(right, task);
}

std::optional<SplitCandidate> best_split(const Matrix& X,
                                         std::span<const double> y,
                                         std::span<const int> features,
                                         Task task) {
  if (X.rows < 2) return std::nullopt;
  const int n_classes = task == Task::classification ? count_classes(y) : 0;
  const int m = static_cast<int>(X.rows);

  std::vector<int> idx(m);
  std::vector<double> values(m), labels(m);
  std::optional<SplitCandidate> best;
  for (int f : features) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      const double va = X(a, f), vb = X(b, f);
      return va < vb || (va == vb && a < b);
    });
    for (int i = 0; i < m; ++i) {
      values[i] = X(idx[i], f);
      labels[i] = y[idx[i]];
    }
    auto found = scan_sorted_feature(values, labels, task, n_classes);
    if (found && (!best || found->gain > best->gain))
      best = SplitCandidate{f, 0.5 * (found->left_value + found->right_value),
                            found->gain};
  }
  return best;
}

DecisionTree fit_tree(const Matrix& X, std::span<const double> y,
                      const FitParams& params) {
  std::vector<int> rows(X.rows);
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree(X, y, rows, params);
}

DecisionTree fit_tree(const Matrix& X, std::span<const double> y,
                      std::span<const int> rows, const FitParams& params) {
  if (rows.empty()) throw std::invalid_argument("fit_tree: no training rows");
  if (y.size() != X.rows)
    throw std::invalid_argument("fit_tree: label count does not match row count");
  for (double v : X.data)
    if (!std::isfinite(v)) throw std::invalid_argument("fit_tree: non-finite input");

  DecisionTree tree;
  tree.task = params.task;
  tree.n_features = X.cols;
  tree.depth_limit = params.depth_limit;
  tree.training_indices.assign(rows.begin(), rows.end());
  tree.n_classes =
      params.task == Task::classification ? count_classes(y) : 0;

  // Argsort every feature once at the root with a stable radix sort (ties
  // keep sample order); descendants inherit the order by stable partition.
  const int m = static_cast<int>(rows.size());
  Builder builder{params, tree.n_classes, tree, std::mt19937_64(params.seed)};
  builder.side.assign(m, 0);
  std::vector<std::uint64_t> keys(m), tmp_keys;
  std::vector<int> ids(m), tmp_ids;
  for (int parity : {0, 1}) {
    builder.arena[parity].resize(X.cols);
    for (FeatureColumn& col : builder.arena[parity]) {
      col.slots.resize(m);
      col.values.resize(m);
      col.labels.resize(m);
    }
  }
  for (std::size_t f = 0; f < X.cols; ++f) {
    for (int i = 0; i < m; ++i) {
      keys[i] = sortable_key(X(rows[i], f));
      ids[i] = i;
    }
    radix_sort_pairs(keys, ids, tmp_keys, tmp_ids);
    FeatureColumn& col = builder.arena[0][f];
    for (int i = 0; i < m; ++i) {
      col.slots[i] = ids[i];
      col.values[i] = X(rows[ids[i]], f);
      col.labels[i] = y[rows[ids[i]]];
    }
  }
  builder.build(0, m, 0);
  return tree;
}

static const Node& route(const DecisionTree& tree, std::span<const double> x) {
  const Node* node = &tree.nodes[0];
  while (!node->is_leaf())
    node = x[node->feature] <= node->threshold ? &tree.nodes[node->left]
                                               : &tree.nodes[node->right];
  return *node;
}

std::vector<double> predict_tree(const DecisionTree& tree, const Matrix& X) {
  if (X.cols != tree.n_features)
    throw std::invalid_argument("predict_tree: feature count mismatch");
  std::vector<double> out(X.rows);
  for (std::size_t r = 0; r < X.rows; ++r) {
    const Node& leaf = route(tree, X.row(r));
    out[r] = tree.task == Task::classification
                 ? static_cast<double>(detail::leaf_argmax(leaf.probs))
                 : leaf.value;
  }
  return out;
}

Matrix predict_proba(const DecisionTree& tree, const Matrix& X) {
  if (tree.task != Task::classification)
    throw std::invalid_argument("predict_proba: classification trees only");
  if (X.cols != tree.n_features)
    throw std::invalid_argument("predict_proba: feature count mismatch");
  Matrix out(X.rows, tree.n_classes);
  for (std::size_t r = 0; r < X.rows; ++r) {
    const Node& leaf = route(tree, X.row(r));
    for (int c = 0; c < tree.n_classes; ++c) out(r, c) = leaf.probs[c];
  }
  return out;
}

}  // namespace hyperdt::cart
