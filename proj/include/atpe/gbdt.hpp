#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

// Small gradient-boosted regression-tree ensemble: exact greedy splits,
// level-wise growth over presorted columns, Newton leaf values.

namespace atpe::gbdt {

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Tree {
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
  }

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct Ensemble {
  double base = 0.0;
  std::vector<Tree> trees;

  double raw(std::span<const double> x) const {
    double s = base;
    for (const auto& t : trees) s += t.predict(x);
    return s;
  }

  friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

struct Options {
  std::size_t trees = 100;
  std::size_t max_depth = 4;
  double learning_rate = 0.1;
  double lambda = 0.0;
  std::size_t min_samples_leaf = 3;
};

/// Column-major feature matrix.
class Dataset {
 public:
  Dataset(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& at(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double at(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
  std::span<const double> column(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  std::vector<double> row(std::size_t r) const {
    std::vector<double> out(cols_);
    for (std::size_t c = 0; c < cols_; ++c) out[c] = at(r, c);
    return out;
  }

  /// Row indices of every column in ascending value order (stable).
  std::vector<std::vector<std::size_t>> presort() const {
    std::vector<std::vector<std::size_t>> out(cols_);
    for (std::size_t c = 0; c < cols_; ++c) {
      auto& idx = out[c];
      idx.resize(rows_);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      const auto col = column(c);
      std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return col[a] < col[b]; });
    }
    return out;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

namespace detail {

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

inline double split_score(double g, double h, double lambda) { return g * g / (h + lambda + 1e-12); }

inline Tree build_tree(const Dataset& data, const std::vector<std::vector<std::size_t>>& sorted,
                       std::span<const double> grad, std::span<const double> hess, const Options& opt) {
  const std::size_t n = data.rows();
  Tree tree;
  std::vector<NodeStats> stats(1);
  for (std::size_t r = 0; r < n; ++r) {
    stats[0].g += grad[r];
    stats[0].h += hess[r];
  }
  stats[0].count = n;
  tree.nodes.emplace_back();
  std::vector<int> node_of(n, 0);
  std::vector<int> frontier{0};

  for (std::size_t depth = 0; depth < opt.max_depth && !frontier.empty(); ++depth) {
    const std::size_t m = tree.nodes.size();
    std::vector<char> active(m, 0);
    for (int f : frontier) active[static_cast<std::size_t>(f)] = 1;
    std::vector<double> best_gain(m, 1e-12);
    std::vector<int> best_feature(m, -1);
    std::vector<double> best_threshold(m, 0.0);
    std::vector<NodeStats> left(m);
    std::vector<double> last(m, 0.0);

    for (std::size_t c = 0; c < data.cols(); ++c) {
      for (int f : frontier) left[static_cast<std::size_t>(f)] = NodeStats{};
      const auto col = data.column(c);
      for (auto r : sorted[c]) {
        const auto nid = static_cast<std::size_t>(node_of[r]);
        if (!active[nid]) continue;
        const double v = col[r];
        auto& l = left[nid];
        if (l.count > 0 && v != last[nid]) {
          const auto& t = stats[nid];
          const std::size_t rc = t.count - l.count;
          if (l.count >= opt.min_samples_leaf && rc >= opt.min_samples_leaf) {
            const double gain = split_score(l.g, l.h, opt.lambda) + split_score(t.g - l.g, t.h - l.h, opt.lambda) -
                                split_score(t.g, t.h, opt.lambda);
            if (gain > best_gain[nid]) {
              best_gain[nid] = gain;
              best_feature[nid] = static_cast<int>(c);
              double mid = last[nid] + (v - last[nid]) * 0.5;
              if (!(mid < v)) mid = last[nid];
              best_threshold[nid] = mid;
            }
          }
        }
        l.g += grad[r];
        l.h += hess[r];
        ++l.count;
        last[nid] = v;
      }
    }

    std::vector<int> next;
    for (int f : frontier) {
      const auto nid = static_cast<std::size_t>(f);
      if (best_feature[nid] < 0) continue;
      const int li = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stats.resize(tree.nodes.size());
      auto& node = tree.nodes[nid];
      node.feature = best_feature[nid];
      node.threshold = best_threshold[nid];
      node.left = li;
      node.right = li + 1;
      next.push_back(li);
      next.push_back(li + 1);
    }
    if (next.empty()) break;
    for (std::size_t r = 0; r < n; ++r) {
      const auto& node = tree.nodes[static_cast<std::size_t>(node_of[r])];
      if (node.feature < 0) continue;
      const int child = data.at(r, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
      node_of[r] = child;
      auto& s = stats[static_cast<std::size_t>(child)];
      s.g += grad[r];
      s.h += hess[r];
      ++s.count;
    }
    frontier = std::move(next);
  }

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    auto& node = tree.nodes[i];
    if (node.feature >= 0) continue;
    const auto& s = stats[i];
    node.value = s.count == 0 ? 0.0 : -opt.learning_rate * s.g / (s.h + opt.lambda + 1e-12);
  }
  return tree;
}

template <class GradFn>
Ensemble boost(const Dataset& data, double base, const Options& opt, GradFn grad_fn) {
  if (data.rows() == 0) throw std::invalid_argument("gbdt: empty dataset");
  const auto sorted = data.presort();
  Ensemble e;
  e.base = base;
  std::vector<double> pred(data.rows(), base), g(data.rows()), h(data.rows());
  for (std::size_t t = 0; t < opt.trees; ++t) {
    grad_fn(pred, g, h);
    auto tree = build_tree(data, sorted, g, h, opt);
    for (std::size_t r = 0; r < data.rows(); ++r) {
      std::size_t i = 0;
      while (tree.nodes[i].feature >= 0) {
        const auto& nd = tree.nodes[i];
        i = static_cast<std::size_t>(data.at(r, static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left
                                                                                                       : nd.right);
      }
      pred[r] += tree.nodes[i].value;
    }
    e.trees.push_back(std::move(tree));
  }
  return e;
}

}  // namespace detail

/// Squared-error boosting; weights scale each row's contribution.
inline Ensemble fit_regression(const Dataset& data, std::span<const double> y, std::span<const double> w,
                               const Options& opt = {}) {
  double sw = 0.0, swy = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    sw += w[r];
    swy += w[r] * y[r];
  }
  const double base = sw > 0.0 ? swy / sw : 0.0;
  return detail::boost(data, base, opt, [&](const auto& pred, auto& g, auto& h) {
    for (std::size_t r = 0; r < pred.size(); ++r) {
      g[r] = w[r] * (pred[r] - y[r]);
      h[r] = w[r];
    }
  });
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Binary log-loss boosting on labels in {0, 1}; raw() is the log-odds.
inline Ensemble fit_logistic(const Dataset& data, std::span<const double> y, std::span<const double> w,
                             Options opt = {}) {
  if (opt.lambda <= 0.0) opt.lambda = 1.0;
  double sw = 0.0, swy = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    sw += w[r];
    swy += w[r] * y[r];
  }
  const double p0 = std::clamp(sw > 0.0 ? swy / sw : 0.5, 1e-6, 1.0 - 1e-6);
  return detail::boost(data, std::log(p0 / (1.0 - p0)), opt, [&](const auto& pred, auto& g, auto& h) {
    for (std::size_t r = 0; r < pred.size(); ++r) {
      const double p = sigmoid(pred[r]);
      g[r] = w[r] * (p - y[r]);
      h[r] = w[r] * std::max(p * (1.0 - p), 1e-6);
    }
  });
}

}  // namespace atpe::gbdt
