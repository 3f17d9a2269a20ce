#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "atpe/space.hpp"

namespace atpe {

struct Trial {
  std::uint64_t id = 0;
  Config config;
  double loss = 0.0;
  std::size_t iteration = 0;
};

/// Append-only record of evaluations, ids strictly increasing.
class History {
 public:
  History() = default;

  const std::vector<Trial>& trials() const noexcept { return trials_; }
  std::size_t size() const noexcept { return trials_.size(); }
  bool empty() const noexcept { return trials_.empty(); }
  const Trial& operator[](std::size_t i) const { return trials_[i]; }
  auto begin() const noexcept { return trials_.begin(); }
  auto end() const noexcept { return trials_.end(); }

  std::uint64_t next_id() const noexcept { return trials_.empty() ? 0 : trials_.back().id + 1; }

  /// Appends with the next id and returns it.
  std::uint64_t append(Config config, double loss) {
    const auto id = next_id();
    push(Trial{id, std::move(config), loss, trials_.size()});
    return id;
  }

  /// Appends a trial carrying its own id (used when building subsequences).
  void push(Trial t) {
    if (!std::isfinite(t.loss)) throw std::invalid_argument("history: loss must be finite");
    if (!trials_.empty() && t.id <= trials_.back().id)
      throw std::invalid_argument("history: ids must be strictly increasing");
    trials_.push_back(std::move(t));
  }

  std::vector<double> losses() const {
    std::vector<double> out;
    out.reserve(trials_.size());
    for (const auto& t : trials_) out.push_back(t.loss);
    return out;
  }

  /// Positions sorted by ascending loss, ties by id.
  std::vector<std::size_t> order_by_loss() const {
    std::vector<std::size_t> idx(trials_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (trials_[a].loss != trials_[b].loss) return trials_[a].loss < trials_[b].loss;
      return trials_[a].id < trials_[b].id;
    });
    return idx;
  }

  /// Position of the best trial (lowest loss, earliest id on ties).
  std::size_t best_index() const {
    if (trials_.empty()) throw std::logic_error("history: empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < trials_.size(); ++i)
      if (trials_[i].loss < trials_[best].loss) best = i;
    return best;
  }

  /// Subsequence at the given (ascending) positions.
  History select(const std::vector<std::size_t>& positions) const {
    History h;
    h.trials_.reserve(positions.size());
    for (auto p : positions) h.trials_.push_back(trials_.at(p));
    return h;
  }

 private:
  std::vector<Trial> trials_;
};

}  // namespace atpe
