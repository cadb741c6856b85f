#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace seqmt {

// Cumulative per-stream LLRs with their descending order statistics and the
// count of positive entries. Ranks use the conventions value(rank 0) = +inf
// and value(rank K+1) = -inf, which make the degenerate l = 0 / u = K branches
// of the stopping rules reduce the way the boundary cases require.
class LlrState {
 public:
  explicit LlrState(int k)
      : n_(0), lambda_(k, 0.0), order_(k), positive_count_(0) {
    if (k < 1) throw std::invalid_argument("LlrState: need at least one stream");
    std::iota(order_.begin(), order_.end(), 0);
  }

  void advance(std::span<const double> increments) {
    if (static_cast<int>(increments.size()) != num_streams())
      throw std::invalid_argument("LlrState::advance: increment length mismatch");
    ++n_;
    for (int k = 0; k < num_streams(); ++k) lambda_[k] += increments[k];
    resort();
  }

  int time() const { return n_; }
  int num_streams() const { return static_cast<int>(lambda_.size()); }
  double value(int stream) const { return lambda_[stream]; }
  std::span<const double> values() const { return lambda_; }
  int positive_count() const { return positive_count_; }

  // Stream index attaining the given descending rank (1-based); ties resolve
  // by ascending stream index.
  int stream_at_rank(int rank) const { return order_[rank - 1]; }

  // lambda_(rank) with rank in [0, K+1]; 0 and K+1 are the infinite sentinels.
  double ordered_value(int rank) const {
    if (rank == 0) return std::numeric_limits<double>::infinity();
    if (rank == num_streams() + 1) return -std::numeric_limits<double>::infinity();
    if (rank < 0 || rank > num_streams() + 1)
      throw std::out_of_range("LlrState::ordered_value: rank out of bounds");
    return lambda_[order_[rank - 1]];
  }

 private:
  void resort() {
    // K stays small here; a full re-sort per step is cheaper to trust than an
    // incremental structure.
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [&](int a, int b) {
      if (lambda_[a] != lambda_[b]) return lambda_[a] > lambda_[b];
      return a < b;
    });
    positive_count_ = 0;
    for (double v : lambda_)
      if (v > 0.0) ++positive_count_;
  }

  int n_;
  std::vector<double> lambda_;
  std::vector<int> order_;
  int positive_count_;
};

}  // namespace seqmt
