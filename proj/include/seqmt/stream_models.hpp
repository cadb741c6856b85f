#pragma once

#include <cmath>
#include <concepts>
#include <stdexcept>

#include "seqmt/random.hpp"

namespace seqmt {

// Contract for one data stream under a pair of simple hypotheses. A model
// draws observations under either hypothesis, evaluates the exact one-step
// log-likelihood ratio in nats, and exposes its KL numbers: kl_alt() is the
// mean LLR increment under the alternative, -kl_null() the mean under the null.
template <class M>
concept StreamModel = requires(const M m, bool is_signal, Rng& rng, double x) {
  { m.sample(is_signal, rng) } -> std::convertible_to<double>;
  { m.llr_increment(x) } -> std::convertible_to<double>;
  { m.kl_alt() } -> std::convertible_to<double>;
  { m.kl_null() } -> std::convertible_to<double>;
};

// Unit-variance Gaussian with mean 0 under the null and mu > 0 under the
// alternative. LLR increment: mu * (x - mu / 2); KL numbers mu^2 / 2 both ways.
class GaussianMeanModel {
 public:
  explicit GaussianMeanModel(double mu) : mu_(mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("gaussian_mean: mu must be > 0");
  }

  double sample(bool is_signal, Rng& rng) const {
    return (is_signal ? mu_ : 0.0) + rng.normal();
  }

  double llr_increment(double x) const { return mu_ * (x - 0.5 * mu_); }

  double kl_alt() const { return 0.5 * mu_ * mu_; }
  double kl_null() const { return 0.5 * mu_ * mu_; }

  double mu() const { return mu_; }

 private:
  double mu_;
};

// Bernoulli with success probability p0 under the null and p1 under the
// alternative. The two-point increment distribution makes exhaustive path
// enumeration feasible, which is what this model exists for.
class BernoulliModel {
 public:
  BernoulliModel(double p0, double p1) : p0_(p0), p1_(p1) {
    if (!(p0 > 0.0 && p0 < 1.0 && p1 > 0.0 && p1 < 1.0))
      throw std::invalid_argument("bernoulli: p0, p1 must lie in (0,1)");
    if (p0 == p1) throw std::invalid_argument("bernoulli: p0 and p1 must differ");
    llr_one_ = std::log(p1_ / p0_);
    llr_zero_ = std::log((1.0 - p1_) / (1.0 - p0_));
  }

  double sample(bool is_signal, Rng& rng) const {
    return rng.bernoulli(is_signal ? p1_ : p0_) ? 1.0 : 0.0;
  }

  double llr_increment(double x) const { return x > 0.5 ? llr_one_ : llr_zero_; }

  double kl_alt() const {
    return p1_ * llr_one_ + (1.0 - p1_) * llr_zero_;
  }
  double kl_null() const {
    return -(p0_ * llr_one_ + (1.0 - p0_) * llr_zero_);
  }

  double p0() const { return p0_; }
  double p1() const { return p1_; }

 private:
  double p0_, p1_;
  double llr_one_, llr_zero_;
};

}  // namespace seqmt
