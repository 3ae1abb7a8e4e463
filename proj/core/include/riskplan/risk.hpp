#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "riskplan/rng.hpp"

// Risk mathematics for Gaussian-perturbed segment lengths: analytic and
// empirical VaR/CVaR, the CVaR-sum worst-case path length, Gaussian KL
// divergence, and the Markov-style exceedance bound.

namespace riskplan::risk {

// Random length of one path segment: deterministic Euclidean part c plus
// zero-mean Gaussian noise with standard deviation sigma.
struct SegmentCost {
    double c = 0.0;
    double sigma = 0.0;
};

struct RiskParams {
    double alpha = 0.1;       // confidence level, in (0,1)
    int n_c = 200;            // samples per segment cost distribution
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Sorted draws of one segment's random length.
class EmpiricalCostSample {
  public:
    static EmpiricalCostSample from_values(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

  private:
    std::vector<double> values_;
};

struct GuaranteeInputs {
    double cvar_sum = 0.0;  // minimized sum of per-segment CVaRs
    double l_max = 0.0;     // prescribed path length threshold
    double delta = 0.0;     // tolerance on l_max
    double epsilon = 0.0;   // KL budget
    double alpha = 0.1;

    void validate() const;
};

struct MarkovBound {
    double raw;      // may exceed 1; Markov bounds can be vacuous
    double clamped;  // raw clipped to [0, 1] for reporting
};

struct EmpiricalCvar {
    double cvar;
    int n_cvar;  // tail cardinality: samples at or above the empirical VaR
};

// sqrt(2) * erfinv(2 alpha - 1); the standard-normal alpha-quantile.
double varsigma(double alpha);

// Analytic quantile of the segment length: c + varsigma(alpha) * sigma.
double var_alpha(const SegmentCost& cost, double alpha);

// Analytic Gaussian tail expectation: c + sigma * phi(varsigma(alpha)) / (1 - alpha).
double cvar_alpha(const SegmentCost& cost, double alpha);

EmpiricalCostSample sample_costs(const SegmentCost& cost, const RiskParams& params, RngStream& stream);

// Lowest order statistic whose empirical CDF reaches alpha.
double var_empirical(const EmpiricalCostSample& sample, double alpha);

// Mean of all sample values >= the empirical VaR, plus the tail count.
EmpiricalCvar cvar_empirical(const EmpiricalCostSample& sample, double alpha);

double worst_case_path_length(std::span<const SegmentCost> costs, double alpha);

// KL divergence D(N(mu1, sigma1^2) || N(mu2, sigma2^2)).
double kl_gaussian(double mu1, double sigma1, double mu2, double sigma2);

MarkovBound markov_upper_bound(const GuaranteeInputs& g);

// Standard deviation such that P(|N(0, sigma_delta)| <= delta) ~ 0.99.
double sigma_delta(double delta);

}  // namespace riskplan::risk
