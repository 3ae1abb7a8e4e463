#include "riskplan/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riskplan/normal.hpp"

namespace riskplan::risk {

namespace {

// Two-sided 99% standard-normal quantile; 2.58 rounded in common usage.
constexpr double kZ99TwoSided = 2.5758293035489004;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("alpha must lie strictly inside (0, 1)");
    }
}

void check_cost(const SegmentCost& cost) {
    if (!(cost.c >= 0.0) || !(cost.sigma >= 0.0) ||
        !std::isfinite(cost.c) || !std::isfinite(cost.sigma)) {
        throw std::invalid_argument("segment cost needs c >= 0 and sigma >= 0");
    }
}

}  // namespace

void RiskParams::validate() const {
    check_alpha(alpha);
    if (n_c < 2) throw std::invalid_argument("n_c must be >= 2");
}

void GuaranteeInputs::validate() const {
    if (!(l_max > 0.0)) throw std::invalid_argument("l_max must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
    check_alpha(alpha);
}

EmpiricalCostSample EmpiricalCostSample::from_values(std::vector<double> values) {
    if (values.size() < 2) {
        throw std::invalid_argument("empirical sample needs >= 2 values");
    }
    std::sort(values.begin(), values.end());
    EmpiricalCostSample s;
    s.values_ = std::move(values);
    return s;
}

double varsigma(double alpha) {
    check_alpha(alpha);
    return 1.41421356237309504880 * erf_inv(2.0 * alpha - 1.0);
}

double var_alpha(const SegmentCost& cost, double alpha) {
    check_cost(cost);
    return cost.c + varsigma(alpha) * cost.sigma;
}

double cvar_alpha(const SegmentCost& cost, double alpha) {
    check_cost(cost);
    const double z = varsigma(alpha);
    return cost.c + cost.sigma * std_normal_pdf(z) / (1.0 - alpha);
}

EmpiricalCostSample sample_costs(const SegmentCost& cost, const RiskParams& params, RngStream& stream) {
    check_cost(cost);
    params.validate();
    std::vector<double> values(static_cast<std::size_t>(params.n_c));
    for (auto& v : values) {
        v = stream.normal(cost.c, cost.sigma);
    }
    return EmpiricalCostSample::from_values(std::move(values));
}

namespace {

// Index (1-based) of the lowest order statistic with empirical CDF >= alpha.
std::size_t var_order_index(std::size_t n, double alpha) {
    const double k = std::ceil(alpha * static_cast<double>(n) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n);
}

}  // namespace

double var_empirical(const EmpiricalCostSample& sample, double alpha) {
    check_alpha(alpha);
    return sample.values()[var_order_index(sample.size(), alpha) - 1];
}

EmpiricalCvar cvar_empirical(const EmpiricalCostSample& sample, double alpha) {
    const double var = var_empirical(sample, alpha);
    const auto& v = sample.values();
    // Tail set by value, so ties with the VaR all count.
    const auto first = std::lower_bound(v.begin(), v.end(), var);
    const auto count = static_cast<int>(v.end() - first);
    // Accumulate relative to the first tail value; an all-equal tail then
    // yields that value exactly.
    double acc = 0.0;
    for (auto it = first; it != v.end(); ++it) acc += *it - *first;
    return EmpiricalCvar{*first + acc / count, count};
}

double worst_case_path_length(std::span<const SegmentCost> costs, double alpha) {
    if (costs.empty()) {
        throw std::invalid_argument("worst_case_path_length: segment list is empty");
    }
    double total = 0.0;
    for (const auto& c : costs) total += cvar_alpha(c, alpha);
    return total;
}

double kl_gaussian(double mu1, double sigma1, double mu2, double sigma2) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
        throw std::domain_error("kl_gaussian: standard deviations must be > 0");
    }
    const double dm = mu1 - mu2;
    return std::log(sigma2 / sigma1) + (sigma1 * sigma1 + dm * dm) / (2.0 * sigma2 * sigma2) - 0.5;
}

MarkovBound markov_upper_bound(const GuaranteeInputs& g) {
    g.validate();
    const double raw = g.cvar_sum / g.l_max + g.epsilon / (g.alpha * g.l_max);
    return MarkovBound{raw, std::clamp(raw, 0.0, 1.0)};
}

double sigma_delta(double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("sigma_delta: delta must be > 0");
    return delta / kZ99TwoSided;
}

}  // namespace riskplan::risk
