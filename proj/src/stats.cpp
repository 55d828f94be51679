#include "pucl/stats.hpp"

#include <cmath>
#include <cstdint>

#include "pucl/errors.hpp"

namespace pucl {

namespace {

// Series expansion of the lower regularized gamma P(a, x), valid for x < a+1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), valid for x >= a+1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    require(a > 0.0 && x >= 0.0, "gamma_q: need a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_sf(double x, int dof) {
    require(dof >= 1, "chi2_sf: dof must be >= 1");
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_gof_pvalue(const std::vector<std::size_t>& observed,
                       const std::vector<double>& expected_probs,
                       double min_expected) {
    require(observed.size() == expected_probs.size(), "chi2_gof: size mismatch");
    std::size_t n = 0;
    for (auto o : observed) n += o;
    require(n > 0, "chi2_gof: empty sample");

    // Pool small-expectation bins left to right.
    std::vector<double> exp_counts;
    std::vector<double> obs_counts;
    double pend_e = 0.0, pend_o = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        pend_e += expected_probs[i] * static_cast<double>(n);
        pend_o += static_cast<double>(observed[i]);
        if (pend_e >= min_expected) {
            exp_counts.push_back(pend_e);
            obs_counts.push_back(pend_o);
            pend_e = pend_o = 0.0;
        }
    }
    if (pend_e > 0.0 || pend_o > 0.0) {
        if (!exp_counts.empty()) {
            exp_counts.back() += pend_e;
            obs_counts.back() += pend_o;
        } else {
            exp_counts.push_back(pend_e);
            obs_counts.push_back(pend_o);
        }
    }
    require(exp_counts.size() >= 2, "chi2_gof: fewer than 2 usable bins");

    double stat = 0.0;
    for (std::size_t i = 0; i < exp_counts.size(); ++i) {
        double diff = obs_counts[i] - exp_counts[i];
        stat += diff * diff / exp_counts[i];
    }
    return chi2_sf(stat, static_cast<int>(exp_counts.size()) - 1);
}

double sign_test_pvalue(int wins, int trials) {
    require(trials >= 1 && wins >= 0 && wins <= trials, "sign_test: bad counts");
    // Exact binomial tail; trials here are always small.
    long double p = 0.0L;
    for (int k = wins; k <= trials; ++k) {
        long double logc = std::lgammal(trials + 1.0L) - std::lgammal(k + 1.0L) -
                           std::lgammal(trials - k + 1.0L);
        p += std::exp(logc - trials * std::log(2.0L));
    }
    return static_cast<double>(p > 1.0L ? 1.0L : p);
}

double mean(const std::vector<double>& xs) {
    require(!xs.empty(), "mean: empty");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_stddev(const std::vector<double>& xs) {
    require(xs.size() >= 2, "sample_stddev: need >= 2 values");
    double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace pucl
