#pragma once

#include <vector>

#include "contractlab/errors.hpp"

namespace contractlab {

// Law of a sum of independent exponentials with the given rates, taken in order.
// Rates within merge_tol relative of each other are merged into one repeated
// root so that the partial-fraction form stays well conditioned.
class Hypoexp {
public:
    explicit Hypoexp(std::vector<double> rates, double merge_tol = 1e-9);

    std::size_t size() const { return rates_.size(); }
    const std::vector<double>& rates() const { return rates_; }

    double pdf(double x) const { return prefix_pdf(size(), x); }
    double survival(double x) const;
    double cdf(double x) const { return 1.0 - survival(x); }
    double mean() const;
    // Probability that exactly k of the exponentials have elapsed by time x.
    double stage_prob(std::size_t k, double x) const;
    // E[exp(-r X) 1{X > s}].
    double discounted_tail(double s, double r) const;
    // Density of the sum of the first n rates.
    double prefix_pdf(std::size_t n, double x) const;

private:
    struct Term {
        double rate;
        std::vector<double> coef;  // coef[m] multiplies x^m e^{-rate x} / m!
    };
    std::vector<double> rates_;
    std::vector<std::vector<Term>> prefix_;  // prefix_[n-1] = expansion of the first n rates
};

} // namespace contractlab
