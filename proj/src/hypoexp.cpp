#include "contractlab/hypoexp.hpp"

#include <algorithm>
#include <cmath>

namespace contractlab {

namespace {

struct Cluster {
    double rate;
    int mult;
};

std::vector<Cluster> cluster_rates(std::vector<double> rates, double tol)
{
    std::sort(rates.begin(), rates.end());
    std::vector<Cluster> out;
    std::vector<double> sum;
    for (double l : rates) {
        if (!out.empty() && std::abs(l - out.back().rate) <= tol * std::max(l, out.back().rate)) {
            sum.back() += l;
            ++out.back().mult;
            out.back().rate = sum.back() / out.back().mult;
        } else {
            out.push_back({l, 1});
            sum.push_back(l);
        }
    }
    return out;
}

} // namespace

Hypoexp::Hypoexp(std::vector<double> rates, double merge_tol) : rates_(std::move(rates))
{
    if (rates_.empty()) throw DomainError("hypoexponential law needs at least one rate");
    for (double l : rates_)
        if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("hypoexponential rates must be > 0");

    // Laplace transform prod l/(l+s) = sum_g sum_m A_{g,m} / (s + l_g)^m. For each cluster,
    // H(s) = (s + l_g)^{n_g} F(s) is expanded around s = -l_g through its log-derivative.
    for (std::size_t n = 1; n <= rates_.size(); ++n) {
        auto cl = cluster_rates({rates_.begin(), rates_.begin() + n}, merge_tol);
        std::vector<Term> terms;
        for (std::size_t g = 0; g < cl.size(); ++g) {
            const double lg = cl[g].rate;
            const int ng = cl[g].mult;
            double a0 = std::pow(lg, ng);
            for (std::size_t h = 0; h < cl.size(); ++h)
                if (h != g) a0 *= std::pow(cl[h].rate / (cl[h].rate - lg), cl[h].mult);
            // Taylor coefficients of (log H)' at -l_g.
            std::vector<double> q(ng, 0.0);
            for (int k = 0; k < ng; ++k)
                for (std::size_t h = 0; h < cl.size(); ++h)
                    if (h != g)
                        q[k] += -cl[h].mult * ((k % 2) ? -1.0 : 1.0) *
                                std::pow(cl[h].rate - lg, -(k + 1));
            std::vector<double> a(ng, 0.0);
            a[0] = a0;
            for (int k = 0; k + 1 < ng; ++k) {
                double acc = 0.0;
                for (int i = 0; i <= k; ++i) acc += a[i] * q[k - i];
                a[k + 1] = acc / (k + 1);
            }
            // 1/(s+l)^m inverts to x^{m-1} e^{-l x} / (m-1)!, with m = n_g - k.
            Term t{lg, std::vector<double>(ng, 0.0)};
            for (int k = 0; k < ng; ++k) t.coef[ng - 1 - k] = a[k];
            terms.push_back(std::move(t));
        }
        prefix_.push_back(std::move(terms));
    }
}

double Hypoexp::prefix_pdf(std::size_t n, double x) const
{
    if (n < 1 || n > rates_.size()) throw DomainError("prefix length outside [1, size]");
    if (x < 0.0) return 0.0;
    double v = 0.0;
    for (const Term& t : prefix_[n - 1]) {
        const double e = std::exp(-t.rate * x);
        double pw = 1.0;  // x^m / m!
        for (std::size_t m = 0; m < t.coef.size(); ++m) {
            v += t.coef[m] * pw * e;
            pw *= x / static_cast<double>(m + 1);
        }
    }
    return std::max(v, 0.0);
}

double Hypoexp::stage_prob(std::size_t k, double x) const
{
    if (k > rates_.size()) throw DomainError("stage index outside [0, size]");
    if (x < 0.0) return k == 0 ? 1.0 : 0.0;
    if (k == rates_.size()) return cdf(x);
    // Exit flux from stage k equals its occupation probability times the next rate.
    return prefix_pdf(k + 1, x) / rates_[k];
}

double Hypoexp::survival(double x) const
{
    if (x <= 0.0) return 1.0;
    double v = 0.0;
    for (std::size_t k = 0; k < rates_.size(); ++k) v += prefix_pdf(k + 1, x) / rates_[k];
    return std::clamp(v, 0.0, 1.0);
}

double Hypoexp::mean() const
{
    double v = 0.0;
    for (double l : rates_) v += 1.0 / l;
    return v;
}

double Hypoexp::discounted_tail(double s, double r) const
{
    if (r < 0.0) throw DomainError("discount rate must be >= 0");
    s = std::max(s, 0.0);
    // From stage k at time s the remaining sojourns are fresh exponentials.
    const std::size_t n = rates_.size();
    std::vector<double> tail(n + 1, 1.0);
    for (std::size_t i = n; i-- > 0;) tail[i] = tail[i + 1] * rates_[i] / (rates_[i] + r);
    double v = 0.0;
    for (std::size_t k = 0; k < n; ++k) v += prefix_pdf(k + 1, s) / rates_[k] * tail[k];
    return std::exp(-r * s) * v;
}

} // namespace contractlab
