#pragma once

#include "bsdelab/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

/// Reference implementations used only by tests. Each one is written from the
/// definition, without sharing code with the library.
namespace oracle {

/// Upper concave envelope of {(0,0)} and the points, evaluated at every x_i by
/// brute force over all bracketing chords.
inline std::vector<double> upper_hull(const std::vector<double>& x, const std::vector<double>& f) {
    const std::size_t n = x.size();
    std::vector<double> px{0.0}, pf{0.0};
    px.insert(px.end(), x.begin(), x.end());
    pf.insert(pf.end(), f.begin(), f.end());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        double best = f[i];
        for (std::size_t a = 0; a <= i + 1; ++a) {
            for (std::size_t b = i + 1; b <= n; ++b) {
                if (px[b] == px[a]) continue;
                const double w = (xi - px[a]) / (px[b] - px[a]);
                best = std::max(best, pf[a] + w * (pf[b] - pf[a]));
            }
        }
        out[i] = best;
    }
    return out;
}

/// Random star-shaped nondecreasing table: f(x)/x nonincreasing, with random
/// dents and flats so that f itself is usually not concave.
inline void star_shaped(std::uint64_t seed, std::size_t n, std::vector<double>& x, std::vector<double>& f) {
    bsde::rng::CounterStream s(seed, bsde::rng::Stream::fixture);
    x.assign(n, 0.0);
    f.assign(n, 0.0);
    double xi = 0.0;
    double slope = 1.0 + 4.0 * s.uniform();
    for (std::size_t i = 0; i < n; ++i) {
        xi += 0.01 + s.uniform();
        if (s.uniform() < 0.6) slope *= 0.3 + 0.7 * s.uniform();
        x[i] = xi;
        f[i] = std::max(i ? f[i - 1] : 0.0, slope * xi);
    }
}

/// Solution of u' = mu u, u(0) = a, at time T.
inline double gronwall(double a, double mu, double T) { return a * std::exp(mu * T); }

/// Integral of u^{-alpha} over [eps, 1].
inline double power_integral(double alpha, double eps) {
    return alpha == 1.0 ? -std::log(eps) : (1.0 - std::pow(eps, 1.0 - alpha)) / (1.0 - alpha);
}

/// Standard normal cdf.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Mean and sample standard deviation.
struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / static_cast<double>(v.size() - 1))};
}

}  // namespace oracle
