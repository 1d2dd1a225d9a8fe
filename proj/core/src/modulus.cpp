#include "bsdelab/modulus.hpp"

#include "bsdelab/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bsde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// u |ln u|^r and its derivative, 0 < u < 1.
double log_branch(double u, double r) { return u * std::pow(-std::log(u), r); }

double log_branch_slope(double u, double r) {
    const double L = -std::log(u);
    if (r == 0.0) return 1.0;
    return std::pow(L, r) - r * std::pow(L, r - 1.0);
}

// Integral of e^s / rho(e^s) raised to `power` over [sa, sb] in the log variable,
// split at the given log-breakpoints.
double integrate_log(const ModulusFn& rho, double sa, double sb, const std::vector<double>& log_breaks,
                     double power) {
    if (sa == sb) return 0.0;
    double sign = 1.0;
    if (sb < sa) {
        std::swap(sa, sb);
        sign = -1.0;
    }
    auto integrand = [&](double s) {
        const double u = std::exp(s);
        const double r = rho(u);
        if (!(r > 0.0)) {
            throw PreconditionError("modulus is not positive at u = " + fmt(u) + " (" + rho.describe() + ")");
        }
        const double ratio = u / r;
        return power == 1.0 ? ratio : std::pow(ratio, power);
    };
    std::vector<double> cuts{sa};
    for (double b : log_breaks) {
        if (b > sa && b < sb) cuts.push_back(b);
    }
    cuts.push_back(sb);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, cuts[i], cuts[i + 1], 15,
                                                                               1e-10);
    }
    return sign * total;
}

std::vector<double> log_breakpoints(const ModulusFn& rho) {
    std::vector<double> out;
    for (double b : rho.breakpoints()) {
        if (b > 0.0) out.push_back(std::log(b));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void require_concave(const ModulusFn& rho, const char* op) {
    if (!rho.concave_verified()) {
        throw PreconditionError(std::string(op) + ": modulus is not verified concave (" + rho.describe() + ")");
    }
}

}  // namespace

ModulusFn ModulusFn::linear(double mu) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidArgument("linear modulus needs finite mu >= 0, got " + fmt(mu));
    ModulusFn m;
    m.family_ = ModulusFamily::linear;
    m.a_ = mu;
    m.concave_ = true;
    return m;
}

ModulusFn ModulusFn::log_osgood(double r, double delta, double scale) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("log_osgood exponent must be >= 0, got " + fmt(r));
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("log_osgood scale must be > 0");
    // Nondecreasing on (0, delta] needs |ln delta| >= r, which also gives concavity.
    const double limit = std::min(std::exp(-r), 1.0);
    if (!(delta > 0.0) || delta > limit * (1.0 + 1e-15) || delta >= 1.0) {
        throw InvalidArgument("log_osgood splice point must lie in (0, e^-r] = (0, " + fmt(limit) + "], got " +
                              fmt(delta));
    }
    ModulusFn m;
    m.family_ = ModulusFamily::log_osgood;
    m.a_ = r;
    m.b_ = delta;
    m.scale_ = scale;
    m.tangent_value_ = log_branch(delta, r);
    m.tangent_slope_ = std::max(0.0, log_branch_slope(delta, r));
    m.concave_ = true;
    return m;
}

ModulusFn ModulusFn::power(double alpha, double scale) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("power exponent must be > 0, got " + fmt(alpha));
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("power scale must be > 0");
    ModulusFn m;
    m.family_ = ModulusFamily::power;
    m.a_ = alpha;
    m.scale_ = scale;
    m.concave_ = alpha <= 1.0;
    return m;
}

ModulusFn ModulusFn::tabulated(std::vector<double> nodes, std::vector<double> values) {
    if (nodes.empty() || nodes.size() != values.size()) {
        throw InvalidArgument("tabulated modulus needs matching, nonempty node and value arrays");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i] > 0.0) || !std::isfinite(nodes[i])) throw InvalidArgument("table nodes must be positive");
        if (i > 0 && !(nodes[i] > nodes[i - 1])) throw InvalidArgument("table nodes must be strictly increasing");
        if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
            throw InvalidArgument("table values must be finite and nonnegative");
        }
        if (i > 0 && values[i] < values[i - 1]) {
            throw InvalidArgument("table values must be nondecreasing (node " + std::to_string(i) + ")");
        }
    }
    ModulusFn m;
    m.family_ = ModulusFamily::tabulated;
    m.concave_ = slopes_nonincreasing(nodes, values);
    m.nodes_ = std::move(nodes);
    m.values_ = std::move(values);
    return m;
}

double ModulusFn::operator()(double u) const {
    if (u <= 0.0) {
        if (u == 0.0) return 0.0;
        throw InvalidArgument("modulus evaluated at negative u = " + fmt(u));
    }
    switch (family_) {
    case ModulusFamily::linear:
        return a_ * u;
    case ModulusFamily::log_osgood:
        if (u <= b_) return scale_ * log_branch(u, a_);
        return scale_ * (tangent_value_ + tangent_slope_ * (u - b_));
    case ModulusFamily::power:
        return scale_ * std::pow(u, a_);
    case ModulusFamily::tabulated: {
        if (u >= nodes_.back()) return values_.back();
        const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
        const std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
        const double x0 = j == 0 ? 0.0 : nodes_[j - 1];
        const double v0 = j == 0 ? 0.0 : values_[j - 1];
        return v0 + (values_[j] - v0) * (u - x0) / (nodes_[j] - x0);
    }
    }
    return 0.0;
}

std::vector<double> ModulusFn::breakpoints() const {
    if (family_ == ModulusFamily::tabulated) return nodes_;
    if (family_ == ModulusFamily::log_osgood) return {b_};
    return {};
}

std::vector<double> ModulusFn::scan_grid(const TableOptions& opt) const {
    if (family_ == ModulusFamily::tabulated) return nodes_;
    return log_grid(kTableFloor, opt.u_max, opt.nodes);
}

double ModulusFn::asymptotic_slope() const {
    switch (family_) {
    case ModulusFamily::linear:
        return a_;
    case ModulusFamily::log_osgood:
        return scale_ * tangent_slope_;
    case ModulusFamily::power:
        if (a_ < 1.0) return 0.0;
        return a_ == 1.0 ? scale_ : kInf;
    case ModulusFamily::tabulated:
        return 0.0;
    }
    return 0.0;
}

std::string ModulusFn::describe() const {
    switch (family_) {
    case ModulusFamily::linear:
        return "linear(mu=" + fmt(a_) + ")";
    case ModulusFamily::log_osgood:
        return "log_osgood(r=" + fmt(a_) + ", delta=" + fmt(b_) + ", scale=" + fmt(scale_) + ")";
    case ModulusFamily::power:
        return "power(alpha=" + fmt(a_) + ", scale=" + fmt(scale_) + ")";
    case ModulusFamily::tabulated:
        return "tabulated(" + std::to_string(nodes_.size()) + " nodes on [" + fmt(nodes_.front()) + ", " +
               fmt(nodes_.back()) + "])";
    }
    return "?";
}

double eval(const ModulusFn& rho, double u) { return rho(u); }

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InvalidArgument("log_grid needs 0 < lo < hi and n >= 2");
    std::vector<double> x(n);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    x.front() = lo;
    x.back() = hi;
    return x;
}

bool slopes_nonincreasing(const std::vector<double>& x, const std::vector<double>& v, double rel_tol) {
    double prev = kInf;
    double px = 0.0;
    double pv = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = (v[i] - pv) / (x[i] - px);
        if (s < 0.0) return false;
        if (s > prev + rel_tol * std::abs(prev)) return false;
        prev = s;
        px = x[i];
        pv = v[i];
    }
    return true;
}

long first_star_violation(const std::vector<double>& x, const std::vector<double>& v, double rel_tol) {
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double prev = v[i - 1] / x[i - 1];
        const double cur = v[i] / x[i];
        if (cur > prev + rel_tol * std::abs(prev)) return static_cast<long>(i);
    }
    return -1;
}

double linear_growth_bound(const ModulusFn& rho) {
    require_concave(rho, "linear_growth_bound");
    double A = rho.asymptotic_slope();
    if (rho.family() == ModulusFamily::power && rho.alpha() < 1.0) {
        // sup of u^a / (1+u) is attained at u = a / (1 - a)
        const double a = rho.alpha();
        A = rho.scale() * std::pow(a, a) * std::pow(1.0 - a, 1.0 - a);
    }
    for (double x : rho.scan_grid()) A = std::max(A, rho(x) / (x + 1.0));
    for (double x : rho.scan_grid()) {
        if (rho(x) > A * (x + 1.0) * (1.0 + 1e-12)) {
            throw PreconditionError("linear growth bound failed verification at x = " + fmt(x));
        }
    }
    return A;
}

SplitBound split_growth_bound(const ModulusFn& rho, double m) {
    if (!(m >= 1.0)) throw InvalidArgument("split_growth_bound needs m >= 1, got " + fmt(m));
    const double A = linear_growth_bound(rho);
    SplitBound out{m + 2.0 * A, rho(2.0 * A / (m + 2.0 * A))};
    for (double x : rho.scan_grid()) {
        if (rho(x) > (out.slope * x + out.offset) * (1.0 + 1e-12)) {
            throw PreconditionError("split growth bound failed verification at x = " + fmt(x));
        }
    }
    return out;
}

std::vector<double> upper_hull_values(const std::vector<double>& x, const std::vector<double>& f) {
    const std::size_t n = x.size();
    // Hull vertices as indices into an extended array where -1 is the origin.
    auto px = [&](long i) { return i < 0 ? 0.0 : x[static_cast<std::size_t>(i)]; };
    auto py = [&](long i) { return i < 0 ? 0.0 : f[static_cast<std::size_t>(i)]; };
    std::vector<long> hull{-1};
    for (long i = 0; i < static_cast<long>(n); ++i) {
        while (hull.size() >= 2) {
            const long o = hull[hull.size() - 2];
            const long a = hull.back();
            const double cross = (px(a) - px(o)) * (py(i) - py(o)) - (py(a) - py(o)) * (px(i) - px(o));
            if (cross >= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(i);
    }
    std::vector<double> out(n);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (seg + 2 < hull.size() && px(hull[seg + 1]) < x[i]) ++seg;
        const long a = hull[seg];
        const long b = hull[seg + 1];
        double v;
        if (static_cast<long>(i) == b) {
            v = f[i];
        } else {
            v = py(a) + (py(b) - py(a)) * (x[i] - px(a)) / (px(b) - px(a));
        }
        out[i] = std::max(v, f[i]);
    }
    return out;
}

ModulusFn concave_majorant(const std::vector<double>& x, const std::vector<double>& f) {
    if (x.size() != f.size() || x.empty()) throw InvalidArgument("concave_majorant needs matching nonempty arrays");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(f[i] >= 0.0)) throw PreconditionError("concave_majorant: negative value at x = " + fmt(x[i]));
        if (i > 0 && f[i] < f[i - 1]) {
            throw PreconditionError("concave_majorant: f decreases between x = " + fmt(x[i - 1]) + " and x = " +
                                    fmt(x[i]));
        }
    }
    const long bad = first_star_violation(x, f);
    if (bad >= 0) {
        const auto i = static_cast<std::size_t>(bad);
        throw PreconditionError("concave_majorant: f(x)/x increases from " + fmt(f[i - 1] / x[i - 1]) + " at x = " +
                                fmt(x[i - 1]) + " to " + fmt(f[i] / x[i]) + " at x = " + fmt(x[i]));
    }
    return ModulusFn::tabulated(x, upper_hull_values(x, f));
}

ModulusFn concave_majorant(const ModulusFn& f, const TableOptions& opt) {
    const std::vector<double> x = f.scan_grid(opt);
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = f(x[i]);
    return concave_majorant(x, v);
}

namespace {

template <class Bar>
ModulusFn transform(const TableOptions& opt, Bar bar) {
    const std::vector<double> x = log_grid(kTableFloor, opt.u_max, opt.nodes);
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = bar(x[i]);
    return concave_majorant(x, v);
}

}  // namespace

ModulusFn lift_order(const ModulusFn& rho, double p, double q, const TableOptions& opt) {
    if (!(p >= 1.0)) throw InvalidArgument("lift_order needs p >= 1, got " + fmt(p));
    if (!(q > p)) throw InvalidArgument("lift_order needs q > p, got p = " + fmt(p) + ", q = " + fmt(q));
    require_concave(rho, "lift_order");
    const double e = p / q;
    return transform(opt, [&](double x) { return std::pow(x, 1.0 - e) * rho(std::pow(x, e)); });
}

ModulusFn mao_to_constantin(const ModulusFn& rho, double p, const TableOptions& opt) {
    if (!(p >= 1.0)) throw InvalidArgument("mao_to_constantin needs p >= 1, got " + fmt(p));
    require_concave(rho, "mao_to_constantin");
    return transform(opt, [&](double x) { return std::pow(rho(std::pow(x, p)), 1.0 / p); });
}

ModulusFn constantin_to_mao(const ModulusFn& rho, double p, const TableOptions& opt) {
    if (!(p >= 1.0)) throw InvalidArgument("constantin_to_mao needs p >= 1, got " + fmt(p));
    require_concave(rho, "constantin_to_mao");
    return transform(opt, [&](double x) { return std::pow(rho(std::pow(x, 1.0 / p)), p); });
}

std::vector<double> subadditive_minorant(const std::vector<double>& f) {
    const std::size_t n = f.size();
    std::vector<double> F(n);
    for (std::size_t i = 0; i < n; ++i) {
        // grid index i corresponds to (i+1) h; split (i+1) = (j+1) + (i-j)
        double best = f[i];
        for (std::size_t j = 0; 2 * j + 1 <= i; ++j) best = std::min(best, F[j] + F[i - 1 - j]);
        F[i] = best;
    }
    return F;
}

ModulusFn subadditive_envelope(const ModulusFn& f, const TableOptions& opt) {
    if (opt.nodes < 2 || !(opt.u_max > 0.0)) throw InvalidArgument("subadditive_envelope needs a nontrivial grid");
    const std::size_t n = opt.nodes;
    const double h = opt.u_max / static_cast<double>(n);
    std::vector<double> x(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = h * static_cast<double>(i + 1);
        v[i] = f(x[i]);
        if (i > 0 && v[i] < v[i - 1]) {
            throw PreconditionError("subadditive_envelope: f decreases between x = " + fmt(x[i - 1]) +
                                    " and x = " + fmt(x[i]));
        }
    }
    const std::vector<double> F = subadditive_minorant(v);
    std::vector<double> kappa = upper_hull_values(x, F);
    for (std::size_t i = 0; i < n; ++i) kappa[i] += x[i];
    return ModulusFn::tabulated(std::move(x), std::move(kappa));
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::diverges:
        return "diverges";
    case Verdict::converges:
        return "converges";
    case Verdict::inconclusive:
        return "inconclusive";
    }
    return "?";
}

const char* to_string(OsgoodVariant v) { return v == OsgoodVariant::osgood ? "osgood" : "constantin_p"; }

const char* to_string(ModulusFamily f) {
    switch (f) {
    case ModulusFamily::linear:
        return "linear";
    case ModulusFamily::log_osgood:
        return "log_osgood";
    case ModulusFamily::power:
        return "power";
    case ModulusFamily::tabulated:
        return "tabulated";
    }
    return "?";
}

DivergenceVerdict osgood_classifier(const ModulusFn& rho, double p, OsgoodVariant variant, bool numeric_only) {
    if (!(p >= 1.0)) throw InvalidArgument("osgood_classifier needs p >= 1, got " + fmt(p));
    const double power = variant == OsgoodVariant::osgood ? 1.0 : p;
    const auto breaks = log_breakpoints(rho);

    DivergenceVerdict out;
    constexpr int kFirst = 2;
    constexpr int kLast = 12;
    double I = 0.0;
    double upper = 0.0;  // log of current lower limit's predecessor, starts at ln 1
    std::vector<double> increments;
    for (int j = kFirst; j <= kLast; ++j) {
        const double eps = std::pow(10.0, -j);
        const double lower = std::log(eps);
        const double piece = integrate_log(rho, lower, upper, breaks, power);
        I += piece;
        if (j > kFirst) increments.push_back(piece);
        out.partial_integrals.emplace_back(eps, I);
        upper = lower;
    }

    // Ratio test on the last four increments; each covers one decade. The
    // exponent check separates harmonic decay (divergent, ln ln) from faster
    // algebraic decay in the decade index (convergent, 1/|ln u|^s with s > 1).
    const std::size_t m = increments.size();
    bool grow = true;
    bool contract = true;
    double last_ratio = 0.0;
    for (std::size_t i = m - 3; i < m; ++i) {
        const double ratio = increments[i] / increments[i - 1];
        if (!std::isfinite(ratio)) {
            grow = contract = false;
            break;
        }
        const double j = static_cast<double>(kFirst + 1 + static_cast<int>(i));
        const double exponent = ratio >= 1.0 ? 0.0 : std::log(ratio) / std::log((j - 1.0) / j);
        if (!(ratio >= 0.5 && exponent <= 1.2)) grow = false;
        if (!(ratio <= 0.2)) contract = false;
        last_ratio = ratio;
    }
    Verdict numeric = Verdict::inconclusive;
    if (grow) {
        numeric = Verdict::diverges;
    } else if (contract) {
        const double tail = increments.back() * last_ratio / (1.0 - last_ratio);
        if (tail < 1e-3 * I) numeric = Verdict::converges;
    }
    out.verdict = numeric;
    if (numeric_only) return out;

    switch (rho.family()) {
    case ModulusFamily::linear:
        out.verdict = Verdict::diverges;
        out.analytic = true;
        break;
    case ModulusFamily::power:
        out.verdict = rho.alpha() >= 1.0 ? Verdict::diverges : Verdict::converges;
        out.analytic = true;
        break;
    case ModulusFamily::log_osgood:
        out.verdict = rho.r() * power <= 1.0 ? Verdict::diverges : Verdict::converges;
        out.analytic = true;
        break;
    case ModulusFamily::tabulated:
        break;
    }
    return out;
}

double bihari_bound(double a, const ModulusFn& rho, double horizon, double multiplier, const BihariOptions& opt) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("bihari_bound needs finite a >= 0");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw InvalidArgument("bihari_bound needs horizon >= 0");
    if (!(multiplier > 0.0) || !std::isfinite(multiplier)) throw InvalidArgument("bihari_bound needs multiplier > 0");
    if (!(opt.u0 > 0.0)) throw InvalidArgument("bihari_bound needs u0 > 0");
    require_concave(rho, "bihari_bound");
    if (horizon == 0.0) return a;

    constexpr double kLogTiny = -690.0;  // ln 1e-300
    constexpr double kLogHuge = 709.0;
    double s_lo;
    if (a == 0.0) {
        const DivergenceVerdict v = osgood_classifier(rho, 1.0, OsgoodVariant::osgood);
        if (v.verdict == Verdict::diverges) return 0.0;
        if (v.verdict == Verdict::inconclusive) {
            throw InconclusiveError("bihari_bound: Osgood integral of " + rho.describe() +
                                    " is inconclusive, cannot decide the a = 0 bound");
        }
        s_lo = kLogTiny;
    } else {
        s_lo = std::log(a);
    }
    if (!(rho(std::exp(s_lo)) > 0.0)) throw PreconditionError("bihari_bound: modulus vanishes at a");

    const auto breaks = log_breakpoints(rho);
    const double s0 = std::log(opt.u0);
    const double target = integrate_log(rho, s0, s_lo, breaks, 1.0) + multiplier * horizon;
    auto phi = [&](double s) { return integrate_log(rho, s0, s, breaks, 1.0) - target; };
    auto dphi = [&](double s) {
        const double u = std::exp(s);
        return u / rho(u);
    };

    // Bracket the root from above.
    double f_lo = phi(s_lo);
    double step = std::max(multiplier * horizon / dphi(s_lo), 1e-6);
    double s_hi = s_lo + step;
    double f_hi = phi(s_hi);
    while (f_hi < 0.0) {
        s_lo = s_hi;
        f_lo = f_hi;
        step *= 2.0;
        s_hi = s_lo + step;
        if (s_hi > kLogHuge) return kInf;
        f_hi = phi(s_hi);
    }
    if (f_hi == 0.0) return std::exp(s_hi);

    double s = f_lo > -f_hi ? s_lo : s_hi;
    double fs = s == s_lo ? f_lo : f_hi;
    for (int iter = 0; iter < 200; ++iter) {
        double next = s - fs / dphi(s);
        if (!(next > s_lo && next < s_hi)) next = 0.5 * (s_lo + s_hi);
        const double f_next = phi(next);
        if (f_next < 0.0) {
            s_lo = next;
        } else {
            s_hi = next;
        }
        const bool done = std::abs(next - s) <= 1e-15 * std::max(1.0, std::abs(next)) || f_next == 0.0 ||
                          s_hi - s_lo <= 1e-15 * std::max(1.0, std::abs(next));
        s = next;
        fs = f_next;
        if (done) break;
    }
    if (s > kLogHuge) return kInf;
    return std::exp(s);
}

}  // namespace bsde
