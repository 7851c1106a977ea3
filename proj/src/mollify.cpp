#include "bsdekit/mollify.hpp"

#include "bsdekit/common.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace bsdekit {

namespace {

// Unnormalized bump on (-1, 1).
double bump(double v) {
    const double s = 1.0 - v * v;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

// C^1 cubic ramp: 1 on [-m, m], 0 outside [-m-1, m+1].
double plateau(double u, double m) {
    const double r = std::fabs(u);
    if (r <= m) return 1.0;
    if (r >= m + 1.0) return 0.0;
    const double s = r - m;
    return 1.0 - s * s * (3.0 - 2.0 * s);
}

struct SimpsonRule {
    std::vector<double> nodes;   // in [-1, 1]
    std::vector<double> weights; // bump(node) * simpson coefficient, normalized
};

// Rule cache per node count; the normalization divides by the *same rule's*
// bump mass so the discrete kernel sums to exactly one.
const SimpsonRule& simpson_rule(int points) {
    static std::map<int, SimpsonRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(points);
    if (it != cache.end()) return it->second;

    SimpsonRule rule;
    const int np = points;
    const double h = 2.0 / (np - 1);
    rule.nodes.resize(static_cast<std::size_t>(np));
    rule.weights.resize(static_cast<std::size_t>(np));
    double mass = 0.0;
    for (int i = 0; i < np; ++i) {
        const double v = -1.0 + h * i;
        double coeff;
        if (i == 0 || i == np - 1) coeff = 1.0;
        else coeff = (i % 2 == 1) ? 4.0 : 2.0;
        rule.nodes[static_cast<std::size_t>(i)] = v;
        const double w = coeff * bump(v);
        rule.weights[static_cast<std::size_t>(i)] = w;
        mass += w;
    }
    for (auto& w : rule.weights) w /= mass;
    return cache.emplace(points, std::move(rule)).first->second;
}

} // namespace

int MollifierSpec::default_radius(int n, double l_q, double horizon) {
    const double r = std::exp(0.5) * (n + 2.0 * l_q) *
                     std::sqrt(1.0 + horizon * horizon);
    return static_cast<int>(std::floor(r)) + 1;
}

int MollifierSpec::radius(int level) const {
    return radius_fn ? radius_fn(level) : default_radius(level, l_q, horizon);
}

std::function<double(double)>
build_mollified(const std::function<double(double)>& h, const MollifierSpec& spec) {
    if (spec.n < 1) throw ConfigError("mollifier level must be positive");
    if (spec.quad_points < 65 || spec.quad_points % 2 == 0)
        throw ConfigError("mollifier quadrature needs an odd node count >= 65");

    const SimpsonRule& rule = simpson_rule(spec.quad_points);
    const double n = static_cast<double>(spec.n);
    const double h0 = std::fabs(h(0.0));
    if (!std::isfinite(h0)) throw NumericError("mollifier: driver not finite at 0");
    const double scale = n / std::max(n, h0);
    const double m = static_cast<double>(spec.radius(spec.n + 1));
    const auto hfn = h; // own a copy so the closure outlives the caller's lambda

    return [hfn, &rule, n, scale, m](double y) {
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double u = y - rule.nodes[i] / n;
            const double w = rule.weights[i];
            if (w == 0.0) continue;
            acc += w * plateau(u, m) * scale * hfn(u);
        }
        if (!std::isfinite(acc))
            throw NumericError("mollifier: quadrature produced a non-finite value");
        return acc;
    };
}

double lipschitz_estimate(const std::function<double(double)>& g, double lo,
                          double hi, int samples) {
    if (!(lo < hi) || samples < 2)
        throw ConfigError("lipschitz_estimate needs lo < hi and >= 2 samples");
    const double step = (hi - lo) / (samples - 1);
    double prev = g(lo);
    double best = 0.0;
    for (int i = 1; i < samples; ++i) {
        const double cur = g(lo + step * i);
        best = std::max(best, std::fabs(cur - prev) / step);
        prev = cur;
    }
    return best;
}

double local_monotonicity_check(const std::function<double(double)>& h_n,
                                double radius, int samples) {
    if (samples < 2) throw ConfigError("monotonicity check needs >= 2 samples");
    std::vector<double> ys(static_cast<std::size_t>(samples));
    std::vector<double> hs(static_cast<std::size_t>(samples));
    const double step = 2.0 * radius / (samples - 1);
    for (int i = 0; i < samples; ++i) {
        ys[static_cast<std::size_t>(i)] = -radius + step * i;
        hs[static_cast<std::size_t>(i)] = h_n(ys[static_cast<std::size_t>(i)]);
    }
    double worst = -kInf;
    for (int i = 0; i < samples; ++i)
        for (int j = i + 1; j < samples; ++j) {
            const double prod = (ys[static_cast<std::size_t>(j)] -
                                 ys[static_cast<std::size_t>(i)]) *
                                (hs[static_cast<std::size_t>(j)] -
                                 hs[static_cast<std::size_t>(i)]);
            worst = std::max(worst, prod);
        }
    return worst;
}

} // namespace bsdekit
