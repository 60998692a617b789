#include "crot/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crot {

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

double log_sum_exp(std::span<const double> values) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) m = std::max(m, v);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

namespace {

// Kronrod-15 abscissae with embedded Gauss-7 weights.
// Column 0: |x|, column 1: Gauss weight (0 for Kronrod-only nodes),
// column 2: Kronrod weight.
constexpr double kGk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529}};

struct Interval {
    double a, b, value, error;
};

void eval_gk15(const std::function<double(double)>& f, double a, double b,
               double& value, double& error) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double g7 = kGk15[0][1] * f0;
    double k15 = kGk15[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGk15[i][0];
        const double fi = f(mid + dx) + f(mid - dx);
        g7 += kGk15[i][1] * fi;
        k15 += kGk15[i][2] * fi;
    }
    g7 *= half;
    k15 *= half;
    value = k15;
    // |K15 - G7| is a conservative error proxy for the K15 value.
    error = std::fabs(k15 - g7) + 1e-300;
    if (!std::isfinite(error)) error = std::numeric_limits<double>::infinity();
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol, double abs_tol, int max_intervals) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::vector<Interval> stack;
    Interval first{a, b, 0.0, 0.0};
    eval_gk15(f, a, b, first.value, first.error);
    stack.push_back(first);

    for (;;) {
        double total = 0.0, err = 0.0;
        for (const auto& iv : stack) {
            total += iv.value;
            err += iv.error;
        }
        out.value = total;
        out.abs_error = err;
        out.intervals = static_cast<int>(stack.size());
        if (err <= std::max(abs_tol, rel_tol * std::fabs(total))) {
            out.converged = true;
            return out;
        }
        if (static_cast<int>(stack.size()) >= max_intervals) {
            out.converged = false;
            return out;
        }
        std::size_t worst = 0;
        for (std::size_t i = 1; i < stack.size(); ++i)
            if (stack[i].error > stack[worst].error) worst = i;
        const Interval iv = stack[worst];
        const double mid = 0.5 * (iv.a + iv.b);
        if (mid <= iv.a || mid >= iv.b) {
            // interval no longer splittable at double precision
            out.converged = out.abs_error <= std::max(abs_tol * 10, rel_tol * 10 * std::fabs(out.value));
            return out;
        }
        Interval left{iv.a, mid, 0, 0}, right{mid, iv.b, 0, 0};
        eval_gk15(f, left.a, left.b, left.value, left.error);
        eval_gk15(f, right.a, right.b, right.value, right.error);
        stack[worst] = left;
        stack.push_back(right);
    }
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration from the Chebyshev estimate of the i-th root.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

double bisect_increasing(const std::function<double(double)>& cdf, double target,
                         double lo, double hi, double tol) {
    double flo = cdf(lo);
    double fhi = cdf(hi);
    // widen until the target is bracketed
    for (int i = 0; i < 200 && (flo > target || fhi < target); ++i) {
        const double width = hi - lo;
        if (flo > target) {
            lo -= width;
            flo = cdf(lo);
        }
        if (fhi < target) {
            hi += width;
            fhi = cdf(hi);
        }
    }
    if (flo > target || fhi < target)
        throw std::runtime_error("bisect_increasing: failed to bracket target");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cdf(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace crot
