#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <numbers>

#include "phi4/propagators.hpp"

namespace phi4 {
namespace {

using Integrand = std::function<cplx(double)>;

struct Panel {
    cplx value;
    double error;
};

Panel gk_panel(const Integrand& f, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    using G = boost::math::quadrature::gauss<double, 15>;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    auto rule = [&](const auto& xs, const auto& ws) {
        cplx s(0.0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x = xs[i];
            s += ws[i] * ((x == 0.0) ? f(c) : f(c + h * x) + f(c - h * x));
        }
        return h * s;
    };
    const cplx k = rule(GK::abscissa(), GK::weights());
    const cplx g = rule(G::abscissa(), G::weights());
    return {k, std::abs(k - g)};
}

cplx adaptive(const Integrand& f, double a, double b, double tol, int depth) {
    Panel p = gk_panel(f, a, b);
    if (p.error <= tol || depth >= 40) return p.value;
    const double m = 0.5 * (a + b);
    return adaptive(f, a, m, 0.5 * tol, depth + 1) + adaptive(f, m, b, 0.5 * tol, depth + 1);
}

cplx integrate_real_line(const Integrand& g, const std::vector<double>& poles, const std::vector<double>& widths,
                         double W, double tol, Exec ex) {
    std::vector<double> bp = {-W, W};
    for (std::size_t i = 0; i < poles.size(); ++i) {
        const double z = poles[i];
        double gap = 2 * W;
        for (std::size_t j = 0; j < poles.size(); ++j)
            if (j != i) gap = std::min(gap, std::abs(poles[j] - z));
        bp.push_back(z);
        for (double d = widths[i]; d < 0.45 * gap; d *= 4.0) {
            bp.push_back(z - d);
            bp.push_back(z + d);
        }
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    bp.erase(std::remove_if(bp.begin(), bp.end(), [&](double x) { return x < -W || x > W; }), bp.end());
    const long np = static_cast<long>(bp.size()) - 1;
    std::vector<cplx> parts(np + 2);
    const double per = tol / static_cast<double>(np + 2);
#pragma omp parallel for schedule(dynamic) if (ex == Exec::Parallel)
    for (long i = 0; i < np; ++i) parts[i] = adaptive(g, bp[i], bp[i + 1], per, 0);
    // tails by inversion w = +-1/u, exact change of variables
    auto right = [&](double u) { return g(1.0 / u) / (u * u); };
    auto left = [&](double u) { return g(-1.0 / u) / (u * u); };
    parts[np] = adaptive(right, 0.0, 1.0 / W, per, 0);
    parts[np + 1] = adaptive(left, 0.0, 1.0 / W, per, 0);
    cplx total(0.0);
    for (const auto& v : parts) total += v;
    return total;
}

cplx extrapolate_to_zero(const std::vector<double>& x, const std::vector<cplx>& y) {
    // Lagrange polynomial through (x_i, y_i) evaluated at 0
    cplx s(0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double l = 1.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (j != i) l *= (0.0 - x[j]) / (x[i] - x[j]);
        s += l * y[i];
    }
    return s;
}

}  // namespace

LemmaRepResult verify_lemmarep(const LemmaRepCase& c, const std::vector<double>& eps_schedule, Exec ex) {
    const int r = static_cast<int>(c.k.size());
    if (r < 1) throw DomainError("lemmarep needs at least one momentum");
    if (eps_schedule.empty()) throw DomainError("lemmarep needs a nonempty eps schedule");
    LemmaRepResult res;
    res.r = r;
    res.eps = eps_schedule;
    std::vector<double> w0(r), p(r);
    for (int a = 0; a < r; ++a) {
        double s = 0;
        for (int i = 0; i < 3; ++i) s += (c.k[a][i + 1] + c.q[i]) * (c.k[a][i + 1] + c.q[i]);
        p[a] = std::sqrt(s);
        w0[a] = c.k[a][0];
        if (p[a] <= 0) throw DomainError("lemmarep: zero spatial momentum");
    }
    std::vector<double> poles;
    for (int a = 0; a < r; ++a) {
        poles.push_back(-w0[a] - p[a]);
        poles.push_back(-w0[a] + p[a]);
    }
    {
        auto sorted = poles;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i] - sorted[i - 1] < 1e-3)
                throw DomainError("lemmarep: coincident poles (momenta must be pairwise distinct)");
    }
    res.p = p;
    double pmax = 0;
    for (double x : poles) pmax = std::max(pmax, std::abs(x));
    const double W = 50.0 * std::max(*std::max_element(p.begin(), p.end()), pmax / 50.0 + 1e-12);

    for (double eps : eps_schedule) {
        if (!(eps > 0)) throw DomainError("lemmarep: eps must be positive");
        std::vector<double> widths;
        for (int a = 0; a < r; ++a) {
            widths.push_back(eps / (2 * p[a]));
            widths.push_back(eps / (2 * p[a]));
        }
        auto lhs_f = [&](double w) {
            cplx prod(1.0);
            for (int a = 0; a < r; ++a) {
                MomentumPoint m;
                m.omega = w + w0[a];
                m.p = {p[a], 0, 0};
                m.eps = eps;
                prod *= momentum_value(PropagatorKind::Feynman, m);
            }
            return prod;
        };
        auto rhs_f = [&](double w) {
            std::vector<double> s0(r), pp0(r);
            for (int a = 0; a < r; ++a) {
                MomentumPoint m;
                m.omega = w + w0[a];
                m.p = {p[a], 0, 0};
                m.eps = eps;
                s0[a] = momentum_value(PropagatorKind::Causal, m).real();
                pp0[a] = momentum_value(PropagatorKind::FundP0, m).real();  // pi * P0
            }
            cplx sum(0.0);
            for (int a = 0; a < r; ++a) {
                double prod = pp0[a];
                for (int b = 0; b < r; ++b)
                    if (b != a) prod *= s0[b];
                sum += prod;
            }
            return cplx(0.0, -1.0) * sum;
        };
        const cplx L = integrate_real_line(lhs_f, poles, widths, W, 1e-10, ex);
        const cplx R = integrate_real_line(rhs_f, poles, widths, W, 1e-10, ex);
        res.lhs_eps.push_back(L);
        res.rhs_eps.push_back(R);
        res.rel_err_eps.push_back(std::abs(L - R) / std::abs(R));
    }
    res.lhs = extrapolate_to_zero(eps_schedule, res.lhs_eps);
    res.rhs = extrapolate_to_zero(eps_schedule, res.rhs_eps);
    res.rel_err = std::abs(res.lhs - res.rhs) / std::abs(res.rhs);
    return res;
}

}  // namespace phi4
