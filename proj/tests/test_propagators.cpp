#include <numbers>

#include "doctest.h"
#include "phi4/propagators.hpp"
#include "test_helpers.hpp"

using namespace phi4;
using testutil::rel;

namespace {

LatticeSpec green_lattice() {
    LatticeSpec lat;
    lat.dim = 1;
    lat.N = 16;
    lat.L = 2 * std::numbers::pi;
    lat.dt = 0.01;
    lat.t_min = -4.0;
    lat.t_max = 4.0;
    lat.T = 1.0;
    return lat;
}

SpacetimeSource impulse(const LatticeSpec& lat, std::size_t j0, int n) {
    auto s = SpacetimeSource::zeros(lat);
    for (int i = 0; i < lat.N; ++i) s.values.at(j0, i) = std::cos(n * lat.coord(i)) / lat.dt;
    s.t_lo = s.t_hi = lat.time(j0);
    return s;
}

SpacetimeSource smooth_source(const LatticeSpec& lat) {
    auto s = SpacetimeSource::zeros(lat);
    for (std::size_t j = 0; j < lat.nt(); ++j) {
        const double t = lat.time(j);
        if (std::abs(t) > 2.5) continue;
        for (int i = 0; i < lat.N; ++i) {
            const double x = lat.coord(i);
            s.values.at(j, i) = std::exp(-t * t) * (std::cos(x) + 0.5 * std::sin(3 * x + 0.2));
        }
    }
    s.t_lo = -2.5;
    s.t_hi = 2.5;
    return s;
}

}  // namespace

TEST_CASE("free_evolve harmonic rotation") {
    auto lat = green_lattice();
    ModeTable m(lat);
    SpectralField s{std::vector<cplx>(16, 0.0), std::vector<cplx>(16, 0.0)};
    s.phi[2] = 1.0;
    s.phi[14] = 1.0;
    CHECK(m.omega[2] == doctest::Approx(2.0));
    auto out = free_evolve(lat, m, s, std::numbers::pi / 4);
    CHECK(std::abs(out.phi[2]) < 1e-15);
    CHECK(std::abs(out.pi[2] - cplx(-2.0, 0.0)) < 1e-15);
    auto same = free_evolve(lat, m, s, 0.0);
    CHECK(same.phi == s.phi);
    CHECK(same.pi == s.pi);
}

TEST_CASE("free_evolve group property and energy conservation") {
    std::mt19937_64 rng(5);
    auto lat = green_lattice();
    lat.mass = 0.2;
    auto s = testutil::random_state(lat, rng, 5);
    auto ab = free_evolve(lat, free_evolve(lat, s, 0.37), 1.11);
    auto direct = free_evolve(lat, s, 1.48);
    auto back = free_evolve(lat, free_evolve(lat, s, 0.9), -0.9);
    const double scale = testutil::max_abs(s.phi) + testutil::max_abs(s.pi);
    for (std::size_t i = 0; i < s.phi.size(); ++i) {
        CHECK(std::abs(ab.phi[i] - direct.phi[i]) < 1e-12 * scale);
        CHECK(std::abs(ab.pi[i] - direct.pi[i]) < 1e-12 * scale);
        CHECK(std::abs(back.phi[i] - s.phi[i]) < 1e-12 * scale);
    }
    CHECK(rel(energy(lat, direct, 0), energy(lat, s, 0)) < 1e-12);
    auto b = testutil::random_state(lat, rng, 5);
    CHECK(rel(energy_inner(lat, free_evolve(lat, s, 2.2), free_evolve(lat, b, 2.2)), energy_inner(lat, s, b)) <
          1e-10);
}

TEST_CASE("retarded impulse response matches the Duhamel closed form") {
    auto lat = green_lattice();
    const std::size_t j0 = 300;
    const double tau0 = lat.time(j0);
    auto g = apply_green(lat, PropagatorKind::Retarded, impulse(lat, j0, 3));
    for (std::size_t j = 0; j < lat.nt(); j += 7) {
        for (int i = 0; i < lat.N; i += 3) {
            const double t = lat.time(j);
            const double expect = t > tau0 ? std::cos(3 * lat.coord(i)) * std::sin(3 * (t - tau0)) / 3 : 0.0;
            if (j <= j0)
                CHECK(g.phi.at(j, i) == 0.0);
            else
                CHECK(std::abs(g.phi.at(j, i) - expect) < 1e-12);
        }
    }
    for (std::size_t j = 0; j < j0; ++j)
        for (int i = 0; i < lat.N; ++i) CHECK(g.dphi.at(j, i) == 0.0);
}

TEST_CASE("advanced impulse response is the time mirror") {
    auto lat = green_lattice();
    const std::size_t j0 = 300;
    const std::size_t jm = lat.nt() - 1 - j0;
    auto r = apply_green(lat, PropagatorKind::Retarded, impulse(lat, j0, 2));
    auto a = apply_green(lat, PropagatorKind::Advanced, impulse(lat, jm, 2));
    for (std::size_t j = 0; j < lat.nt(); ++j)
        for (int i = 0; i < lat.N; ++i) {
            CHECK(std::abs(a.phi.at(lat.nt() - 1 - j, i) - r.phi.at(j, i)) < 1e-13);
            CHECK(std::abs(a.dphi.at(lat.nt() - 1 - j, i) + r.dphi.at(j, i)) < 1e-13);
        }
    for (std::size_t j = jm + 1; j < lat.nt(); ++j) CHECK(a.phi.at(j, 0) == 0.0);
}

TEST_CASE("causal equals the average exactly and serial matches parallel") {
    auto lat = green_lattice();
    auto src = smooth_source(lat);
    auto r = apply_green(lat, PropagatorKind::Retarded, src);
    auto a = apply_green(lat, PropagatorKind::Advanced, src);
    auto c = apply_green(lat, PropagatorKind::Causal, src);
    double maxdiff = 0;
    for (std::size_t i = 0; i < c.phi.v.size(); ++i)
        maxdiff = std::max(maxdiff, std::abs(c.phi.v[i] - 0.5 * (r.phi.v[i] + a.phi.v[i])));
    CHECK(maxdiff < 1e-15);
    auto cs = apply_green(lat, PropagatorKind::Causal, src, Exec::Serial);
    CHECK(cs.phi.v == c.phi.v);
    CHECK(cs.dphi.v == c.dphi.v);
}

TEST_CASE("stepping agrees with the brute-force Duhamel sum") {
    auto lat = green_lattice();
    lat.t_min = -1.0;
    lat.t_max = 1.0;
    lat.T = 0.5;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    auto src = SpacetimeSource::zeros(lat);
    for (auto& x : src.values.v) x = g(rng);
    src.t_lo = lat.t_min;
    src.t_hi = lat.t_max;
    ModeTable m(lat);
    auto f = spectral_series(lat, src.values);
    for (bool ret : {true, false}) {
        auto res = apply_green(lat, ret ? PropagatorKind::Retarded : PropagatorKind::Advanced, src);
        auto ph = spectral_series(lat, res.phi);
        for (std::size_t mode : {1u, 4u, 8u}) {
            std::vector<cplx> fm(lat.nt());
            for (std::size_t j = 0; j < lat.nt(); ++j) fm[j] = f.slice(j)[mode];
            auto ref = duhamel_reference(fm, m.omega[mode], lat.dt, ret);
            for (std::size_t j = 0; j < lat.nt(); ++j) CHECK(std::abs(ph.slice(j)[mode] - ref[j]) < 1e-12);
        }
    }
}

TEST_CASE("retarded response solves the mode equation at second order") {
    double res[2];
    for (int pass = 0; pass < 2; ++pass) {
        auto lat = green_lattice();
        lat.dt = pass == 0 ? 0.02 : 0.01;
        auto src = smooth_source(lat);
        auto r = apply_green(lat, PropagatorKind::Retarded, src);
        auto ph = spectral_series(lat, r.phi);
        auto f = spectral_series(lat, src.values);
        ModeTable m(lat);
        double worst = 0;
        for (std::size_t j = 1; j + 1 < lat.nt(); ++j)
            for (std::size_t k : {1u, 3u}) {
                const cplx dd = (ph.slice(j + 1)[k] - 2.0 * ph.slice(j)[k] + ph.slice(j - 1)[k]) / (lat.dt * lat.dt);
                worst = std::max(worst, std::abs(dd + m.omega[k] * m.omega[k] * ph.slice(j)[k] - f.slice(j)[k]));
            }
        res[pass] = worst;
    }
    const double order = std::log2(res[0] / res[1]);
    CHECK(order == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("reciprocity: advanced kernel is the swapped retarded kernel") {
    auto lat = green_lattice();
    const std::size_t j0 = 250, j1 = 520;
    const int x0 = 3, x1 = 11;
    auto point = [&](std::size_t j, int i) {
        auto s = SpacetimeSource::zeros(lat);
        s.values.at(j, i) = 1.0 / (lat.dt * lat.h());
        s.t_lo = s.t_hi = lat.time(j);
        return s;
    };
    auto r = apply_green(lat, PropagatorKind::Retarded, point(j0, x0));
    auto a = apply_green(lat, PropagatorKind::Advanced, point(j1, x1));
    CHECK(std::abs(r.phi.at(j1, x1) - a.phi.at(j0, x0)) < 1e-12);
    CHECK(std::abs(r.phi.at(j1, x1)) > 1e-3);
}

TEST_CASE("support violations are domain errors") {
    auto lat = green_lattice();
    auto s = smooth_source(lat);
    s.t_hi = 1.0;
    CHECK_THROWS_AS(apply_green(lat, PropagatorKind::Retarded, s), DomainError);
    auto s2 = smooth_source(lat);
    s2.t_hi = lat.t_max + 1.0;
    CHECK_THROWS_AS(apply_green(lat, PropagatorKind::Retarded, s2), DomainError);
    CHECK_THROWS_AS(apply_green(lat, PropagatorKind::Feynman, smooth_source(lat)), DomainError);
}

TEST_CASE("fundamental solutions: i K0 is (R - A)/(2 pi), P0 is free") {
    auto lat = green_lattice();
    auto src = smooth_source(lat);
    auto r = apply_green(lat, PropagatorKind::Retarded, src);
    auto a = apply_green(lat, PropagatorKind::Advanced, src);
    auto k = apply_fundamental(lat, PropagatorKind::FundK0, src.values);
    double worst = 0, scale = 0;
    for (std::size_t i = 0; i < k.phi.v.size(); ++i) {
        worst = std::max(worst, std::abs(k.phi.v[i] - (r.phi.v[i] - a.phi.v[i]) / (2 * std::numbers::pi)));
        scale = std::max(scale, std::abs(k.phi.v[i]));
    }
    CHECK(worst < 1e-12 * scale);
    auto p = apply_fundamental(lat, PropagatorKind::FundP0, src.values);
    ModeTable m(lat);
    // free evolution of a slice reproduces a later slice
    auto s0 = p.phi.state(100, p.dphi);
    auto s1 = free_evolve(lat, s0, 500 * lat.dt);
    auto s1ref = p.phi.state(600, p.dphi);
    for (int i = 0; i < lat.N; ++i) CHECK(std::abs(s1.phi[i] - s1ref.phi[i]) < 1e-11);
}

TEST_CASE("momentum-space values") {
    MomentumPoint p;
    p.omega = 1.0;
    p.p = {1.0, 0, 0};
    p.eps = 1e-2;
    CHECK(momentum_value(PropagatorKind::Causal, p).real() == 0.0);
    CHECK(momentum_value(PropagatorKind::FundP0, p).real() == doctest::Approx(100.0));
    CHECK(momentum_value(PropagatorKind::Feynman, p).imag() == doctest::Approx(-100.0));
    p.omega = std::sqrt(2.0);
    p.eps = 1e-9;
    CHECK(std::abs(momentum_value(PropagatorKind::Feynman, p) - 1.0) < 1e-8);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 100; ++i) {
        MomentumPoint q;
        q.omega = u(rng);
        q.p = {u(rng), u(rng), u(rng)};
        q.eps = std::abs(u(rng)) + 1e-3;
        const cplx f = momentum_value(PropagatorKind::Feynman, q);
        const cplx s = momentum_value(PropagatorKind::Causal, q);
        const cplx pp = momentum_value(PropagatorKind::FundP0, q);
        CHECK(f == s - cplx(0, 1) * pp);
    }
    p.eps = 0.0;
    CHECK_THROWS_AS(momentum_value(PropagatorKind::Feynman, p), DomainError);
}
