#include <cstdio>
#include <numbers>

#include "doctest.h"
#include "phi4/core.hpp"
#include "phi4/propagators.hpp"
#include "test_helpers.hpp"

using namespace phi4;
using testutil::rel;

TEST_CASE("lattice validation") {
    LatticeSpec lat = testutil::small_lattice();
    CHECK_NOTHROW(lat.validate());
    lat.N = 31;
    CHECK_THROWS_AS(lat.validate(), ConfigError);
    lat = testutil::small_lattice();
    lat.T = 6.0;
    CHECK_THROWS_AS(lat.validate(), ConfigError);
    lat = testutil::small_lattice();
    lat.dt = 0.03;
    CHECK_THROWS_AS(lat.validate(), ConfigError);
    lat = testutil::small_lattice();
    CHECK(lat.nt() == 201);
    CHECK(lat.time(lat.first_after_window()) > lat.T);
    CHECK(lat.time(lat.last_before_window()) < -lat.T);
    CHECK(lat.in_window(100));
}

TEST_CASE("mode table excludes zero mode when massless") {
    LatticeSpec lat = testutil::small_lattice(2, 8);
    ModeTable m(lat);
    CHECK(m.size == 64);
    CHECK(m.retained[0] == 0);
    for (std::size_t i = 1; i < m.size; ++i) {
        CHECK(m.retained[i] == 1);
        CHECK(m.omega[i] > 0);
        CHECK(m.partner[m.partner[i]] == i);
    }
    lat.mass = 0.5;
    ModeTable mm(lat);
    CHECK(mm.retained[0] == 1);
    CHECK(mm.omega[0] == doctest::Approx(0.5));
}

TEST_CASE("constant field has a single zero-mode coefficient") {
    LatticeSpec lat = testutil::small_lattice(1, 16);
    lat.mass = 1.0;
    FieldState s{std::vector<double>(16, 2.5), std::vector<double>(16, 0.0)};
    auto sp = to_spectral(lat, s);
    CHECK(sp.phi[0].real() == doctest::Approx(2.5));
    for (std::size_t i = 1; i < 16; ++i) CHECK(std::abs(sp.phi[i]) < 1e-15);
}

TEST_CASE("single harmonic gives two equal coefficients") {
    LatticeSpec lat = testutil::small_lattice(1, 16);
    FieldState s{std::vector<double>(16), std::vector<double>(16, 0.0)};
    for (int i = 0; i < 16; ++i) s.phi[i] = std::cos(2 * std::numbers::pi * lat.coord(i) / lat.L);
    auto sp = to_spectral(lat, s);
    ModeTable m(lat);
    for (std::size_t i = 0; i < 16; ++i) {
        if (std::abs(m.n[i][0]) == 1)
            CHECK(std::abs(sp.phi[i]) == doctest::Approx(0.5));
        else
            CHECK(std::abs(sp.phi[i]) < 1e-15);
    }
}

TEST_CASE("spectral round trip and exact conjugate symmetry") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int d = 1; d <= 3; ++d) {
        LatticeSpec lat = testutil::small_lattice(d, d == 3 ? 8 : 16);
        FieldState s{std::vector<double>(lat.points()), std::vector<double>(lat.points())};
        for (auto& x : s.phi) x = g(rng);
        for (auto& x : s.pi) x = g(rng);
        auto sp = to_spectral(lat, s);
        ModeTable m(lat);
        for (std::size_t i = 0; i < m.size; ++i) {
            CHECK(sp.phi[m.partner[i]] == std::conj(sp.phi[i]));
            CHECK(sp.pi[m.partner[i]] == std::conj(sp.pi[i]));
        }
        auto back = from_spectral(lat, sp);
        double err = 0, nrm = 0;
        for (std::size_t i = 0; i < s.phi.size(); ++i) {
            err = std::max(err, std::abs(back.phi[i] - s.phi[i]) + std::abs(back.pi[i] - s.pi[i]));
            nrm = std::max(nrm, std::abs(s.phi[i]));
        }
        CHECK(err / nrm < 1e-13);
    }
    LatticeSpec lat = testutil::small_lattice(1, 16);
    FieldState bad{std::vector<double>(15), std::vector<double>(15)};
    CHECK_THROWS_AS(to_spectral(lat, bad), ConfigError);
}

TEST_CASE("plane wave energy") {
    LatticeSpec lat = testutil::small_lattice(1, 32);
    const double A = 0.7, k = 2 * std::numbers::pi * 3 / lat.L;
    FieldState s{std::vector<double>(32), std::vector<double>(32)};
    for (int i = 0; i < 32; ++i) {
        const double x = lat.coord(i);
        s.phi[i] = A * std::cos(k * x);
        s.pi[i] = A * k * std::sin(k * x);
    }
    CHECK(rel(energy(lat, s, 0.0), 0.5 * A * A * k * k * lat.L) < 1e-13);
    CHECK(rel(energy_inner(lat, s, s), 0.5 * A * A * k * k * lat.L) < 1e-13);
    FieldState z{std::vector<double>(32, 0.0), std::vector<double>(32, 0.0)};
    CHECK(energy(lat, z, 1.0) == 0.0);
}

TEST_CASE("grid energy equals the mode sum") {
    std::mt19937_64 rng(11);
    for (int d = 1; d <= 3; ++d) {
        LatticeSpec lat = testutil::small_lattice(d, d == 3 ? 8 : 16);
        lat.mass = d == 2 ? 0.3 : 0.0;
        auto s = testutil::random_state(lat, rng, 3);
        ModeTable m(lat);
        CHECK(rel(energy(lat, s, 0.0), energy_mode_sum(lat, m, to_spectral(lat, s))) < 1e-10);
        CHECK(energy(lat, s, 0.5) >= energy(lat, s, 0.0));
    }
}

TEST_CASE("energy additive over disjoint modes at zero coupling") {
    LatticeSpec lat = testutil::small_lattice(1, 32);
    FieldState a{std::vector<double>(32), std::vector<double>(32, 0.0)}, b = a, ab = a;
    for (int i = 0; i < 32; ++i) {
        const double x = lat.coord(i);
        a.phi[i] = std::cos(2 * std::numbers::pi * 2 * x / lat.L);
        b.phi[i] = 0.3 * std::sin(2 * std::numbers::pi * 5 * x / lat.L);
        ab.phi[i] = a.phi[i] + b.phi[i];
    }
    CHECK(rel(energy(lat, ab, 0), energy(lat, a, 0) + energy(lat, b, 0)) < 1e-13);
    CHECK(std::abs(energy_inner(lat, a, b)) < 1e-14);
}

TEST_CASE("energy inner product is time-slice independent") {
    std::mt19937_64 rng(3);
    LatticeSpec lat = testutil::small_lattice(1, 32);
    auto a = testutil::random_state(lat, rng), b = testutil::random_state(lat, rng);
    const double e0 = energy_inner(lat, a, b);
    const double e1 = energy_inner(lat, free_evolve(lat, a, 7 * lat.dt), free_evolve(lat, b, 7 * lat.dt));
    CHECK(rel(e1, e0) < 1e-10);
    CHECK(rel(energy_inner(lat, b, a), e0) < 1e-13);
}

TEST_CASE("fock inner product: box constant from mode sums") {
    LatticeSpec lat = testutil::small_lattice(1, 32);
    ModeTable m(lat);
    // single complex mode n = 4 with positive-frequency amplitude alpha
    const cplx alpha(0.3, -0.2);
    const double k = 2 * std::numbers::pi * 4 / lat.L;
    SpectralField sp{std::vector<cplx>(32, 0.0), std::vector<cplx>(32, 0.0)};
    std::size_t ip = 4, im = 28;
    CHECK(m.n[ip][0] == 4);
    CHECK(m.n[im][0] == -4);
    // phi_k = alpha, pi_k = -i w alpha, partner conjugate
    sp.phi[ip] = alpha;
    sp.pi[ip] = cplx(0, -k) * alpha;
    sp.phi[im] = std::conj(sp.phi[ip]);
    sp.pi[im] = std::conj(sp.pi[ip]);
    auto s = from_spectral(lat, sp);
    // oracle: sum over k of 8 pi^2 L w Re(conj(a_k) a_k), where a_k = (phi_k + i pi_k / w)/2
    double oracle = 0;
    for (std::size_t i : {ip, im}) {
        const cplx a = 0.5 * (sp.phi[i] + cplx(0, 1) * sp.pi[i] / k);
        oracle += 8 * std::numbers::pi * std::numbers::pi * lat.L * k * std::norm(a);
    }
    const double f = fock_inner(lat, s, s);
    CHECK(rel(f, oracle) < 1e-12);
    // energy_inner = (w/pi) * fock_inner * c with c fixed by the mode sums
    const double c = energy_inner(lat, s, s) / (k / std::numbers::pi * f);
    CHECK(rel(c, 1.0 / (4 * std::numbers::pi)) < 1e-12);
    // time independence and orthogonality
    CHECK(rel(fock_inner(lat, free_evolve(lat, s, 1.3), free_evolve(lat, s, 1.3)), f) < 1e-12);
    SpectralField sp2{std::vector<cplx>(32, 0.0), std::vector<cplx>(32, 0.0)};
    sp2.phi[5] = 1.0;
    sp2.phi[27] = 1.0;
    CHECK(std::abs(fock_inner(lat, s, from_spectral(lat, sp2))) < 1e-14);
}

TEST_CASE("spacetime integral uses trapezoid weights") {
    LatticeSpec lat = testutil::small_lattice(1, 8);
    SpacetimeField f = SpacetimeField::zeros(lat);
    for (auto& x : f.v) x = 1.0;
    CHECK(rel(spacetime_integral(lat, f), (lat.t_max - lat.t_min) * lat.L) < 1e-13);
}

TEST_CASE("snapshot and csv output") {
    std::vector<double> data{1.0, -2.5, 3.25, 1e-300, 7.0, 8.0};
    const std::string path = "test_snapshot.bin";
    write_snapshot(path, {2, 3}, data);
    std::vector<std::uint64_t> dims;
    auto back = read_snapshot(path, dims);
    CHECK(dims == std::vector<std::uint64_t>{2, 3});
    CHECK(back == data);
    CHECK_THROWS_AS(write_snapshot(path, {4}, data), ConfigError);
    std::remove(path.c_str());
    LatticeSpec lat = testutil::small_lattice(1, 8);
    FieldState s{std::vector<double>(8, 1.0), std::vector<double>(8, 2.0)};
    CHECK_NOTHROW(write_state_csv("test_state.csv", lat, s));
    std::remove("test_state.csv");
}
