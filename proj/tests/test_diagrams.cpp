#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "phi4/diagrams.hpp"

using namespace phi4::diagrams;

namespace {

// trees generated by phi^(n) = sum_{a+b+c=n-1} (1/6) phi^(a) phi^(b) phi^(c) with phi^(0) = x_1 + ... + x_m,
// keeping multilinear terms; keys are (leaf mask, nested string)
using Poly = std::map<std::pair<unsigned, std::string>, Rational>;

std::map<std::string, Rational> recursion_trees(int m, int order) {
    std::vector<Poly> phi(order + 1);
    for (int i = 1; i <= m; ++i) phi[0][{1u << i, std::to_string(i)}] = 1;
    for (int n = 1; n <= order; ++n)
        for (int a = 0; a < n; ++a)
            for (int b = 0; a + b < n; ++b) {
                const int c = n - 1 - a - b;
                for (const auto& [ka, ca] : phi[a])
                    for (const auto& [kb, cb] : phi[b]) {
                        if (ka.first & kb.first) continue;
                        for (const auto& [kc, cc] : phi[c]) {
                            if ((ka.first | kb.first) & kc.first) continue;
                            std::vector<std::string> s{ka.second, kb.second, kc.second};
                            std::sort(s.begin(), s.end());
                            phi[n][{ka.first | kb.first | kc.first, "(" + s[0] + " " + s[1] + " " + s[2] + ")"}] +=
                                ca * cb * cc / Rational(6);
                        }
                    }
            }
    std::map<std::string, Rational> out;
    const unsigned full = ((1u << (m + 1)) - 1) & ~1u;
    for (const auto& [key, c] : phi[order])
        if (key.first == full) out[key.second] = c;
    return out;
}

// nested string -> diagram rooted at Out(1)*
Diagram from_nested(const std::string& s) {
    Diagram d;
    d.legs.push_back({LegKind::Out, 1, true, -1});
    std::size_t p = 0;
    std::function<void(int)> parse = [&](int parent) {
        while (s[p] == ' ') ++p;
        if (s[p] == '(') {
            ++p;
            const int v = d.k++;
            if (parent >= 0)
                d.edges.push_back({parent, v, Line::S0});
            else
                d.legs[0].vertex = v;
            for (int i = 0; i < 3; ++i) parse(v);
            while (s[p] == ' ') ++p;
            ++p;
        } else {
            std::size_t q = p;
            while (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) ++q;
            d.legs.push_back({LegKind::In, std::stoi(s.substr(p, q - p)), false, parent});
            p = q;
        }
    };
    parse(-1);
    return d;
}

// explicit vertex bijection search, no colour refinement
bool isomorphic(const Diagram& x, const Diagram& y) {
    if (x.k != y.k || x.legs.size() != y.legs.size() || x.edges.size() != y.edges.size()) return false;
    auto legs_of = [](const Diagram& d, const std::vector<int>& perm) {
        std::multiset<std::pair<std::string, int>> s;
        for (const auto& l : d.legs) s.insert({l.tag(), l.vertex < 0 ? -1 : perm[l.vertex]});
        return s;
    };
    auto edges_of = [](const Diagram& d, const std::vector<int>& perm) {
        std::multiset<std::tuple<int, int, int>> s;
        for (const auto& e : d.edges)
            s.insert({std::min(perm[e.a], perm[e.b]), std::max(perm[e.a], perm[e.b]), static_cast<int>(e.label)});
        return s;
    };
    std::vector<int> id(x.k);
    std::iota(id.begin(), id.end(), 0);
    const auto ly = legs_of(y, id);
    const auto ey = edges_of(y, id);
    std::vector<int> perm = id;
    do {
        if (legs_of(x, perm) == ly && edges_of(x, perm) == ey) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

long long double_factorial(int n) {
    long long f = 1;
    for (int i = n; i > 1; i -= 2) f *= i;
    return f;
}

}  // namespace

TEST_CASE("line and loop counting laws for n <= 8, k <= 3") {
    const auto t0 = std::chrono::steady_clock::now();
    int total = 0;
    for (int n = 0; n <= 8; n += 2)
        for (int k = 0; k <= 3; ++k) {
            if (n == 0 && k == 0) continue;
            auto ds = enumerate_diagrams(n, k);
            // connected needs n <= 2k + 2
            CHECK(ds.empty() == (k == 0 ? n != 2 : n > 2 * k + 2));
            for (const auto& d : ds) {
                REQUIRE(d.connected());
                for (int deg : d.degrees()) CHECK(deg == 4);
                CHECK(d.lines() == n / 2 + 2 * k);
                CHECK(d.loops() == k - n / 2 + 1);
                CHECK(hbar_power(d) == n - 1 + d.loops());
                ++total;
            }
        }
    CHECK(total > 100);
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 10.0);
    CHECK(enumerate_diagrams(3, 1).empty());
}

TEST_CASE("tree enumeration") {
    auto t2 = enumerate_trees(2).trees;
    REQUIRE(t2.size() == 1);
    CHECK(t2[0].k == 0);
    CHECK(t2[0].lines() == 1);
    auto t4 = enumerate_trees(4).trees;
    REQUIRE(t4.size() == 1);
    CHECK(t4[0].k == 1);
    CHECK(t4[0].lines() == 4);
    auto odd = enumerate_trees(5);
    CHECK(odd.trees.empty());
    CHECK(odd.diagnostic.find("even") != std::string::npos);
    CHECK_THROWS(enumerate_trees(14));

    for (int n : {4, 6, 8}) {
        auto trees = enumerate_trees(n).trees;
        auto oracle = recursion_trees(n - 1, n / 2 - 1);
        CHECK(trees.size() == oracle.size());
        std::set<std::string> a, b;
        for (const auto& t : trees) {
            CHECK(t.k == n / 2 - 1);
            CHECK(t.loops() == 0);
            CHECK(t.lines() == n / 2 + 2 * t.k);
            CHECK(t.weight == Rational(1));
            a.insert(t.canonical_key());
        }
        for (const auto& [s, c] : oracle) {
            CHECK(c == Rational(1));
            b.insert(from_nested(s).canonical_key());
        }
        CHECK(a.size() == trees.size());
        CHECK(a == b);
        // the general enumerator finds the same trees among all diagrams
        std::set<std::string> c;
        for (const auto& d : enumerate_diagrams(n, n / 2 - 1))
            if (d.loops() == 0) c.insert(d.canonical_key());
        CHECK(c == a);
    }
    CHECK(enumerate_trees(6).trees.size() == 10);
    CHECK(enumerate_trees(8).trees.size() == 280);
}

TEST_CASE("canonical keys agree with explicit isomorphism search") {
    std::vector<Diagram> all;
    for (int n = 0; n <= 6; n += 2)
        for (int k = 1; k <= 3; ++k)
            for (auto& d : enumerate_diagrams(n, k)) all.push_back(d);
    std::mt19937 rng(3);
    for (std::size_t i = 0; i < all.size(); i += 3) {
        Diagram p = all[i];
        std::vector<int> perm(p.k);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (auto& l : p.legs)
            if (l.vertex >= 0) l.vertex = perm[l.vertex];
        for (auto& e : p.edges) {
            e.a = perm[e.a];
            e.b = perm[e.b];
            if (rng() % 2) std::swap(e.a, e.b);
        }
        std::shuffle(p.edges.begin(), p.edges.end(), rng);
        CHECK(p.canonical_key() == all[i].canonical_key());
        CHECK(isomorphic(p, all[i]));
    }
    // distinct keys within one (n, k) class are never isomorphic
    for (int k = 1; k <= 3; ++k) {
        auto ds = enumerate_diagrams(4, k);
        for (std::size_t i = 0; i < ds.size(); ++i)
            for (std::size_t j = i + 1; j < ds.size(); ++j) {
                CHECK(ds[i].canonical_key() != ds[j].canonical_key());
                CHECK_FALSE(isomorphic(ds[i], ds[j]));
            }
    }
}

TEST_CASE("Wick weights from exhaustive matching") {
    CHECK(qft_weight(enumerate_trees(2).trees[0]) == Rational(1));
    CHECK(qft_weight(enumerate_trees(4).trees[0]) == Rational(1));
    for (const auto& t : enumerate_trees(6).trees) CHECK(qft_weight(t) == Rational(1));
    CHECK(qft_weight(tadpole()) == Rational(1, 2));
    CHECK(qft_weight(simple_loop()) == Rational(1, 2));
    CHECK(qft_weight(triangle()) == Rational(1));
    for (int n = 0; n <= 4; n += 2)
        for (int k = 1; n + 4 * k <= 12; ++k)
            for (const auto& d : enumerate_diagrams(n, k)) CHECK(qft_weight(d) == d.weight);
}

TEST_CASE("Cauchy trees") {
    auto o1 = enumerate_cauchy_trees(1);
    REQUIRE(o1.size() == 1);
    CHECK(o1[0].k == 1);
    CHECK(o1[0].multiplicity == 1);
    auto o2 = enumerate_cauchy_trees(2);
    REQUIRE(o2.size() == 1);
    CHECK(o2[0].multiplicity == 3);
    CHECK(o2[0].weight == Rational(1, 12));
    // scalar collapse of the recursion: c_n = sum (1/6) c_a c_b c_c
    std::vector<Rational> c{Rational(1)};
    for (int n = 1; n <= 5; ++n) {
        Rational s(0);
        for (int a = 0; a < n; ++a)
            for (int b = 0; a + b < n; ++b) s += c[a] * c[b] * c[n - 1 - a - b] / Rational(6);
        c.push_back(s);
    }
    for (int n = 1; n <= 5; ++n) {
        Rational total(0);
        for (const auto& t : enumerate_cauchy_trees(n)) {
            int leaves = 0, roots = 0;
            for (const auto& l : t.legs) (l.kind == LegKind::In ? leaves : roots)++;
            if (n <= 4) CHECK(leaves == 2 * n + 1);
            CHECK(roots == 1);
            CHECK(t.k == n);
            CHECK(t.loops() == 0);
            for (const auto& e : t.edges) CHECK(e.label == Line::Retarded);
            total += t.weight;
        }
        CHECK(total == c[n]);
    }
    CHECK(enumerate_cauchy_trees(3).size() == 2);
}

TEST_CASE("Xi pairings") {
    std::vector<Leg> ext{{LegKind::Out, 1, true, -1}, {LegKind::In, 1, false, -1}};
    auto t1 = enumerate_trees_with_xi(ext, 2);
    REQUIRE(t1.size() == 1);
    CHECK(t1[0].weight == Rational(1, 2));
    auto c1 = wick_contract_xi(t1[0]);
    REQUIRE(c1.size() == 1);
    CHECK(c1[0].weight == Rational(1, 2));
    CHECK(c1[0].beta_power == 1);
    CHECK(c1[0].n_xi() == 0);
    CHECK(c1[0].canonical_key() == [] {
        Diagram t = tadpole();
        t.edges[0].label = Line::P0;
        return t.canonical_key();
    }());

    // second order, Xi on different vertices
    std::vector<Leg> ext4 = {{LegKind::Out, 1, true, -1}, {LegKind::In, 1, false, -1}, {LegKind::In, 2, false, -1},
                             {LegKind::In, 3, false, -1}};
    int found = 0;
    for (const auto& t : enumerate_trees_with_xi(ext4, 2)) {
        int va = -1, vb = -1;
        for (const auto& l : t.legs)
            if (l.kind == LegKind::Xi) (va < 0 ? va : vb) = l.vertex;
        if (va == vb) continue;
        bool out_in1_together = t.legs[0].vertex == t.legs[1].vertex && t.legs[2].vertex == t.legs[3].vertex;
        if (!out_in1_together) continue;
        ++found;
        CHECK(t.weight == Rational(1));
        auto c = wick_contract_xi(t);
        REQUIRE(c.size() == 1);
        CHECK(c[0].loops() == 1);
        CHECK(c[0].loops() == c[0].k - c[0].n_external() / 2 + 1);
    }
    CHECK(found == 1);

    // four Xi legs on one vertex: 3 pairings, all the same double tadpole
    Diagram four;
    four.k = 1;
    for (int i = 1; i <= 4; ++i) four.legs.push_back({LegKind::Xi, i, false, 0});
    auto c4 = wick_contract_xi(four);
    REQUIRE(c4.size() == 1);
    CHECK(c4[0].multiplicity == 3);
    CHECK(c4[0].beta_power == 2);

    for (int r : {2, 4, 6}) {
        int tot = 0;
        auto trees = enumerate_trees_with_xi({{LegKind::Out, 1, true, -1}, {LegKind::In, 1, false, -1}}, r);
        for (const auto& c : wick_contract_xi(trees.back())) {
            tot += c.multiplicity;
            CHECK(c.loops() == c.k - c.n_external() / 2 + 1);
        }
        CHECK(tot == double_factorial(r - 1));
    }
    Diagram odd = four;
    odd.legs.pop_back();
    odd.legs.push_back({LegKind::In, 1, false, 0});
    CHECK(wick_contract_xi(odd).empty());
}

TEST_CASE("beta matching") {
    auto a = beta_match(tadpole()), b = beta_match(simple_loop()), c = beta_match(triangle());
    CHECK(a.classical_weight == Rational(1, 2));
    CHECK(b.classical_weight == Rational(1));
    CHECK(c.classical_weight == Rational(3));
    CHECK(a.loop_length == 1);
    CHECK(b.loop_length == 2);
    CHECK(c.loop_length == 3);
    CHECK(a.beta_pi == Rational(1, 2));
    CHECK(b.beta_pi == Rational(1, 2));
    CHECK(c.beta_pi == Rational(1));
    CHECK(c.beta_pi / a.beta_pi == Rational(2));
    CHECK(a.beta_pi_symmetry == Rational(1));
    CHECK(b.beta_pi_symmetry == Rational(1));
    CHECK(c.beta_pi_symmetry == Rational(1));
    CHECK(a.quantum_weight == qft_weight(tadpole()));
    CHECK(a.verified);
    CHECK(c.verified);

    Diagram two;  // two self-loops on one vertex: two loops
    two.k = 1;
    two.edges = {{0, 0, Line::S0}, {0, 0, Line::S0}};
    auto w = beta_match(two);
    CHECK_FALSE(w.verified);
    CHECK(w.note == "unverified against QFT");
    CHECK_THROWS(beta_match(enumerate_trees(4).trees[0]));
}

TEST_CASE("hbar power") {
    CHECK(hbar_power(enumerate_trees(4).trees[0]) == 3);
    CHECK(hbar_power(tadpole()) == 2);
    int checked = 0;
    for (int n = 2; n <= 6 && checked < 50; n += 2)
        for (int k = 1; k <= 3 && checked < 50; ++k)
            for (const auto& d : enumerate_diagrams(n, k)) {
                if (checked == 50) break;
                CHECK(hbar_power(d) == n - 1 + d.loops());
                ++checked;
            }
    CHECK(checked == 50);
}

TEST_CASE("serialization") {
    auto j = nlohmann::json::parse(to_json(triangle()));
    CHECK(j["vertices"] == 3);
    CHECK(j["edges"].size() == 3);
    CHECK(j["external"].size() == 6);
    CHECK(j["external"][0]["dotted"] == true);
    CHECK(j["weight"]["num"] == 1);
    CHECK(render_ascii(tadpole()).find("loop") != std::string::npos);
}
