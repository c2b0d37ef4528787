#include "phi4/diagrams.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace phi4::diagrams {

std::string to_string(Line l) {
    switch (l) {
        case Line::S0: return "S0";
        case Line::P0: return "P0";
        case Line::Retarded: return "R";
        case Line::Feynman: return "F";
    }
    return "?";
}

std::string to_string(LegKind k) {
    switch (k) {
        case LegKind::Out: return "Out";
        case LegKind::In: return "In";
        case LegKind::Xi: return "Xi";
    }
    return "?";
}

std::string Leg::tag() const {
    std::string s = to_string(kind);
    if (index != 0) s += "(" + std::to_string(index) + ")";
    if (dotted) s += "*";
    return s;
}

namespace {

std::string key_tag(const Leg& l, bool xi_labeled) {
    Leg c = l;
    if (!xi_labeled && c.kind == LegKind::Xi) c.index = 0;
    return c.tag();
}

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void join(int a, int b) { p[find(a)] = find(b); }
};

// nodes: vertices 0..k-1, legs k..k+n-1
UnionFind components(const Diagram& d) {
    const int n = static_cast<int>(d.legs.size());
    UnionFind uf(d.k + n);
    int pending = -1;
    for (int i = 0; i < n; ++i) {
        if (d.legs[i].vertex >= 0) {
            uf.join(d.k + i, d.legs[i].vertex);
        } else if (pending < 0) {
            pending = i;
        } else {
            uf.join(d.k + i, d.k + pending);
            pending = -1;
        }
    }
    for (const auto& e : d.edges) uf.join(e.a, e.b);
    return uf;
}

std::string serialize(const Diagram& d, const std::vector<int>& pos, bool xi_labeled) {
    // pos[v] = position of vertex v
    std::vector<std::vector<std::string>> at(d.k);
    std::vector<std::string> direct;
    for (const auto& l : d.legs) {
        if (l.vertex >= 0)
            at[pos[l.vertex]].push_back(key_tag(l, xi_labeled));
        else
            direct.push_back(key_tag(l, xi_labeled));
    }
    std::string s = "k" + std::to_string(d.k) + "|";
    for (auto& v : at) {
        std::sort(v.begin(), v.end());
        s += "[";
        for (auto& t : v) s += t + ",";
        s += "]";
    }
    std::sort(direct.begin(), direct.end());
    s += "|D";
    for (auto& t : direct) s += t + ",";
    std::vector<std::tuple<int, int, int>> es;
    for (const auto& e : d.edges) {
        int a = pos[e.a], b = pos[e.b];
        if (a > b) std::swap(a, b);
        es.emplace_back(a, b, static_cast<int>(e.label));
    }
    std::sort(es.begin(), es.end());
    s += "|E";
    for (auto& [a, b, l] : es) s += std::to_string(a) + "-" + std::to_string(b) + ":" + std::to_string(l) + ",";
    return s;
}

// colour refinement seeded by the attached legs
std::vector<int> refine_colors(const Diagram& d, bool xi_labeled) {
    std::vector<std::string> col(d.k);
    for (int v = 0; v < d.k; ++v) {
        std::vector<std::string> t;
        for (const auto& l : d.legs)
            if (l.vertex == v) t.push_back(key_tag(l, xi_labeled));
        for (const auto& e : d.edges)
            if (e.a == v && e.b == v) t.push_back("loop" + to_string(e.label));
        std::sort(t.begin(), t.end());
        for (auto& x : t) col[v] += x + ",";
    }
    std::vector<int> rank(d.k, 0);
    auto rerank = [&]() {
        std::vector<std::string> u = col;
        std::sort(u.begin(), u.end());
        u.erase(std::unique(u.begin(), u.end()), u.end());
        for (int v = 0; v < d.k; ++v) rank[v] = static_cast<int>(std::lower_bound(u.begin(), u.end(), col[v]) - u.begin());
        return u.size();
    };
    std::size_t classes = rerank();
    for (int it = 0; it < d.k; ++it) {
        std::vector<std::string> next(d.k);
        for (int v = 0; v < d.k; ++v) {
            std::vector<std::string> nb;
            for (const auto& e : d.edges) {
                if (e.a == e.b) continue;
                if (e.a == v) nb.push_back(std::to_string(rank[e.b]) + to_string(e.label));
                if (e.b == v) nb.push_back(std::to_string(rank[e.a]) + to_string(e.label));
            }
            std::sort(nb.begin(), nb.end());
            next[v] = std::to_string(rank[v]) + "/";
            for (auto& x : nb) next[v] += x + ",";
        }
        col = next;
        const std::size_t c = rerank();
        if (c == classes) break;
        classes = c;
    }
    return rank;
}

// calls f(pos) for every vertex ordering consistent with the colour classes
void for_each_ordering(const std::vector<int>& rank, const std::function<void(const std::vector<int>&)>& f) {
    const int k = static_cast<int>(rank.size());
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rank[a] < rank[b]; });
    std::vector<std::pair<int, int>> blocks;
    for (int i = 0; i < k;) {
        int j = i;
        while (j < k && rank[order[j]] == rank[order[i]]) ++j;
        blocks.emplace_back(i, j);
        i = j;
    }
    std::vector<int> pos(k);
    std::function<void(std::size_t)> rec = [&](std::size_t b) {
        if (b == blocks.size()) {
            for (int i = 0; i < k; ++i) pos[order[i]] = i;
            f(pos);
            return;
        }
        auto [lo, hi] = blocks[b];
        std::sort(order.begin() + lo, order.begin() + hi);
        do {
            rec(b + 1);
        } while (std::next_permutation(order.begin() + lo, order.begin() + hi));
    };
    rec(0);
}

long long factorial(int n) {
    long long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Diagram with_label(Diagram d, Line l) {
    for (auto& e : d.edges) e.label = l;
    return d;
}

int loop_length(const Diagram& d) {
    std::vector<int> deg(d.k, 0);
    std::vector<bool> alive(d.edges.size(), true);
    for (const auto& e : d.edges) {
        deg[e.a]++;
        deg[e.b]++;
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < d.edges.size(); ++i) {
            if (!alive[i]) continue;
            const auto& e = d.edges[i];
            if (e.a != e.b && (deg[e.a] == 1 || deg[e.b] == 1)) {
                alive[i] = false;
                deg[e.a]--;
                deg[e.b]--;
                changed = true;
            }
        }
    }
    return static_cast<int>(std::count(alive.begin(), alive.end(), true));
}

// labeled trees rooted at legs[0]; every leg distinct
struct TreeBuilder {
    std::vector<Leg> legs;
    std::vector<Diagram> result;

    // a subtree is a leg index (leaf) or a vertex with three subtrees
    struct Node {
        int leaf = -1;
        std::vector<Node> kids;
    };

    static std::vector<std::vector<std::vector<int>>> three_blocks(const std::vector<int>& s) {
        // unordered partitions of s into three nonempty blocks of odd size
        std::vector<std::vector<std::vector<int>>> out;
        const int m = static_cast<int>(s.size());
        std::vector<int> lab(m, 0);
        std::function<void(int, int)> rec = [&](int i, int used) {
            if (i == m) {
                if (used != 3) return;
                std::vector<std::vector<int>> b(3);
                for (int j = 0; j < m; ++j) b[lab[j]].push_back(s[j]);
                for (auto& x : b)
                    if (x.size() % 2 == 0) return;
                out.push_back(b);
                return;
            }
            for (int c = 0; c < std::min(used + 1, 3); ++c) {
                lab[i] = c;
                rec(i + 1, std::max(used, c + 1));
            }
        };
        rec(0, 0);
        return out;
    }

    static std::vector<Node> subtrees(const std::vector<int>& s) {
        if (s.size() == 1) return {Node{s[0], {}}};
        std::vector<Node> out;
        for (const auto& b : three_blocks(s)) {
            auto A = subtrees(b[0]), B = subtrees(b[1]), C = subtrees(b[2]);
            for (const auto& a : A)
                for (const auto& x : B)
                    for (const auto& c : C) out.push_back(Node{-1, {a, x, c}});
        }
        return out;
    }

    void emit(const Node& top, Diagram& d, int parent) {
        if (top.leaf >= 0) {
            d.legs[top.leaf].vertex = parent;
            return;
        }
        const int v = d.k++;
        if (parent >= 0) d.edges.push_back({parent, v, Line::S0});
        for (const auto& c : top.kids) emit(c, d, v);
        if (parent < 0) d.legs[0].vertex = v;
    }

    void run() {
        const int n = static_cast<int>(legs.size());
        if (n == 2) {
            Diagram d;
            d.legs = legs;
            for (auto& l : d.legs) l.vertex = -1;
            result.push_back(d);
            return;
        }
        std::vector<int> rest(n - 1);
        std::iota(rest.begin(), rest.end(), 1);
        Diagram base;
        base.legs = legs;
        for (const auto& b : three_blocks(rest)) {
            auto A = subtrees(b[0]), B = subtrees(b[1]), C = subtrees(b[2]);
            for (const auto& a : A)
                for (const auto& x : B)
                    for (const auto& c : C) {
                        Diagram d = base;
                        emit(Node{-1, {a, x, c}}, d, -1);
                        result.push_back(std::move(d));
                    }
        }
    }
};

std::vector<Leg> standard_legs(int n) {
    std::vector<Leg> legs;
    if (n <= 0) return legs;
    legs.push_back({LegKind::Out, 1, true, -1});
    for (int j = 1; j < n; ++j) legs.push_back({LegKind::In, j, false, -1});
    return legs;
}

}  // namespace

int Diagram::n_external() const {
    return static_cast<int>(std::count_if(legs.begin(), legs.end(), [](const Leg& l) { return l.kind != LegKind::Xi; }));
}

int Diagram::n_xi() const { return static_cast<int>(legs.size()) - n_external(); }

int Diagram::lines() const {
    int direct = 0, attached = 0;
    for (const auto& l : legs) (l.vertex >= 0 ? attached : direct)++;
    return static_cast<int>(edges.size()) + attached + direct / 2;
}

int Diagram::loops() const {
    auto uf = components(*this);
    std::set<int> roots;
    for (int i = 0; i < k + static_cast<int>(legs.size()); ++i) roots.insert(uf.find(i));
    return lines() - (k + static_cast<int>(legs.size())) + static_cast<int>(roots.size());
}

bool Diagram::connected() const {
    auto uf = components(*this);
    const int n = k + static_cast<int>(legs.size());
    for (int i = 1; i < n; ++i)
        if (uf.find(i) != uf.find(0)) return false;
    return true;
}

std::vector<int> Diagram::degrees() const {
    std::vector<int> deg(k, 0);
    for (const auto& l : legs)
        if (l.vertex >= 0) deg[l.vertex]++;
    for (const auto& e : edges) {
        deg[e.a]++;
        deg[e.b]++;
    }
    return deg;
}

std::string Diagram::canonical_key(bool xi_labeled) const {
    const auto rank = refine_colors(*this, xi_labeled);
    std::string best;
    bool first = true;
    for_each_ordering(rank, [&](const std::vector<int>& pos) {
        std::string s = serialize(*this, pos, xi_labeled);
        if (first || s < best) best = std::move(s);
        first = false;
    });
    return best;
}

Rational symmetry_weight(const Diagram& d) {
    // vertex permutations preserving the labeled structure
    // orderings reaching the minimal serialization form one coset of the automorphism group
    std::string best;
    long long aut = 0;
    for_each_ordering(refine_colors(d, true), [&](const std::vector<int>& pos) {
        std::string s = serialize(d, pos, true);
        if (aut == 0 || s < best) {
            best = std::move(s);
            aut = 1;
        } else if (s == best) {
            ++aut;
        }
    });
    std::map<std::tuple<int, int, int>, int> mult;
    for (const auto& e : d.edges) mult[{std::min(e.a, e.b), std::max(e.a, e.b), static_cast<int>(e.label)}]++;
    for (const auto& [key, m] : mult) {
        aut *= factorial(m);
        if (std::get<0>(key) == std::get<1>(key)) aut *= 1LL << m;
    }
    return Rational(1, aut);
}

std::vector<Diagram> enumerate_diagrams(const std::vector<Leg>& legs_in, int k) {
    const int n = static_cast<int>(legs_in.size());
    std::map<std::string, Diagram> found;
    if ((n + 4 * k) % 2 != 0 || k < 0) return {};
    if (k == 0) {
        if (n != 2) return {};
        Diagram d;
        d.legs = legs_in;
        for (auto& l : d.legs) l.vertex = -1;
        d.weight = symmetry_weight(d);
        return {d};
    }
    std::vector<int> assign(n, 0);
    std::vector<std::pair<int, int>> pairs;
    for (int u = 0; u < k; ++u)
        for (int v = u; v < k; ++v) pairs.emplace_back(u, v);
    std::function<void(int)> over_legs = [&](int i) {
        if (i < n) {
            for (int v = 0; v < k; ++v) {
                assign[i] = v;
                over_legs(i + 1);
            }
            return;
        }
        std::vector<int> cap(k, 4);
        for (int j = 0; j < n; ++j)
            if (--cap[assign[j]] < 0) return;
        Diagram base;
        base.k = k;
        base.legs = legs_in;
        for (int j = 0; j < n; ++j) base.legs[j].vertex = assign[j];
        std::vector<int> m(pairs.size(), 0);
        std::function<void(std::size_t)> over_pairs = [&](std::size_t p) {
            if (p == pairs.size()) {
                for (int c : cap)
                    if (c != 0) return;
                Diagram d = base;
                for (std::size_t q = 0; q < pairs.size(); ++q)
                    for (int r = 0; r < m[q]; ++r) d.edges.push_back({pairs[q].first, pairs[q].second, Line::S0});
                if (!d.connected()) return;
                auto key = d.canonical_key();
                if (!found.count(key)) {
                    d.weight = symmetry_weight(d);
                    found.emplace(std::move(key), std::move(d));
                }
                return;
            }
            auto [u, v] = pairs[p];
            const int per = (u == v) ? 2 : 1;
            const int mx = (u == v) ? cap[u] / 2 : std::min(cap[u], cap[v]);
            for (int x = 0; x <= mx; ++x) {
                m[p] = x;
                cap[u] -= per * x;
                if (u != v) cap[v] -= x;
                over_pairs(p + 1);
                cap[u] += per * x;
                if (u != v) cap[v] += x;
            }
            m[p] = 0;
        };
        over_pairs(0);
    };
    over_legs(0);
    std::vector<Diagram> out;
    for (auto& [key, d] : found) out.push_back(std::move(d));
    return out;
}

std::vector<Diagram> enumerate_diagrams(int n, int k) { return enumerate_diagrams(standard_legs(n), k); }

TreeList enumerate_trees(int n) {
    TreeList tl;
    if (n % 2 != 0) {
        tl.diagnostic = "vanishes unless n is even";
        return tl;
    }
    if (n < 2 || n > 12) throw std::invalid_argument("enumerate_trees: need 2 <= n <= 12");
    TreeBuilder b{standard_legs(n), {}};
    b.run();
    tl.trees = std::move(b.result);
    return tl;
}

std::vector<Diagram> enumerate_trees_with_xi(const std::vector<Leg>& legs, int r) {
    std::vector<Leg> all = legs;
    for (int i = 1; i <= r; ++i) all.push_back({LegKind::Xi, i, false, -1});
    if (all.size() % 2 != 0 || all.size() < 2) return {};
    TreeBuilder b{all, {}};
    b.run();
    std::map<std::string, Diagram> merged;
    const Rational w(1, factorial(r));
    for (auto& d : b.result) {
        auto key = d.canonical_key(false);
        auto it = merged.find(key);
        if (it == merged.end()) {
            d.weight = w;
            merged.emplace(std::move(key), std::move(d));
        } else {
            it->second.weight += w;
            it->second.multiplicity++;
        }
    }
    std::vector<Diagram> out;
    for (auto& [key, d] : merged) out.push_back(std::move(d));
    return out;
}

std::vector<Diagram> enumerate_cauchy_trees(int order) {
    if (order < 0 || order > 6) throw std::invalid_argument("enumerate_cauchy_trees: order must be in [0, 6]");
    // canonical strings with orderings count, by internal node count
    std::vector<std::map<std::string, long long>> T(order + 1);
    T[0]["L"] = 1;
    for (int m = 1; m <= order; ++m)
        for (int a = 0; a < m; ++a)
            for (int b = 0; a + b < m; ++b) {
                const int c = m - 1 - a - b;
                for (const auto& [sa, ma] : T[a])
                    for (const auto& [sb, mb] : T[b])
                        for (const auto& [sc, mc] : T[c]) {
                            std::array<std::string, 3> k3{sa, sb, sc};
                            std::sort(k3.begin(), k3.end());
                            // each ordered triple counts once; children contribute their own orderings
                            T[m]["(" + k3[0] + k3[1] + k3[2] + ")"] += ma * mb * mc;
                        }
            }
    long long six = 1;
    for (int i = 0; i < order; ++i) six *= 6;
    std::vector<Diagram> out;
    for (const auto& [s, mult] : T[order]) {
        Diagram d;
        d.legs.push_back({LegKind::Out, 1, false, -1});
        std::size_t p = 0;
        std::function<void(int)> parse = [&](int parent) {
            if (s[p] == 'L') {
                ++p;
                d.legs.push_back({LegKind::In, 0, false, parent});
                return;
            }
            ++p;  // '('
            const int v = d.k++;
            if (parent >= 0)
                d.edges.push_back({v, parent, Line::Retarded});
            else
                d.legs[0].vertex = v;
            for (int i = 0; i < 3; ++i) parse(v);
            ++p;  // ')'
        };
        parse(-1);
        if (order == 0) {
            d.legs[0].vertex = -1;
            d.legs[1].vertex = -1;
        }
        d.multiplicity = static_cast<int>(mult);
        d.weight = Rational(mult, six);
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<Diagram> wick_contract_xi(const Diagram& tree) {
    std::vector<int> xi;
    for (std::size_t i = 0; i < tree.legs.size(); ++i)
        if (tree.legs[i].kind == LegKind::Xi) {
            if (tree.legs[i].vertex < 0) throw std::invalid_argument("wick_contract_xi: Xi leg without vertex");
            xi.push_back(static_cast<int>(i));
        }
    if (xi.size() % 2 != 0) return {};
    Diagram stripped = tree;
    stripped.legs.clear();
    for (const auto& l : tree.legs)
        if (l.kind != LegKind::Xi) stripped.legs.push_back(l);
    stripped.beta_power += static_cast<int>(xi.size()) / 2;
    stripped.multiplicity = 1;

    std::map<std::string, Diagram> merged;
    std::vector<bool> used(xi.size(), false);
    std::vector<std::pair<int, int>> match;
    std::function<void()> rec = [&]() {
        std::size_t i = 0;
        while (i < xi.size() && used[i]) ++i;
        if (i == xi.size()) {
            Diagram d = stripped;
            for (auto [a, b] : match) d.edges.push_back({tree.legs[a].vertex, tree.legs[b].vertex, Line::P0});
            auto key = d.canonical_key();
            auto it = merged.find(key);
            if (it == merged.end()) {
                merged.emplace(std::move(key), std::move(d));
            } else {
                it->second.weight += tree.weight;
                it->second.multiplicity++;
            }
            return;
        }
        used[i] = true;
        for (std::size_t j = i + 1; j < xi.size(); ++j) {
            if (used[j]) continue;
            used[j] = true;
            match.emplace_back(xi[i], xi[j]);
            rec();
            match.pop_back();
            used[j] = false;
        }
        used[i] = false;
    };
    rec();
    std::vector<Diagram> out;
    for (auto& [key, d] : merged) out.push_back(std::move(d));
    return out;
}

Rational qft_weight(const Diagram& target) {
    if (target.n_xi() != 0) throw std::invalid_argument("qft_weight: contract Xi legs first");
    const int n = static_cast<int>(target.legs.size()), k = target.k;
    const std::string want = with_label(target, Line::S0).canonical_key();
    // points: legs 0..n-1, then vertex slots n + 4v + s
    const int P = n + 4 * k;
    std::vector<int> partner(P, -1);
    long long count = 0;
    Diagram d;
    d.k = k;
    d.legs = target.legs;
    // cheap invariant: sorted (leg mask, self-loops, degree to other vertices) per vertex
    auto profile = [&](const Diagram& g) {
        std::vector<std::array<long long, 3>> pr(k, {0, 0, 0});
        for (int i = 0; i < n; ++i)
            if (g.legs[i].vertex >= 0) pr[g.legs[i].vertex][0] |= 1LL << i;
        for (const auto& e : g.edges) {
            if (e.a == e.b) {
                pr[e.a][1]++;
            } else {
                pr[e.a][2]++;
                pr[e.b][2]++;
            }
        }
        std::sort(pr.begin(), pr.end());
        return pr;
    };
    const auto want_profile = profile(target);
    std::function<void()> rec = [&]() {
        int i = 0;
        while (i < P && partner[i] >= 0) ++i;
        if (i == P) {
            d.edges.clear();
            for (int a = 0; a < P; ++a) {
                const int b = partner[a];
                if (a < n) {
                    d.legs[a].vertex = b < n ? -1 : (b - n) / 4;
                } else if (b >= n && a < b) {
                    d.edges.push_back({(a - n) / 4, (b - n) / 4, Line::S0});
                }
            }
            if (profile(d) == want_profile && d.canonical_key() == want) ++count;
            return;
        }
        for (int j = i + 1; j < P; ++j) {
            if (partner[j] >= 0) continue;
            partner[i] = j;
            partner[j] = i;
            rec();
            partner[i] = partner[j] = -1;
        }
    };
    rec();
    long long norm = factorial(k);
    for (int i = 0; i < k; ++i) norm *= 24;
    return Rational(count, norm);
}

int hbar_power(const Diagram& d) { return d.k + d.n_external() / 2; }

WeightReport beta_match(const Diagram& loop) {
    WeightReport w;
    const int l = loop.loops();
    if (l < 1) throw std::invalid_argument("beta_match: diagram has no loop");
    w.hbar_power = hbar_power(loop);
    w.quantum_weight = symmetry_weight(with_label(loop, Line::S0));
    std::vector<Leg> ext;
    for (auto leg : loop.legs) {
        leg.vertex = -1;
        ext.push_back(leg);
    }
    const std::string want = with_label(loop, Line::S0).canonical_key();
    for (const auto& t : enumerate_trees_with_xi(ext, 2 * l)) {
        if (t.k != loop.k) continue;
        for (const auto& c : wick_contract_xi(t))
            if (with_label(c, Line::S0).canonical_key() == want) w.classical_weight += c.weight;
    }
    if (l == 1) {
        w.loop_length = loop_length(loop);
        w.beta_pi = w.classical_weight / Rational(w.loop_length);
        w.beta_pi_symmetry = w.beta_pi / w.quantum_weight;
        w.verified = w.loop_length <= 3;
    }
    if (!w.verified) w.note = "unverified against QFT";
    return w;
}

Diagram tadpole() {
    Diagram d;
    d.k = 1;
    d.legs = {{LegKind::Out, 1, true, 0}, {LegKind::In, 1, false, 0}};
    d.edges = {{0, 0, Line::S0}};
    return d;
}

Diagram simple_loop() {
    Diagram d;
    d.k = 2;
    d.legs = {{LegKind::Out, 1, true, 0}, {LegKind::In, 1, false, 0}, {LegKind::In, 2, false, 1}, {LegKind::In, 3, false, 1}};
    d.edges = {{0, 1, Line::S0}, {0, 1, Line::S0}};
    return d;
}

Diagram triangle() {
    Diagram d;
    d.k = 3;
    d.legs = {{LegKind::Out, 1, true, 0}, {LegKind::In, 1, false, 0}, {LegKind::In, 2, false, 1},
              {LegKind::In, 3, false, 1}, {LegKind::In, 4, false, 2}, {LegKind::In, 5, false, 2}};
    d.edges = {{0, 1, Line::S0}, {1, 2, Line::S0}, {0, 2, Line::S0}};
    return d;
}

}  // namespace phi4::diagrams
