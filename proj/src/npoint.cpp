#include <functional>

#include "phi4/diagrams.hpp"
#include "phi4/measurement.hpp"

namespace phi4 {

NpointResult npoint_amplitude(const LatticeSpec& lat, const std::vector<ExternalLeg>& legs, double lambda, Exec ex) {
    NpointResult res;
    const int n = static_cast<int>(legs.size());
    if (n % 2 != 0) {
        res.diagnostic = "G_lambda vanishes unless n is even";
        return res;
    }
    if (n < 4) throw ConfigError("npoint_amplitude: need at least four external legs");
    for (const auto& l : legs)
        if (!l.field || l.field->nt != lat.nt() || l.field->np != lat.points())
            throw ConfigError("npoint_amplitude: external field missing or of wrong shape");

    const auto trees = diagrams::enumerate_trees(n).trees;
    res.trees = static_cast<int>(trees.size());
    res.vertices = n / 2 - 1;
    const std::size_t nt = lat.nt(), np = lat.points();

    // lambda chi times the product of the given fields
    auto vertex_product = [&](const std::vector<const SpacetimeField*>& fs) {
        SpacetimeField out = SpacetimeField::zeros(lat);
        for (std::size_t j = 0; j < nt; ++j) {
            if (!lat.in_window(j)) continue;
            double* o = out.slice(j);
            for (std::size_t i = 0; i < np; ++i) {
                double p = lambda;
                for (const auto* f : fs) p *= f->slice(j)[i];
                o[i] = p;
            }
        }
        return out;
    };

    double total = 0.0;
    for (const auto& t : trees) {
        std::vector<std::vector<int>> adj(t.k);
        for (const auto& e : t.edges) {
            adj[e.a].push_back(e.b);
            adj[e.b].push_back(e.a);
        }
        // field carried by the line from v towards parent: S0 applied to the vertex product, S0 = -causal
        std::function<SpacetimeField(int, int)> line = [&](int v, int parent) {
            std::vector<SpacetimeField> kids;
            for (int c : adj[v])
                if (c != parent) kids.push_back(line(c, v));
            std::vector<const SpacetimeField*> fs;
            for (std::size_t i = 0; i < t.legs.size(); ++i)
                if (t.legs[i].vertex == v) fs.push_back(legs[i].field);
            for (const auto& k : kids) fs.push_back(&k);
            auto g = apply_green(lat, PropagatorKind::Causal, vertex_product(fs), ex);
            for (auto& x : g.phi.v) x = -x;
            return g.phi;
        };
        const int root = t.legs[0].vertex;
        std::vector<SpacetimeField> kids;
        for (int c : adj[root]) kids.push_back(line(c, root));
        std::vector<const SpacetimeField*> fs;
        for (std::size_t i = 1; i < t.legs.size(); ++i)
            if (t.legs[i].vertex == root) fs.push_back(legs[i].field);
        for (const auto& k : kids) fs.push_back(&k);
        total += spacetime_dot(lat, *legs[0].field, vertex_product(fs));
    }
    res.value = total;
    return res;
}

}  // namespace phi4
