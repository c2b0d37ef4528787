#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>
#include <vector>

namespace phi4::diagrams {

using Rational = boost::rational<long long>;

enum class LegKind { Out, In, Xi };
enum class Line { S0, P0, Retarded, Feynman };

std::string to_string(Line l);
std::string to_string(LegKind k);

struct Leg {
    LegKind kind = LegKind::In;
    int index = 0;   // 0 marks an unlabeled leg
    bool dotted = false;
    int vertex = -1;   // -1: joined directly to the partner leg (free line, no vertices)
    std::string tag() const;
};

struct Edge {
    int a = 0, b = 0;  // internal vertices; a == b is a self-loop
    Line label = Line::S0;
};

struct Diagram {
    int k = 0;  // quartic vertices
    std::vector<Leg> legs;
    std::vector<Edge> edges;
    Rational weight{1};
    int multiplicity = 1;
    int beta_power = 0;  // factors 1/beta

    int n_external() const;  // In and Out legs
    int n_xi() const;
    int lines() const;       // internal edges plus lines ending on legs
    int loops() const;       // cyclomatic number of the graph with legs as endpoints
    bool connected() const;
    std::vector<int> degrees() const;
    // vertex-permutation invariant serialization; with xi_labeled=false all Xi legs look alike
    std::string canonical_key(bool xi_labeled = true) const;
};

// all connected diagrams with legs Out(1) (dotted) and In(1..n-1) at k vertices, S0 lines,
// weight = compensated Wick weight from the automorphism count
std::vector<Diagram> enumerate_diagrams(int n, int k);
// same, for an explicit leg list (vertex fields ignored)
std::vector<Diagram> enumerate_diagrams(const std::vector<Leg>& legs, int k);

struct TreeList {
    std::vector<Diagram> trees;
    std::string diagnostic;
};
// connected trees, k = n/2 - 1, classical weight 1 per labeled topology
TreeList enumerate_trees(int n);
// trees with the given in/out legs plus r indistinguishable Xi legs; weight = labeled count / r!
std::vector<Diagram> enumerate_trees_with_xi(const std::vector<Leg>& legs, int r);

// rooted trees of the retarded Cauchy expansion: one Out root, 2n+1 unlabeled In leaves, Retarded edges;
// multiplicity = ordered child assignments, weight = multiplicity / 6^n
std::vector<Diagram> enumerate_cauchy_trees(int order);

// every perfect matching of the Xi legs becomes a P0 edge; identical results are merged
std::vector<Diagram> wick_contract_xi(const Diagram& tree);

Rational symmetry_weight(const Diagram& d);  // 1 / |Aut|
// exhaustive count of leg matchings realizing the topology, over k! (4!)^k
Rational qft_weight(const Diagram& d);

struct WeightReport {
    Rational classical_weight{0};  // sum over P0 placements
    Rational quantum_weight{0};    // Wick weight
    Rational beta_pi{0};           // required beta = beta_pi / pi, quantum weight 1 per labeled topology
    Rational beta_pi_symmetry{0};  // same, quantum weight = Wick weight
    int hbar_power = 0;
    int loop_length = 0;
    bool verified = false;
    std::string note;
};
WeightReport beta_match(const Diagram& loop_diagram);

int hbar_power(const Diagram& d);

// standard one-loop shapes; edges S0
Diagram tadpole();
Diagram simple_loop();
Diagram triangle();

std::string render_ascii(const Diagram& d);
std::string to_json(const Diagram& d);

}  // namespace phi4::diagrams
