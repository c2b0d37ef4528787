#include <sstream>

#include "json.hpp"
#include "phi4/diagrams.hpp"

namespace phi4::diagrams {

std::string render_ascii(const Diagram& d) {
    std::ostringstream os;
    os << "k=" << d.k << " N=" << d.lines() << " l=" << d.loops() << " weight=" << d.weight.numerator();
    if (d.weight.denominator() != 1) os << "/" << d.weight.denominator();
    if (d.beta_power) os << " beta^-" << d.beta_power;
    os << "\n";
    for (int v = 0; v < d.k; ++v) {
        os << "  v" << v << ":";
        for (const auto& l : d.legs)
            if (l.vertex == v) os << " " << l.tag();
        for (const auto& e : d.edges) {
            if (e.a == v && e.b == v)
                os << " (" << to_string(e.label) << " loop)";
            else if (e.a == v)
                os << " --" << to_string(e.label) << "-- v" << e.b;
        }
        os << "\n";
    }
    std::string direct;
    for (const auto& l : d.legs)
        if (l.vertex < 0) direct += (direct.empty() ? "" : " ---- ") + l.tag();
    if (!direct.empty()) os << "  " << direct << "\n";
    return os.str();
}

std::string to_json(const Diagram& d) {
    nlohmann::ordered_json j;
    j["vertices"] = d.k;
    auto& edges = j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : d.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"label", to_string(e.label)}});
    auto& ext = j["external"] = nlohmann::ordered_json::array();
    for (const auto& l : d.legs) ext.push_back({{"tag", l.tag()}, {"dotted", l.dotted}, {"vertex", l.vertex}});
    j["weight"] = {{"num", d.weight.numerator()}, {"den", d.weight.denominator()}};
    j["beta_power"] = d.beta_power;
    j["multiplicity"] = d.multiplicity;
    return j.dump();
}

}  // namespace phi4::diagrams
