#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace phi4::cli {

namespace {

std::string where(const std::string& origin, const std::string& field) { return origin + ": field '" + field + "'"; }

double get_number(const nlohmann::json& j, const std::string& origin, const std::string& field) {
    if (!j.is_number()) throw UsageError(where(origin, field) + ": expected a number");
    return j.get<double>();
}

std::int64_t get_integer(const nlohmann::json& j, const std::string& origin, const std::string& field) {
    if (!j.is_number_integer()) throw UsageError(where(origin, field) + ": expected an integer");
    return j.get<std::int64_t>();
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size() || s[0] == '-') throw UsageError(what + ": not an unsigned integer: '" + s + "'");
    return v;
}

void dump(const nlohmann::json& j, std::string& out) {
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map order: sorted
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(it.key()).dump();
                out += ':';
                dump(it.value(), out);
            }
            out += '}';
            break;
        }
        case nlohmann::json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                dump(j[i], out);
            }
            out += ']';
            break;
        }
        case nlohmann::json::value_t::number_float: {
            const double x = j.get<double>();
            if (!std::isfinite(x)) {
                out += "null";
                break;
            }
            char b[40];
            std::snprintf(b, sizeof b, "%.17g", x);
            out += b;
            break;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw UsageError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
    if (!j.is_object()) throw UsageError(origin + ":1:1: top level must be an object");

    RunConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const auto& v = it.value();
        if (k == "seed") {
            const auto s = get_integer(v, origin, k);
            if (s < 0) throw UsageError(where(origin, k) + ": must be non-negative");
            c.params.seed = static_cast<std::uint64_t>(s);
        } else if (k == "stream") {
            const auto s = get_integer(v, origin, k);
            if (s < 0) throw UsageError(where(origin, k) + ": must be non-negative");
            c.params.stream = static_cast<std::uint64_t>(s);
        } else if (k == "beta") {
            c.params.beta = get_number(v, origin, k);
            if (!(c.params.beta > 0)) throw UsageError(where(origin, k) + ": must be positive");
        } else if (k == "samples") {
            const auto s = get_integer(v, origin, k);
            if (s < 2 || s > (1 << 24)) throw UsageError(where(origin, k) + ": out of range");
            c.params.samples = static_cast<int>(s);
        } else if (k == "dt") {
            c.params.dt = get_number(v, origin, k);
            if (!(c.params.dt > 0)) throw UsageError(where(origin, k) + ": must be positive");
        } else if (k == "lambda") {
            c.lambda = get_number(v, origin, k);
        } else if (k == "threads") {
            const auto t = get_integer(v, origin, k);
            if (t < 0) throw UsageError(where(origin, k) + ": must be non-negative");
            c.threads = static_cast<int>(t);
        } else if (k == "out") {
            if (!v.is_string()) throw UsageError(where(origin, k) + ": expected a string");
            c.out = v.get<std::string>();
        } else if (k == "tolerances") {
            if (!v.is_object()) throw UsageError(where(origin, k) + ": expected an object");
            for (auto t = v.begin(); t != v.end(); ++t) {
                const std::string f = "tolerances." + t.key();
                if (t.key() != "measurement") throw UsageError(where(origin, f) + ": unknown tolerance");
                const double x = get_number(t.value(), origin, f);
                if (!(x > 0)) throw UsageError(where(origin, f) + ": must be positive");
                c.tolerances[t.key()] = x;
            }
        } else {
            throw UsageError(where(origin, k) + ": unknown field");
        }
    }
    return c;
}

RunConfig resolve(const Overrides& flags) {
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    RunConfig c;
    const auto path = flags.config ? flags.config : env("PHI4_CONFIG");
    if (path) {
        std::ifstream in(*path);
        if (!in) throw UsageError(*path + ": cannot open config file");
        std::stringstream ss;
        ss << in.rdbuf();
        c = parse_config(ss.str(), *path);
    }
    if (auto v = env("PHI4_SEED")) c.params.seed = parse_u64(*v, "PHI4_SEED");
    if (auto v = env("PHI4_THREADS")) c.threads = static_cast<int>(parse_u64(*v, "PHI4_THREADS"));
    if (auto v = env("PHI4_OUT")) c.out = *v;
    if (flags.seed) c.params.seed = *flags.seed;
    if (flags.threads) c.threads = *flags.threads;
    if (flags.out) c.out = *flags.out;
    return c;
}

std::string canonical_dump(const nlohmann::json& j) {
    std::string s;
    dump(j, s);
    return s;
}

}  // namespace phi4::cli
