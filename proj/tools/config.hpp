#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "phi4/acceptance.hpp"

namespace phi4::cli {

// bad flags or config; exit status 2
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    acceptance::Params params;           // seed, stream, beta, samples, dt
    double lambda = 1.0;
    std::map<std::string, double> tolerances;  // "measurement"
    std::string out = "out";
    int threads = 0;  // 0: runtime default
};

// command-line values; unset fields fall through to env, then file
struct Overrides {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
};

// file keys: seed, stream, beta, samples, dt, lambda, threads, out, tolerances{...}
RunConfig parse_config(const std::string& text, const std::string& origin);
// flags > PHI4_SEED / PHI4_THREADS / PHI4_OUT / PHI4_CONFIG > file
RunConfig resolve(const Overrides& flags);

// sorted keys, 17 significant digits, no whitespace variance
std::string canonical_dump(const nlohmann::json& j);

}  // namespace phi4::cli
