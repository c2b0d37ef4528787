#include <cstdio>
#include <exception>

#include "phi4/acceptance.hpp"

int main(int argc, char** argv) {
    using namespace phi4::acceptance;
    std::vector<std::string> only(argv + 1, argv + argc);
    int failed = 0;
    for (const auto& name : names()) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
        Result r;
        try {
            r = run(name);
        } catch (const std::exception& e) {
            r.name = name;
            r.observed = "error";
            r.expected = r.tolerance = "-";
            std::fprintf(stderr, "%s: %s\n", name.c_str(), e.what());
        }
        std::printf("%s\n", r.line().c_str());
        std::fflush(stdout);
        failed += !r.pass;
    }
    return failed ? 1 : 0;
}
