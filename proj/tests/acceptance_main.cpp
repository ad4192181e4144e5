#include <cstring>
#include <iostream>

#include "embedev/acceptance.hpp"

int main(int argc, char** argv) {
    embedev::AcceptanceOptions opt;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            opt.only_criterion = std::atoi(argv[++i]);
        }
    }
    auto results = embedev::run_acceptance(opt, std::cout);
    int failures = 0;
    for (const auto& r : results) {
        if (!r.pass) ++failures;
    }
    return failures;
}
