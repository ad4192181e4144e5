#ifndef EMBEDEV_ACCEPTANCE_HPP
#define EMBEDEV_ACCEPTANCE_HPP

#include <ostream>
#include <string>
#include <vector>

namespace embedev {

// One verification criterion of the batch suite (run via the CLI `verify`
// subcommand or the acceptance test binary).
struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    std::string detail;
};

struct AcceptanceOptions {
    int only_criterion = 0;  // 0 = all
    // Depth cap for the transition-sweep extension ladder.
    std::int64_t sweep_n_cap = 2'500'000'000LL;
};

// Runs the suite, printing one pass/fail line per criterion to `log`.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream& log);

}  // namespace embedev

#endif  // EMBEDEV_ACCEPTANCE_HPP
