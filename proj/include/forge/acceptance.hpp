#pragma once

#include <functional>

#include "forge/io.hpp"

namespace forge {

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string profile;
    bool pass = false;
    std::string detail;
    double ms = 0;
};

// Runs the acceptance battery. which = "q3" | "q27-cubic" | "gm" | "all"
// selects by profile; every tolerance is pinned in the implementation.
std::vector<CriterionResult> run_acceptance(const std::string& which,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_result(const CriterionResult& r);

} // namespace forge
