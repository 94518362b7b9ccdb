#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace clab::verify {

struct CriterionResult {
    std::string name;
    bool hard = true;   // soft criteria are reported but never fail a suite
    bool pass = false;
    double seconds = 0.0;
    nlohmann::ordered_json details;
};

// theorem1, lemma_c2, smoothing, props, all
const std::vector<std::string>& suite_names();

// Runs every criterion of the suite with tolerances pinned in code.
std::vector<CriterionResult> run_suite(const std::string& suite, uint64_t seed);

// True when every hard criterion passed.
bool hard_pass(const std::vector<CriterionResult>& results);

}  // namespace clab::verify
