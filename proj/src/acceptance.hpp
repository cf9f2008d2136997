#pragma once

#include <string>
#include <vector>

namespace hyst {

struct CriterionResult {
    std::string name;
    std::string statistic_label;
    double statistic = 0.0;
    double bound = 0.0;
    bool pass = false;
    std::string detail;
};

// Runs one named validation suite, or every suite for "all". Each result line
// carries the decisive statistic and its bound.
std::vector<CriterionResult> run_acceptance(const std::string& suite);
std::vector<std::string> acceptance_suites();

int cmd_verify(const std::string& suite, const std::string& out_dir);

} // namespace hyst
