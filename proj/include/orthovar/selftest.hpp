#pragma once

#include "orthovar/report.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace orthovar {

struct CriterionMetric {
    std::string name;
    double value = 0;
    std::string relation;  // "<", "<=", ">", ">=", "==" or "in" (|value - target| <= threshold)
    double threshold = 0;
    bool pass = false;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<CriterionMetric> metrics;
    double seconds = 0;
    double time_limit = 0;
    std::string error;  // set when the check threw

    bool metrics_pass() const;
    bool pass() const { return metrics_pass() && seconds <= time_limit; }
};

struct SelftestOptions {
    std::uint64_t seed = 7;
    std::vector<int> only;  // empty: criteria 1..11
};

struct SelftestReport {
    std::vector<CriterionResult> criteria;
    std::map<std::string, CsvTable> tables;  // file name -> table, all deterministic
    std::uint64_t config_hash = 0;

    bool pass() const;
    CsvTable summary() const;
    /// Writes summary.csv and the detail tables into dir.
    void write(const std::string& dir) const;
};

/// Runs the numbered acceptance checks 1..11 in process. Criterion 12
/// (determinism of the CLI) needs two processes and lives with the callers.
SelftestReport run_selftest(const SelftestOptions& opt = {});

/// "PASS"/"FAIL" line for a criterion, with metrics and runtime.
std::string format_criterion(const CriterionResult& c);

}  // namespace orthovar
