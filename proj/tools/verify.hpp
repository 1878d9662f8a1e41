#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace banditcv::cli {

struct VerifyOptions {
    bool quick = false;           // reduced Monte Carlo budget, looser tolerances
    bool fault_beta_dof = false;  // negative-control hook: in-sample beta fit
    uint64_t seed = 20230917;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Hybrid-reward property checks (variance/unbiasedness laws, approximate-CV
// laws, F_e limit, estimator collapse) plus numeric invariant spot checks.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace banditcv::cli
