#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oqrw/walk_model.hpp"

namespace oqrw {

struct AnalysisOptions {
    double tol = kStochasticTol;
    std::uint64_t seed = 0x5eed;
};

struct LoopSample {
    std::size_t site = 0;
    int basis_index = 0;  // x = e_{basis_index + 1}
    int gcd = 0;
};

struct AnalysisReport {
    std::string name;
    bool stochastic_ok = false;
    double stochastic_deviation = 0.0;
    std::size_t worst_site = 0;

    // Filled only for stochastic walks.
    bool irreducible = false;
    std::optional<int> period;
    std::vector<Complex> peripheral;
    int fixed_space_dim = 0;
    std::vector<BlockState> invariant_states;

    int transient_dim = 0;
    std::vector<int> singleton_dims;
    std::vector<std::vector<int>> family_dims;
    std::vector<bool> family_has_isometry;

    std::vector<LoopSample> loop_gcd;
    int path_length = 0;
    Eigen::MatrixXd path_counts;  // (i, j): number of vertex paths of path_length from i to j
    bool path_count_condition = false;  // every count >= dim of the target site
};

/// Validates, then (if stochastic) runs the spectral and structural analyses.
AnalysisReport analyze(const WalkModel& walk, const AnalysisOptions& opts = {});

std::string report_json(const WalkModel& walk, const AnalysisReport& report);
std::string report_text(const WalkModel& walk, const AnalysisReport& report);

/// Number of vertex paths of length n between every pair of sites.
Eigen::MatrixXd path_counts(const WalkModel& walk, int n);

}  // namespace oqrw
