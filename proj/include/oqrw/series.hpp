#pragma once

// CSV time series for plotting:
//   site_probs.csv      step,site,probability
//   blocks.csv          step,site,row,col,re,im
//   trajectory.csv      step,site              (sample mode, trajectory 0)
//   conditional_avg.csv site,row,col,re,im     (sample mode, trajectory 0)
// Numbers are printed with 17 significant digits.

#include <cstdint>
#include <filesystem>

#include "oqrw/walk_model.hpp"

namespace oqrw {

enum class SeriesMode { direct, cesaro, sample };

struct SeriesOptions {
    SeriesMode mode = SeriesMode::direct;
    int steps = 0;
    int trajectories = 1;  // sample mode
    std::uint64_t seed = 0;
};

/// direct: M^k(rho). cesaro: running mean of M^0(rho) ... M^k(rho).
/// sample: empirical law of X_k and mean of rho_k (x) |X_k><X_k| over the trajectories.
/// Throws Error when `dir` cannot be created or written.
void emit_series(const WalkModel& walk, const BlockState& rho0, const SeriesOptions& opts,
                 const std::filesystem::path& dir);

}  // namespace oqrw
