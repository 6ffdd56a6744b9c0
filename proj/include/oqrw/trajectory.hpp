#pragma once

// Monte Carlo sampling of the measured process (X_n, rho_n): position is
// measured after each step, Kraus operators of one edge are aggregated.

#include <cstdint>
#include <random>
#include <vector>

#include "oqrw/walk_model.hpp"

namespace oqrw {

/// mt19937_64 seeded from (seed, stream) through splitmix64, so every
/// trajectory index gets its own reproducible stream.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct TrajectorySample {
    std::uint64_t seed = 0;
    std::vector<std::size_t> sites;  // X_0 ... X_n (site indices)
    std::vector<CMatrix> states;     // rho_0 ... rho_n when recorded, each on h_{X_k}
};

/// Probability sums further than this from 1 mean the walk is not stochastic.
inline constexpr double kProbabilitySumTol = 1e-9;

/// Trajectory `stream` of the family generated by `seed` (stream k matches
/// trajectory k of sample_endpoints).
TrajectorySample sample_trajectory(const WalkModel& walk, const BlockState& rho0, int n, std::uint64_t seed,
                                   bool record_states = true, std::uint64_t stream = 0);

struct Endpoint {
    std::size_t site = 0;
    CMatrix state;
};

/// (X_n, rho_n) of `trials` independent trajectories; trajectory k uses stream k.
/// OpenMP-parallel over trajectories, with output identical to the serial version.
std::vector<Endpoint> sample_endpoints(const WalkModel& walk, const BlockState& rho0, int n, int trials,
                                       std::uint64_t seed);
std::vector<Endpoint> sample_endpoints_serial(const WalkModel& walk, const BlockState& rho0, int n, int trials,
                                              std::uint64_t seed);

/// Mean of rho_n (x) |X_n><X_n|. Summation runs site by site in label order,
/// then in trajectory order, so the result does not depend on threading.
BlockState ensemble_average(const WalkModel& walk, const std::vector<Endpoint>& endpoints);

/// Empirical law of X_n, ordered by site index.
std::vector<double> empirical_law(const WalkModel& walk, const std::vector<Endpoint>& endpoints);

struct OccupationStats {
    std::vector<long> counts;              // N_n(i), steps 0..n inclusive
    std::vector<double> freq;              // counts / (n + 1)
    std::vector<CMatrix> conditional_avg;  // mean of rho_k over visits to i (zero if never visited)
    BlockState km_average;                 // mean of rho_k (x) |X_k><X_k|
};

OccupationStats occupation_stats(const WalkModel& walk, const TrajectorySample& sample);

/// ||M(km) - km||_1 for the running average km.
double km_residual(const WalkModel& walk, const OccupationStats& stats);

struct ComparisonReport {
    std::vector<double> exact;      // Tr M^n(rho)(i)
    std::vector<double> empirical;  // frequency of X_n = i
    double chi_square = 0.0;
    int dof = 0;
    double p_value = 1.0;
    bool impossible_event = false;  // X_n landed where the exact law is zero
    bool pass = false;              // p_value >= significance and no impossible event
};

inline constexpr double kLawSignificance = 1e-3;

/// Chi-square test of the empirical law of X_n against the law of Q_n. Cells
/// with expected count below 5 are pooled; a pool still below 5 joins the
/// largest cell.
ComparisonReport law_comparison(const WalkModel& walk, const BlockState& rho0, int n, int trials,
                                std::uint64_t seed);

}  // namespace oqrw
