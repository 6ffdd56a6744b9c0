#include "oqrw/trajectory.hpp"

#include <algorithm>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

namespace oqrw {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix64(splitmix64(seed) ^ stream)) {}

double StreamRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

namespace {

struct Walker {
    std::size_t site;
    CMatrix state;
};

// Draws index k with probability weights[k] / sum, skipping zero weights;
// the last positive weight absorbs rounding.
std::size_t invert(const std::vector<double>& weights, double u) {
    double acc = 0.0;
    std::size_t last = weights.size();
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0) continue;
        acc += weights[k];
        last = k;
        if (u < acc) return k;
    }
    return last;
}

Walker initial(const WalkModel& walk, const BlockState& rho0, StreamRng& rng) {
    if (!rho0.matches(walk)) throw DimensionError("sampling: initial state does not match the walk");
    const auto p = site_probabilities(rho0);
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(total - 1.0) > kProbabilitySumTol)
        throw PreconditionError("sampling: initial state does not have trace one");
    const std::size_t i = invert(p, rng.uniform());
    CMatrix s = hermitian_part(rho0[i]) / p[i];
    return {i, std::move(s)};
}

void step(const WalkModel& walk, Walker& w, StreamRng& rng) {
    const auto& out = walk.outgoing(w.site);
    std::vector<CMatrix> images;
    std::vector<double> prob;
    images.reserve(out.size());
    for (std::size_t e : out) {
        CMatrix phi = CMatrix::Zero(walk.dim(walk.edge_target(e)), walk.dim(walk.edge_target(e)));
        for (const auto& l : walk.edges()[e].kraus) phi.noalias() += l * w.state * l.adjoint();
        prob.push_back(std::max(phi.trace().real(), 0.0));
        images.push_back(std::move(phi));
    }
    const double total = std::accumulate(prob.begin(), prob.end(), 0.0);
    if (std::abs(total - 1.0) > kProbabilitySumTol)
        throw PreconditionError("sampling: transition probabilities from site '" + walk.site_id(w.site) +
                                "' sum to " + std::to_string(total) + "; walk is not stochastic");
    const std::size_t k = invert(prob, rng.uniform());
    w.site = walk.edge_target(out[k]);
    w.state = hermitian_part(images[k]) / prob[k];
}

Endpoint run_to_end(const WalkModel& walk, const BlockState& rho0, int n, std::uint64_t seed, std::uint64_t stream) {
    StreamRng rng(seed, stream);
    Walker w = initial(walk, rho0, rng);
    for (int k = 0; k < n; ++k) step(walk, w, rng);
    return {w.site, std::move(w.state)};
}

void check_counts(int n, int trials) {
    if (n < 0) throw PreconditionError("sampling: negative step count");
    if (trials < 1) throw PreconditionError("sampling: need at least one trajectory");
}

}  // namespace

TrajectorySample sample_trajectory(const WalkModel& walk, const BlockState& rho0, int n, std::uint64_t seed,
                                   bool record_states, std::uint64_t stream) {
    check_counts(n, 1);
    StreamRng rng(seed, stream);
    TrajectorySample out;
    out.seed = seed;
    Walker w = initial(walk, rho0, rng);
    out.sites.reserve(static_cast<std::size_t>(n) + 1);
    out.sites.push_back(w.site);
    if (record_states) out.states.push_back(w.state);
    for (int k = 0; k < n; ++k) {
        step(walk, w, rng);
        out.sites.push_back(w.site);
        if (record_states) out.states.push_back(w.state);
    }
    return out;
}

std::vector<Endpoint> sample_endpoints(const WalkModel& walk, const BlockState& rho0, int n, int trials,
                                       std::uint64_t seed) {
    check_counts(n, trials);
    std::vector<Endpoint> out(static_cast<std::size_t>(trials));
    // Exceptions must not escape the parallel region; keep the first one.
    std::exception_ptr error;
#pragma omp parallel for schedule(static)
    for (int k = 0; k < trials; ++k) {
        try {
            out[k] = run_to_end(walk, rho0, n, seed, static_cast<std::uint64_t>(k));
        } catch (...) {
#pragma omp critical(oqrw_sampling_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

std::vector<Endpoint> sample_endpoints_serial(const WalkModel& walk, const BlockState& rho0, int n, int trials,
                                              std::uint64_t seed) {
    check_counts(n, trials);
    std::vector<Endpoint> out;
    out.reserve(static_cast<std::size_t>(trials));
    for (int k = 0; k < trials; ++k) out.push_back(run_to_end(walk, rho0, n, seed, static_cast<std::uint64_t>(k)));
    return out;
}

BlockState ensemble_average(const WalkModel& walk, const std::vector<Endpoint>& endpoints) {
    if (endpoints.empty()) throw PreconditionError("ensemble_average: no endpoints");
    std::vector<std::size_t> order(walk.site_count());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return walk.site_id(a) < walk.site_id(b); });
    auto out = BlockState::zeros(walk);
    for (std::size_t i : order)
        for (const auto& e : endpoints)
            if (e.site == i) out[i] += e.state;
    out *= Complex(1.0 / static_cast<double>(endpoints.size()));
    return out;
}

std::vector<double> empirical_law(const WalkModel& walk, const std::vector<Endpoint>& endpoints) {
    std::vector<double> law(walk.site_count(), 0.0);
    for (const auto& e : endpoints) law[e.site] += 1.0;
    for (auto& p : law) p /= static_cast<double>(endpoints.size());
    return law;
}

OccupationStats occupation_stats(const WalkModel& walk, const TrajectorySample& sample) {
    if (sample.sites.empty()) throw PreconditionError("occupation_stats: empty sample");
    if (sample.states.size() != sample.sites.size())
        throw PreconditionError("occupation_stats: sample was taken without recording states");
    const std::size_t n = walk.site_count();
    OccupationStats s;
    s.counts.assign(n, 0);
    s.km_average = BlockState::zeros(walk);
    for (std::size_t k = 0; k < sample.sites.size(); ++k) {
        const std::size_t i = sample.sites[k];
        ++s.counts[i];
        s.km_average[i] += sample.states[k];
    }
    const double steps = static_cast<double>(sample.sites.size());
    for (std::size_t i = 0; i < n; ++i) {
        s.freq.push_back(static_cast<double>(s.counts[i]) / steps);
        s.conditional_avg.push_back(s.counts[i] > 0 ? CMatrix(s.km_average[i] / static_cast<double>(s.counts[i]))
                                                    : CMatrix::Zero(walk.dim(i), walk.dim(i)));
    }
    s.km_average *= Complex(1.0 / steps);
    return s;
}

double km_residual(const WalkModel& walk, const OccupationStats& stats) {
    return (apply(walk, stats.km_average) - stats.km_average).trace_norm();
}

ComparisonReport law_comparison(const WalkModel& walk, const BlockState& rho0, int n, int trials,
                                std::uint64_t seed) {
    check_counts(n, trials);
    ComparisonReport r;
    BlockState rho = rho0;
    for (int k = 0; k < n; ++k) rho = apply(walk, rho);
    r.exact = site_probabilities(rho);
    const auto endpoints = sample_endpoints(walk, rho0, n, trials, seed);
    r.empirical = empirical_law(walk, endpoints);

    const double total = static_cast<double>(trials);
    std::vector<double> expected, observed;
    double pool_e = 0.0, pool_o = 0.0;
    for (std::size_t i = 0; i < r.exact.size(); ++i) {
        const double e = std::max(r.exact[i], 0.0) * total;
        const double o = r.empirical[i] * total;
        if (r.exact[i] <= 1e-15 && o > 0) r.impossible_event = true;
        if (e >= 5.0) {
            expected.push_back(e);
            observed.push_back(o);
        } else {
            pool_e += e;
            pool_o += o;
        }
    }
    if (pool_e >= 5.0 || expected.empty()) {
        expected.push_back(pool_e);
        observed.push_back(pool_o);
    } else if (pool_e > 0.0 || pool_o > 0.0) {
        const auto big = static_cast<std::size_t>(std::max_element(expected.begin(), expected.end()) - expected.begin());
        expected[big] += pool_e;
        observed[big] += pool_o;
    }
    for (std::size_t c = 0; c < expected.size(); ++c)
        if (expected[c] > 0) r.chi_square += (observed[c] - expected[c]) * (observed[c] - expected[c]) / expected[c];
    r.dof = static_cast<int>(expected.size()) - 1;
    if (r.dof > 0) {
        boost::math::chi_squared_distribution<double> dist(r.dof);
        r.p_value = boost::math::cdf(boost::math::complement(dist, r.chi_square));
    }
    r.pass = !r.impossible_event && r.p_value >= kLawSignificance;
    return r;
}

}  // namespace oqrw
