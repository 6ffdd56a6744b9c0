#include "oqrw/series.hpp"

#include <cstdio>
#include <fstream>

#include "oqrw/trajectory.hpp"

namespace oqrw {

namespace {

constexpr int kChunk = 256;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const char* header) : path_(path), out_(path) {
        if (!out_) throw Error("cannot write " + path.string());
        out_ << header << '\n';
    }
    std::ofstream& stream() { return out_; }
    void close() {
        out_.close();
        if (!out_) throw Error("failed writing " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

void write_step(const WalkModel& walk, int step, const std::vector<double>& probs, const BlockState& rho,
                CsvFile& probs_csv, CsvFile& blocks_csv) {
    for (std::size_t i = 0; i < walk.site_count(); ++i) {
        probs_csv.stream() << step << ',' << walk.site_id(i) << ',' << num(probs[i]) << '\n';
        const CMatrix& b = rho[i];
        for (Eigen::Index r = 0; r < b.rows(); ++r)
            for (Eigen::Index c = 0; c < b.cols(); ++c)
                blocks_csv.stream() << step << ',' << walk.site_id(i) << ',' << r << ',' << c << ','
                                    << num(b(r, c).real()) << ',' << num(b(r, c).imag()) << '\n';
    }
}

// Per-step sums over one chunk of trajectories.
struct ChunkSums {
    std::vector<std::vector<double>> counts;  // [step][site]
    std::vector<BlockState> states;           // [step]
};

}  // namespace

void emit_series(const WalkModel& walk, const BlockState& rho0, const SeriesOptions& opts,
                 const std::filesystem::path& dir) {
    if (opts.steps < 0) throw PreconditionError("emit_series: negative step count");
    if (!rho0.matches(walk)) throw DimensionError("emit_series: initial state does not match the walk");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw Error("cannot create output directory " + dir.string());

    CsvFile probs(dir / "site_probs.csv", "step,site,probability");
    CsvFile blocks(dir / "blocks.csv", "step,site,row,col,re,im");

    if (opts.mode != SeriesMode::sample) {
        BlockState current = rho0, sum = rho0;
        for (int k = 0; k <= opts.steps; ++k) {
            if (k > 0) {
                current = apply(walk, current);
                sum += current;
            }
            BlockState shown = opts.mode == SeriesMode::direct ? current : sum * Complex(1.0 / (k + 1));
            write_step(walk, k, site_probabilities(shown), shown, probs, blocks);
        }
        probs.close();
        blocks.close();
        return;
    }

    if (opts.trajectories < 1) throw PreconditionError("emit_series: need at least one trajectory");
    const int n = opts.steps, trials = opts.trajectories;
    const int chunks = (trials + kChunk - 1) / kChunk;
    std::vector<ChunkSums> sums(static_cast<std::size_t>(chunks));
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < chunks; ++c) {
        try {
            ChunkSums s;
            s.counts.assign(n + 1, std::vector<double>(walk.site_count(), 0.0));
            s.states.assign(n + 1, BlockState::zeros(walk));
            for (int t = c * kChunk; t < std::min(trials, (c + 1) * kChunk); ++t) {
                const auto traj = sample_trajectory(walk, rho0, n, opts.seed, true, static_cast<std::uint64_t>(t));
                for (int k = 0; k <= n; ++k) {
                    s.counts[k][traj.sites[k]] += 1.0;
                    s.states[k][traj.sites[k]] += traj.states[k];
                }
            }
            sums[c] = std::move(s);
        } catch (...) {
#pragma omp critical(oqrw_series_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    for (int k = 0; k <= n; ++k) {
        std::vector<double> law(walk.site_count(), 0.0);
        auto mean = BlockState::zeros(walk);
        for (const auto& s : sums) {
            for (std::size_t i = 0; i < law.size(); ++i) law[i] += s.counts[k][i];
            mean += s.states[k];
        }
        for (auto& p : law) p /= trials;
        mean *= Complex(1.0 / trials);
        write_step(walk, k, law, mean, probs, blocks);
    }
    probs.close();
    blocks.close();

    const auto first = sample_trajectory(walk, rho0, n, opts.seed, true, 0);
    CsvFile traj(dir / "trajectory.csv", "step,site");
    for (std::size_t k = 0; k < first.sites.size(); ++k)
        traj.stream() << k << ',' << walk.site_id(first.sites[k]) << '\n';
    traj.close();

    const auto stats = occupation_stats(walk, first);
    CsvFile cond(dir / "conditional_avg.csv", "site,row,col,re,im");
    for (std::size_t i = 0; i < walk.site_count(); ++i) {
        const CMatrix& b = stats.conditional_avg[i];
        for (Eigen::Index r = 0; r < b.rows(); ++r)
            for (Eigen::Index c = 0; c < b.cols(); ++c)
                cond.stream() << walk.site_id(i) << ',' << r << ',' << c << ',' << num(b(r, c).real()) << ','
                              << num(b(r, c).imag()) << '\n';
    }
    cond.close();
}

}  // namespace oqrw
