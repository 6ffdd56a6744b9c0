// oqrw: validate, analyze and simulate open quantum random walks.
//
// Exit codes: 0 ok, 1 walk fails validation, 2 unreadable/unparsable input or
// bad arguments, 3 internal diagnostic failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oqrw/analysis.hpp"
#include "oqrw/config.hpp"
#include "oqrw/registry.hpp"
#include "oqrw/series.hpp"

namespace {

enum Exit { kOk = 0, kInvalid = 1, kInput = 2, kDiagnostic = 3 };

struct InputError : oqrw::Error {
    using oqrw::Error::Error;
};

oqrw::WalkModel load(const std::string& source) {
    constexpr std::string_view prefix = "builtin:";
    if (source.rfind(prefix, 0) == 0) {
        try {
            return oqrw::builtin(source.substr(prefix.size()));
        } catch (const oqrw::PreconditionError& e) {
            throw InputError(e.what());
        }
    }
    std::ifstream in(source);
    if (!in) throw InputError("cannot read '" + source + "'");
    std::stringstream text;
    text << in.rdbuf();
    try {
        return oqrw::parse_config(text.str());
    } catch (const oqrw::ParseError& e) {
        throw InputError(source + ": " + e.what());
    }
}

bool check_stochastic(const oqrw::WalkModel& walk, double tol) {
    const auto v = oqrw::validate(walk, tol);
    if (v.ok) return true;
    std::fprintf(stderr, "walk '%s' is not stochastic: ||sum L*L - Id|| = %.3e at site %s (tol %.1e)\n",
                 walk.name().c_str(), v.worst_deviation, walk.site_id(v.worst_site).c_str(), tol);
    return false;
}

oqrw::BlockState initial_state(const oqrw::WalkModel& walk, const std::string& spec) {
    if (spec.empty()) return oqrw::default_initial_state(walk);
    std::string id = spec;
    if (id.rfind("site=", 0) == 0) id = id.substr(5);
    const auto site = walk.find_site(id);
    if (!site) throw InputError("--initial: unknown site '" + id + "'");
    return oqrw::pure_state(walk, *site, oqrw::CVector::Unit(walk.dim(*site), 0));
}

int cmd_validate(const std::string& file) {
    const auto walk = load(file);
    const auto v = oqrw::validate(walk);
    for (std::size_t i = 0; i < walk.site_count(); ++i)
        std::printf("site %-8s deviation %.3e\n", walk.site_id(i).c_str(), v.deviation[i]);
    std::printf("%s: %s\n", walk.name().c_str(), v.ok ? "ok" : "NOT stochastic");
    return v.ok ? kOk : kInvalid;
}

int cmd_analyze(const std::string& source, double tol, std::uint64_t seed, bool json) {
    const auto walk = load(source);
    const auto report = oqrw::analyze(walk, {tol, seed});
    std::cout << (json ? oqrw::report_json(walk, report) : oqrw::report_text(walk, report));
    return report.stochastic_ok ? kOk : kInvalid;
}

int cmd_series(const std::string& source, const std::string& initial, const oqrw::SeriesOptions& opts,
               const std::string& out) {
    const auto walk = load(source);
    if (!check_stochastic(walk, oqrw::kStochasticTol)) return kInvalid;
    const auto rho0 = initial_state(walk, initial);
    try {
        oqrw::emit_series(walk, rho0, opts, out);
    } catch (const oqrw::Error& e) {
        // Only I/O problems reach here as plain Error; let the others propagate.
        if (typeid(e) != typeid(oqrw::Error)) throw;
        throw InputError(e.what());
    }
    std::printf("wrote %s\n", out.c_str());
    return kOk;
}

int cmd_example(const std::string& name, const std::string& file) {
    oqrw::WalkModel walk = [&] {
        try {
            return oqrw::builtin(name);
        } catch (const oqrw::PreconditionError& e) {
            throw InputError(e.what());
        }
    }();
    const std::string text = oqrw::serialize_config(walk);
    if (file.empty()) {
        std::cout << text;
        return kOk;
    }
    std::ofstream out(file);
    if (!out || !(out << text)) throw InputError("cannot write '" + file + "'");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open quantum random walks: validation, spectral/structural analysis, simulation"};
    app.require_subcommand(1);

    std::string source, initial, out, write_file;
    double tol = oqrw::kStochasticTol;
    std::uint64_t seed = 0x5eed;
    bool json = false, cesaro = false;
    int steps = 0, trajectories = 1;

    auto* validate = app.add_subcommand("validate", "check stochasticity of a walk file");
    validate->add_option("file", source, "walk JSON file")->required();

    auto* analyze = app.add_subcommand("analyze", "irreducibility, period, invariant states, decomposition");
    analyze->add_option("source", source, "walk JSON file or builtin:NAME")->required();
    analyze->add_option("--tol", tol, "stochasticity tolerance");
    analyze->add_option("--seed", seed, "seed for the decomposition");
    analyze->add_flag("--json", json, "machine-readable output");

    auto* evolve = app.add_subcommand("evolve", "write M^n(rho) series as CSV");
    evolve->add_option("source", source, "walk JSON file or builtin:NAME")->required();
    evolve->add_option("--steps", steps, "number of steps")->required()->check(CLI::NonNegativeNumber);
    evolve->add_flag("--cesaro", cesaro, "write running Cesaro means instead");
    evolve->add_option("--initial", initial, "start from e_1 at site=ID (default: smallest label)");
    evolve->add_option("--out", out, "output directory")->required();

    auto* sample = app.add_subcommand("sample", "sample quantum trajectories and write CSV");
    sample->add_option("source", source, "walk JSON file or builtin:NAME")->required();
    sample->add_option("--steps", steps, "number of steps")->required()->check(CLI::NonNegativeNumber);
    sample->add_option("--trajectories", trajectories, "number of trajectories")
        ->required()
        ->check(CLI::PositiveNumber);
    sample->add_option("--seed", seed, "random seed")->required();
    sample->add_option("--initial", initial, "start from e_1 at site=ID (default: smallest label)");
    sample->add_option("--out", out, "output directory")->required();

    auto* example = app.add_subcommand("example", "print or write a builtin walk as JSON");
    example->add_option("name", source, "builtin name, optionally with ?key=value parameters")->required();
    example->add_option("--write", write_file, "write to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInput;
    }

    try {
        if (*validate) return cmd_validate(source);
        if (*analyze) return cmd_analyze(source, tol, seed, json);
        if (*evolve) {
            oqrw::SeriesOptions opts{cesaro ? oqrw::SeriesMode::cesaro : oqrw::SeriesMode::direct, steps, 1, 0};
            return cmd_series(source, initial, opts, out);
        }
        if (*sample) {
            oqrw::SeriesOptions opts{oqrw::SeriesMode::sample, steps, trajectories, seed};
            return cmd_series(source, initial, opts, out);
        }
        if (*example) return cmd_example(source, write_file);
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "diagnostic failure: %s\n", e.what());
        return kDiagnostic;
    }
    return kOk;
}
