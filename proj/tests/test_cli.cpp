// End-to-end runs of the oqrw binary.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(OQRW_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("oqrw_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& file, const std::string& text) { std::ofstream(file) << text; }

std::string slurp(const fs::path& file) {
    std::ifstream in(file);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int line_count(const fs::path& file) {
    std::ifstream in(file);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

const char* kLeaky = R"({"name": "leaky", "sites": [{"id": "a", "dim": 1}],
  "edges": [{"from": "a", "to": "a", "kraus": [[[0.5]]]}]})";

}  // namespace

TEST(Cli, ExampleWriteThenValidate) {
    const auto dir = scratch("example");
    const auto file = dir / "m4.json";
    ASSERT_EQ(run("example m4 --write " + file.string()).code, 0);
    const auto v = run("validate " + file.string());
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find("m4: ok"), std::string::npos) << v.out;
    // stdout form is the same document.
    EXPECT_EQ(run("example m4").out, slurp(file));
}

TEST(Cli, ExampleWithParameter) {
    const auto r = run("example 'm4-eps?eps=0.2'");
    ASSERT_EQ(r.code, 0);
    EXPECT_NO_THROW((void)nlohmann::json::parse(r.out));
}

TEST(Cli, NonStochasticIsExitOne) {
    const auto dir = scratch("leaky");
    write(dir / "leaky.json", kLeaky);
    const auto v = run("validate " + (dir / "leaky.json").string());
    EXPECT_EQ(v.code, 1);
    EXPECT_NE(v.out.find("NOT stochastic"), std::string::npos);
    EXPECT_EQ(run("analyze " + (dir / "leaky.json").string()).code, 1);
    EXPECT_EQ(run("evolve " + (dir / "leaky.json").string() + " --steps 3 --out " + (dir / "o").string()).code,
              1);
    EXPECT_FALSE(fs::exists(dir / "o"));
}

TEST(Cli, InputErrorsAreExitTwo) {
    const auto dir = scratch("bad");
    write(dir / "broken.json", "{\"name\": ");
    write(dir / "badsite.json",
          R"({"name": "x", "sites": [{"id": "a", "dim": 1}], "edges": [{"from": "a", "to": "z", "kraus": [[[1]]]}]})");
    EXPECT_EQ(run("validate " + (dir / "broken.json").string()).code, 2);
    EXPECT_EQ(run("validate " + (dir / "badsite.json").string()).code, 2);
    EXPECT_EQ(run("validate " + (dir / "missing.json").string()).code, 2);
    EXPECT_EQ(run("analyze builtin:nope").code, 2);
    EXPECT_EQ(run("example nope").code, 2);
    EXPECT_EQ(run("evolve builtin:m3 --out " + dir.string()).code, 2);  // --steps missing
    EXPECT_EQ(run("evolve builtin:m3 --steps -1 --out " + dir.string()).code, 2);
    EXPECT_EQ(run("evolve builtin:m3 --steps 2 --initial site=99 --out " + dir.string()).code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("").code, 2);
}

TEST(Cli, AnalyzeJson) {
    const auto r = run("analyze builtin:m4 --json");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["name"], "m4");
    EXPECT_TRUE(j["stochastic_ok"].get<bool>());
    EXPECT_TRUE(j["irreducible"].get<bool>());
    EXPECT_EQ(j["period"], 2);
    EXPECT_EQ(j["fixed_space_dim"], 1);
    EXPECT_EQ(j["decomposition"]["transient_dim"], 0);
    EXPECT_TRUE(j["diagnostics"].contains("loop_gcd"));
}

TEST(Cli, AnalyzeTextMentionsPeriod) {
    const auto r = run("analyze builtin:z8-period4");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("period"), std::string::npos);
    EXPECT_NE(r.out.find('4'), std::string::npos);
}

TEST(Cli, AnalyzeFileMatchesBuiltin) {
    const auto dir = scratch("same");
    ASSERT_EQ(run("example ex-9.6 --write " + (dir / "w.json").string()).code, 0);
    EXPECT_EQ(run("analyze " + (dir / "w.json").string() + " --json").out, run("analyze builtin:ex-9.6 --json").out);
}

TEST(Cli, EvolveWritesSeries) {
    const auto dir = scratch("evolve");
    const auto out = dir / "run";
    const auto r = run("evolve builtin:m3 --steps 10 --initial site=2 --out " + out.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("wrote"), std::string::npos);
    EXPECT_EQ(line_count(out / "site_probs.csv"), 1 + 11 * 3);
    EXPECT_EQ(line_count(out / "blocks.csv"), 1 + 11 * 3 * 4);
    // Step 0 puts all weight on site 2.
    EXPECT_NE(slurp(out / "site_probs.csv").find("0,2,1\n"), std::string::npos);
    EXPECT_EQ(run("evolve builtin:m4 --steps 10 --cesaro --out " + (dir / "c").string()).code, 0);
    EXPECT_TRUE(fs::exists(dir / "c" / "site_probs.csv"));
}

TEST(Cli, SampleWritesSeriesAndIsDeterministic) {
    const auto dir = scratch("sample");
    const std::string args = "sample builtin:ex-9.2 --steps 20 --trajectories 300 --seed 4 --out ";
    ASSERT_EQ(run(args + (dir / "a").string()).code, 0);
    ASSERT_EQ(run(args + (dir / "b").string()).code, 0);
    for (auto f : {"site_probs.csv", "blocks.csv", "trajectory.csv", "conditional_avg.csv"}) {
        EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    EXPECT_EQ(line_count(dir / "a" / "trajectory.csv"), 1 + 21);
}

TEST(Cli, UnwritableOutputIsExitTwo) {
    const auto dir = scratch("blocked");
    write(dir / "file", "x");
    EXPECT_EQ(run("evolve builtin:m3 --steps 1 --out " + (dir / "file" / "sub").string()).code, 2);
}
