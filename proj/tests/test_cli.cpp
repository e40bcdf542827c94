#include "fixtures.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + NDDE_CLI_PATH + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string body(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') out += line + "\n";
    return out;
}

double field(const std::string& text, const std::string& key) {
    const std::size_t at = text.find(key + " = ");
    REQUIRE(at != std::string::npos);
    return std::stod(text.substr(at + key.size() + 3));
}

std::string tmp(const std::string& name) { return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/ndde_cli_" + name; }

}  // namespace

TEST_CASE("check: exit codes") {
    const Run ok = cli("check " + fixture::preset("worked-example.cfg"));
    CHECK(ok.status == 0);
    CHECK(field(ok.out, "alpha") < 0.98);
    CHECK(cli("check " + fixture::preset("worked-example-b10.cfg")).status == 2);
    const Run zero = cli("check " + fixture::preset("zero.cfg"));
    CHECK(zero.status == 0);
    CHECK(field(zero.out, "alpha") == 0.0);
    CHECK(cli("check /nonexistent.cfg").status == 1);
    CHECK(cli("").status == 1);
}

TEST_CASE("check: JSON report and thread-count independence") {
    const std::string a = tmp("a.json"), b = tmp("b.json");
    REQUIRE(cli("check " + fixture::preset("worked-example.cfg") + " --tmax 1000 --json " + a).status == 0);
    REQUIRE(cli("check " + fixture::preset("worked-example.cfg") + " --tmax 1000 --json " + b, "NDDE_THREADS=1").status == 0);
    const auto j = nlohmann::json::parse(slurp(a));
    CHECK(j.at("tmax") == 1000.0);
    CHECK(j.at("verdicts").at("bounded") == "satisfied");
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("simulate: deterministic CSV") {
    const std::string a = tmp("s1.csv"), b = tmp("s2.csv");
    const Run r = cli("simulate " + fixture::preset("worked-example.cfg") + " --T 200 --step 0.01 --csv " + a);
    REQUIRE(r.status == 0);
    CHECK(field(r.out, "max_abs_x") < 0.1);
    REQUIRE(cli("simulate " + fixture::preset("worked-example.cfg") + " --T 200 --step 0.01 --csv " + b).status == 0);
    CHECK(body(slurp(a)) == body(slurp(b)));
    CHECK(body(slurp(a)).rfind("t,x,xprime\n", 0) == 0);
}

TEST_CASE("picard: summary") {
    const std::string csv = tmp("p.csv");
    const Run r = cli("picard " + fixture::preset("worked-example.cfg") + " --T 50 --csv " + csv);
    CHECK(r.status == 0);
    CHECK(field(r.out, "residual") < 1e-6);
    CHECK(field(r.out, "direct_gap") < 1e-3);
    CHECK(slurp(csv).find("t,x\n") != std::string::npos);

    const Run wild = cli("picard " + fixture::preset("worked-example-b10.cfg") + " --T 50");
    CHECK(wild.status == 3);
    CHECK(field(wild.out, "max_ratio") > 1.0);
}

TEST_CASE("usage errors") {
    CHECK(cli("simulate " + fixture::preset("zero.cfg") + " --tol 1e-3").status == 1);
    CHECK(cli("check " + fixture::preset("zero.cfg") + " --step 0.1").status == 1);
    CHECK(cli("frobnicate").status == 1);
    CHECK(cli("--help").status == 0);
}

TEST_CASE("example materializes the preset") {
    const Run r = cli("example section4");
    CHECK(r.status == 0);
    CHECK(r.out == slurp(fixture::preset("worked-example.cfg")));
    CHECK(cli("example nothing").status == 1);
}

TEST_CASE("stability subcommand") {
    const Run r = cli("stability " + fixture::preset("zero.cfg"));
    CHECK(r.status == 3);  // constant trajectories stay bounded but do not decay
    const Run s = cli("stability " + fixture::preset("worked-example.cfg") + " --T 200 --delta 0.00135");
    CHECK(s.status != 1);
    CHECK(field(s.out, "delta") == 0.00135);
}
