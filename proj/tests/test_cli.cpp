// End-to-end checks of the rcc binary: exit codes, output files, manifest
// determinism, thread-count invariance and checkpoint resumption. The binary
// path comes in through RCC_CLI_PATH at compile time.
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcc/graph.hpp"
#include "rcc/graph_build.hpp"
#include "rcc/graph_stats.hpp"
#include "rcc/inference.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::path("/tmp") / ("rcc_cli_test_" + std::to_string(getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Runs the binary with the given arguments, captures stdout/stderr, returns
// the exit code.
int run_cli(const std::string& args, std::string* out = nullptr) {
    const fs::path log = work_dir() / "last_out.log";
    const std::string cmd =
        std::string(RCC_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    if (out) {
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        *out = ss.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

bool identical_trees(const fs::path& a, const fs::path& b) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    std::vector<std::string> names_b;
    for (const auto& e : fs::directory_iterator(b))
        names_b.push_back(e.path().filename().string());
    std::sort(names_b.begin(), names_b.end());
    if (names != names_b) return false;
    for (const auto& n : names)
        if (slurp(a / n) != slurp(b / n)) return false;
    return true;
}

fs::path write_k4() {
    const fs::path p = work_dir() / "k4.txt";
    std::ofstream out(p);
    out << "# vertices 4\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";
    return p;
}

}  // namespace

TEST_CASE("usage problems exit with the validation code") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("stats --out somewhere") == 2);          // missing --input
    CHECK(run_cli("simulate --out x --no-such-flag") == 2);
    std::string out;
    CHECK(run_cli("--version", &out) == 0);
    CHECK(out.find("0.1.0") != std::string::npos);
    CHECK(run_cli("--help", &out) == 0);
    CHECK(out.find("simulate") != std::string::npos);
}

TEST_CASE("stats on a K4 reports the familiar summary") {
    const fs::path k4 = write_k4();
    const fs::path out = work_dir() / "stats_k4";
    std::string console;
    REQUIRE(run_cli("stats --input " + k4.string() + " --out " + out.string(), &console) == 0);

    const json s = json::parse(slurp(out / "summary.json"));
    CHECK(s["vertices"] == 4);
    CHECK(s["edges"] == 6);
    CHECK(s["density (x1k)"] == doctest::Approx(1000.0));
    CHECK(s["av. degree"] == doctest::Approx(3.0));
    CHECK(s["max. clique"] == doctest::Approx(4.0));
    CHECK(s["cluster. coeff."] == doctest::Approx(1.0));
    CHECK(json::parse(console) == s);  // console mirrors the file

    const auto deg = lines_of(slurp(out / "degree_hist.csv"));
    REQUIRE(deg.size() == 5);
    CHECK(deg[0] == "degree,count");
    CHECK(deg[4] == "3,4");

    const auto mc = lines_of(slurp(out / "max_clique_hist.csv"));
    REQUIRE(mc.size() == 2);
    CHECK(mc[1] == "4,1");

    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["command"] == "stats");
    for (const auto& name : manifest["outputs"])
        CHECK(fs::exists(out / name.get<std::string>()));

    // Re-running the same spec rewrites identical bytes.
    const fs::path out2 = work_dir() / "stats_k4_rerun";
    REQUIRE(run_cli("stats --input " + k4.string() + " --out " + out2.string()) == 0);
    CHECK(identical_trees(out, out2));
}

TEST_CASE("stats maps input and budget problems to their exit codes") {
    CHECK(run_cli("stats --input /nonexistent/g.txt --out " + (work_dir() / "x1").string()) == 2);

    const fs::path bad = work_dir() / "bad.txt";
    std::ofstream(bad) << "0 not_a_number\n";
    std::string msg;
    CHECK(run_cli("stats --input " + bad.string() + " --out " + (work_dir() / "x2").string(),
                  &msg) == 2);
    CHECK(msg.find("non-numeric") != std::string::npos);

    // A path graph has two maximal cliques; a budget of one aborts.
    const fs::path path2 = work_dir() / "path2.txt";
    std::ofstream(path2) << "0 1\n1 2\n";
    CHECK(run_cli("stats --input " + path2.string() + " --out " + (work_dir() / "x3").string() +
                  " --clique-budget 1") == 3);
}

TEST_CASE("simulate output does not depend on the worker count") {
    const std::string spec = "simulate --sigma 0.4,0.7 --c 1 --replicates 3 --cliques 50 --seed 21";
    const fs::path seq = work_dir() / "sim_seq";
    const fs::path par = work_dir() / "sim_par";
    REQUIRE(run_cli(spec + " --threads 1 --out " + seq.string()) == 0);
    REQUIRE(run_cli(spec + " --threads 4 --out " + par.string()) == 0);
    CHECK(identical_trees(seq, par));

    // The RCC_THREADS cap must not change the bytes either.
    const fs::path capped = work_dir() / "sim_capped";
    setenv("RCC_THREADS", "2", 1);
    REQUIRE(run_cli(spec + " --threads 8 --out " + capped.string()) == 0);
    unsetenv("RCC_THREADS");
    CHECK(identical_trees(seq, capped));

    setenv("RCC_THREADS", "zero", 1);
    CHECK(run_cli(spec + " --out " + (work_dir() / "sim_bad_env").string()) == 2);
    unsetenv("RCC_THREADS");

    // Sanity on content: every grid point produced slopes and summaries.
    const auto grid = lines_of(slurp(seq / "grid_summary.csv"));
    REQUIRE(grid.size() == 3);
    for (std::size_t i = 1; i < grid.size(); ++i)
        CHECK(std::count(grid[i].begin(), grid[i].end(), ',') == 11);
    const auto traj = lines_of(slurp(seq / "trajectories.csv"));
    CHECK(traj.size() == 1 + 2 * 3 * 50);  // header + grid x replicates x cliques
}

TEST_CASE("simulate honours config-file overrides") {
    const fs::path cfg = work_dir() / "sim_cfg.json";
    std::ofstream(cfg) << R"({"seed": 21, "sigma": [0.4, 0.7], "c": [1], "replicates": 3,)"
                       << R"( "cliques": 50})";
    const fs::path from_cfg = work_dir() / "sim_from_cfg";
    REQUIRE(run_cli("simulate --seed 999 --replicates 1 --cliques 5 --config " + cfg.string() +
                    " --out " + from_cfg.string()) == 0);
    CHECK(identical_trees(work_dir() / "sim_seq", from_cfg));

    const fs::path typo = work_dir() / "typo.json";
    std::ofstream(typo) << R"({"sead": 1})";
    CHECK(run_cli("simulate --config " + typo.string() + " --out " +
                  (work_dir() / "sim_typo").string()) == 2);
}

TEST_CASE("full-mode fit emits consistent artifacts") {
    const fs::path k4 = write_k4();
    const fs::path out = work_dir() / "fit_full";
    REQUIRE(run_cli("fit --input " + k4.string() + " --out " + out.string() +
                    " --iterations 1500 --burn-in 500 --thin 50 --seed 3") == 0);

    const auto trace = lines_of(slurp(out / "trace.csv"));
    REQUIRE(trace.size() >= 2);
    CHECK(trace[0] == rcc::trace_csv_header());
    const auto commas = std::count(trace[0].begin(), trace[0].end(), ',');
    for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(std::count(trace[i].begin(), trace[i].end(), ',') == commas);
    CHECK(trace.back().rfind("1500,", 0) == 0);

    // Thinning kept (1500 - 500) / 50 covers, each an exact cover of the
    // graph: that is the full-observation invariant end to end.
    const rcc::Graph g = rcc::load_edge_list(k4.string());
    const auto sample_lines = lines_of(slurp(out / "samples.jsonl"));
    REQUIRE(sample_lines.size() == 20);
    for (const auto& line : sample_lines) {
        const json row = json::parse(line);
        const auto z = rcc::CliqueMatrix::from_json(row["cover"].dump());
        CHECK(rcc::cover_to_graph(z) == g);
        CHECK(row["log_lik"].get<double>() == 0.0);
    }

    const json fitted = json::parse(slurp(out / "fitted.json"));
    CHECK(fitted["mode"] == "full");
    CHECK(fitted["n_samples"] == 20);
    CHECK(fitted["graph"]["vertices"] == 4);
    CHECK(fitted["graph"]["edges"] == 6);
    CHECK(fitted["final_log_lik"] == 0.0);
    CHECK(fitted["hp_final"]["alpha"].get<double>() > 0.0);
    const double accept_split = fitted["acceptance"]["split"].get<double>();
    CHECK(accept_split >= 0.0);
    CHECK(accept_split <= 1.0);

    // Checkpoint parses and the iteration matches the requested length.
    const json ck = json::parse(slurp(out / "checkpoint.json"));
    CHECK(ck["iteration"] == 1500);
}

TEST_CASE("fit runs resume transparently from a checkpoint") {
    const fs::path k4 = write_k4();
    const std::string common = " --iterations 1500 --burn-in 200 --thin 25 --seed 3";
    const fs::path half = work_dir() / "fit_half";
    const fs::path resumed = work_dir() / "fit_resumed";
    const fs::path straight = work_dir() / "fit_straight";

    REQUIRE(run_cli("fit --input " + k4.string() + " --out " + half.string() +
                    " --iterations 700 --burn-in 200 --thin 25 --seed 3") == 0);
    REQUIRE(run_cli("fit --input " + k4.string() + " --out " + resumed.string() + " --resume " +
                    (half / "checkpoint.json").string() + common) == 0);
    REQUIRE(run_cli("fit --input " + k4.string() + " --out " + straight.string() + common) == 0);
    CHECK(slurp(resumed / "checkpoint.json") == slurp(straight / "checkpoint.json"));

    // Resuming past the end is a validation error.
    CHECK(run_cli("fit --input " + k4.string() + " --out " + (work_dir() / "fit_x").string() +
                  " --resume " + (straight / "checkpoint.json").string() + common) == 2);
}

TEST_CASE("fit validates its knobs") {
    const fs::path k4 = write_k4();
    const std::string base = "fit --input " + k4.string() + " --out " +
                             (work_dir() / "fit_bad").string();
    CHECK(run_cli(base + " --mode sideways") == 2);
    CHECK(run_cli(base + " --iterations 100 --burn-in 100") == 2);
    CHECK(run_cli(base + " --thin 0") == 2);
    CHECK(run_cli(base + " --sigma 1.5") == 2);
    CHECK(run_cli(base + " --w-split-merge 0 --w-gibbs 0 --w-empty 0 --w-pi 0 --w-hyper 0") == 2);
}

TEST_CASE("predict tabulates posterior-predictive statistics against truth") {
    const fs::path k4 = write_k4();
    const fs::path fit_dir = work_dir() / "fit_full";  // produced above
    REQUIRE(fs::exists(fit_dir / "fitted.json"));

    const fs::path out = work_dir() / "pred";
    const std::string spec = "predict --fit " + fit_dir.string() + " --samples 8 --seed 5";
    REQUIRE(run_cli(spec + " --threads 1 --out " + out.string()) == 0);

    const auto table = lines_of(slurp(out / "predict.csv"));
    REQUIRE(table.size() == 8);  // header + seven statistics
    CHECK(table[0] == "statistic,mean,stderr,truth");
    CHECK(table[1].rfind("vertices,", 0) == 0);
    CHECK(table[7].rfind("cluster. coeff.,", 0) == 0);

    // Truth column equals the summary of the graph the fit ran on.
    const json pj = json::parse(slurp(out / "predict.json"));
    const rcc::GraphSummary truth = rcc::summarize(rcc::load_edge_list(k4.string()));
    for (const auto& row : pj["rows"]) {
        if (row["statistic"] == "edges") CHECK(row["truth"].get<double>() == double(truth.edges));
        if (row["statistic"] == "av. degree")
            CHECK(row["truth"].get<double>() == doctest::Approx(truth.average_degree));
        CHECK_FALSE(row["mean"].is_null());
    }
    const auto per_sample = lines_of(slurp(out / "samples.csv"));
    CHECK(per_sample.size() == 9);

    // Worker count must not influence a single byte.
    const fs::path out4 = work_dir() / "pred_par";
    REQUIRE(run_cli(spec + " --threads 4 --out " + out4.string()) == 0);
    CHECK(identical_trees(out, out4));

    // Out-of-domain hyperparameters are refused.
    CHECK(run_cli("predict --out " + (work_dir() / "pred_bad").string() +
                  " --alpha 2 --sigma 0 --c 1 --tau 5") == 2);
    // No source of hyperparameters at all.
    CHECK(run_cli("predict --out " + (work_dir() / "pred_none").string() + " --alpha 2") == 2);
}

TEST_CASE("partial fit feeds the latent-structure report") {
    // Planted cover: two overlapping triangles observed through pi = 1, so
    // the report must find no latent-only edges once the chain settles.
    const fs::path g_path = work_dir() / "planted.txt";
    std::ofstream(g_path) << "0 1\n0 2\n1 2\n2 3\n2 4\n3 4\n";

    const fs::path fit_dir = work_dir() / "fit_part";
    REQUIRE(run_cli("fit --input " + g_path.string() + " --out " + fit_dir.string() +
                    " --mode partial --iterations 4000 --burn-in 1000 --thin 100 --seed 8") == 0);

    const fs::path rep = work_dir() / "rep";
    std::string console;
    REQUIRE(run_cli("report --fit " + fit_dir.string() + " --out " + rep.string(), &console) == 0);

    const json rj = json::parse(slurp(rep / "report.json"));
    CHECK(rj["n_samples"] == 30);
    CHECK(rj["observed_edges"] == 6);
    CHECK(rj["pi_posterior_mean"].get<double>() > 0.0);
    CHECK(rj["pi_posterior_mean"].get<double>() < 1.0);
    CHECK(rj["latent_only_fraction_mean"].get<double>() >= 0.0);
    CHECK(rj["latent_only_fraction_mean"].get<double>() <= 1.0);
    CHECK(json::parse(console) == rj);

    // The emitted edge lists round-trip through the loader; the observed one
    // reproduces the input graph exactly.
    const rcc::Graph g = rcc::load_edge_list(g_path.string());
    CHECK(rcc::load_edge_list((rep / "observed_edges.txt").string()) == g);
    const rcc::Graph latent = rcc::load_edge_list((rep / "latent_only_edges.txt").string());
    CHECK(latent.vertex_count() == g.vertex_count());
    for (auto [u, v] : latent.edges()) CHECK_FALSE(g.has_edge(u, v));

    CHECK(fs::exists(rep / "membership_hist.csv"));
    CHECK(fs::exists(rep / "report.txt"));

    // Reports over fully-observed fits are refused.
    CHECK(run_cli("report --fit " + (work_dir() / "fit_full").string() + " --out " +
                  (work_dir() / "rep_bad").string()) == 2);
}
