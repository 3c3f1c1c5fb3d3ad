#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LABELSIM_CLI_PATH) + " " + args + " 2>&1";
    CliResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) {
        res.output.append(buf, n);
    }
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string value_of(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + "=", 0) == 0) {
            return line.substr(key.size() + 1);
        }
    }
    return {};
}

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "labelsim_cli_tests";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("chi subcommand prints the worked p-values") {
    const auto res = run_cli("chi 0 0 7 0 1 0 2 0 0 0");
    CHECK(res.exit_code == 0);
    CHECK(value_of(res.output, "statistic") == "44");
    CHECK(value_of(res.output, "df") == "9");
    CHECK(value_of(res.output, "p_value").substr(0, 5) == "1.411");

    const auto res2 = run_cli("chi 0 0 5 0 0 0 0 0 5 0");
    CHECK(value_of(res2.output, "p_value").substr(0, 5) == "7.598");

    const auto flat = run_cli("chi 1 1 1 1");
    CHECK(value_of(flat.output, "p_value") == "1");

    CHECK(run_cli("chi 0 0 0").exit_code == 1);
    CHECK(run_cli("chi").exit_code == 1);
}

TEST_CASE("poker equity subcommand reports the exact counts") {
    const auto res = run_cli("poker equity --p1 'Qh Js' --p2 '7s 7d' --flop '2s 9s Ts'");
    CHECK(res.exit_code == 0);
    CHECK(value_of(res.output, "rivers") == "990");
    CHECK(value_of(res.output, "p1_wins") == "663");
    CHECK(value_of(res.output, "p2_wins") == "327");
    CHECK(value_of(res.output, "ties") == "0");

    const auto royal = run_cli("poker equity --p1 'As Ks' --p2 '2h 2d' --flop 'Qs Js Ts'");
    CHECK(value_of(royal.output, "p1_share") == "1");

    CHECK(run_cli("poker equity --p1 'Qh Js' --p2 'Qh 7d' --flop '2s 9s Ts'").exit_code == 1);
    CHECK(run_cli("poker equity --p1 '1x 2y' --p2 '7s 7d' --flop '2s 9s Ts'").exit_code == 1);
}

TEST_CASE("poker sample requires a seed and converges") {
    CHECK(run_cli("poker sample --p1 'Qh Js' --p2 '7s 7d' --flop '2s 9s Ts' --n 100").exit_code ==
          1);
    const auto res =
        run_cli("poker sample --p1 'Qh Js' --p2 '7s 7d' --flop '2s 9s Ts' --n 50000 --seed 3");
    CHECK(res.exit_code == 0);
    const double freq = std::atof(value_of(res.output, "p1_win_freq").c_str());
    CHECK(freq > 0.65);
    CHECK(freq < 0.69);
}

TEST_CASE("simulate reads a JSON config and flags override it") {
    const auto dir = temp_dir();
    const auto cfg_path = dir / "sim.json";
    const auto csv_path = dir / "sim.csv";
    const auto sum_path = dir / "sim.txt";
    {
        std::ofstream cfg(cfg_path, std::ios::trunc);
        cfg << "{\n"
            << "  \"oracle\": {\"kind\": \"uniform\", \"classes\": 10, \"noise\": 0.2},\n"
            << "  \"policy\": \"fixed:v=3\",\n"
            << "  \"s_max\": 9,\n"
            << "  \"examples\": 5,\n"
            << "  \"master_seed\": 1,\n"
            << "  \"out_csv\": \"" << csv_path.string() << "\",\n"
            << "  \"out_summary\": \"" << sum_path.string() << "\"\n"
            << "}\n";
    }
    const auto res = run_cli("simulate --config " + cfg_path.string());
    CHECK(res.exit_code == 0);
    CHECK(value_of(res.output, "labeled") == "3");
    CHECK(value_of(res.output, "total_queries") == "9");
    CHECK(fs::exists(csv_path));
    CHECK(fs::exists(sum_path));

    // Flag override: v=1 labels all five examples.
    const auto res2 = run_cli("simulate --config " + cfg_path.string() + " --policy fixed:v=1");
    CHECK(res2.exit_code == 0);
    CHECK(value_of(res2.output, "labeled") == "5");
    CHECK(value_of(res2.output, "total_queries") == "5");
}

TEST_CASE("simulate rejects bad configs before writing anything") {
    const auto dir = temp_dir();
    const auto csv_path = dir / "never.csv";

    const auto bad_policy = run_cli("simulate --oracle uniform --classes 10 --noise 0.2 "
                                    "--policy garbage --smax 10 --examples 5 --seed 1 "
                                    "--out-csv " + csv_path.string());
    CHECK(bad_policy.exit_code == 1);
    CHECK(!fs::exists(csv_path));

    const auto no_seed = run_cli("simulate --oracle uniform --classes 10 --noise 0.2 "
                                 "--policy fixed:v=1 --smax 10 --examples 5");
    CHECK(no_seed.exit_code == 1);

    const auto bad_json = temp_dir() / "broken.json";
    {
        std::ofstream out(bad_json, std::ios::trunc);
        out << "{ not json";
    }
    CHECK(run_cli("simulate --config " + bad_json.string()).exit_code == 1);

    const auto bad_noise = run_cli("simulate --oracle uniform --classes 10 --noise 0.99 "
                                   "--policy fixed:v=1 --smax 10 --examples 5 --seed 1");
    CHECK(bad_noise.exit_code == 1);
}

TEST_CASE("simulate runs the poker oracle end to end") {
    const auto dir = temp_dir();
    const auto csv_path = dir / "poker.csv";
    const auto sum_path = dir / "poker.txt";
    const auto res = run_cli("simulate --oracle poker --p1 'Qh Js' --p2 '7s 7d' "
                             "--flop '2s 9s Ts' --policy fixed:v=3 --smax 9000 --examples 3000 "
                             "--seed 4 --out-csv " + csv_path.string() + " --out-summary " +
                             sum_path.string());
    CHECK(res.exit_code == 0);
    CHECK(value_of(res.output, "labeled") == "3000");
    // v=3 majority of a q~0.67 coin: accuracy well above single-query q.
    const double acc = std::atof(value_of(res.output, "label_accuracy").c_str());
    CHECK(acc > 0.68);
    CHECK(acc < 0.82);
}

TEST_CASE("unknown flags and missing subcommands exit with a usage error") {
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("curves --bogus 1").exit_code == 1);
}
