#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace orbfb;

namespace {

struct Csv {
    std::string schema;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Csv parse_csv(const std::string& text) {
    Csv csv;
    std::istringstream in(text);
    std::string line;
    bool first_data = true;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) == 0) {
            csv.schema = line;
            continue;
        }
        std::vector<std::string> fields;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) fields.push_back(cell);
        if (line.ends_with(',')) fields.push_back("");
        if (first_data) {
            csv.header = fields;
            first_data = false;
        } else {
            csv.rows.push_back(fields);
        }
    }
    return csv;
}

double col(const Csv& csv, const std::vector<std::string>& row, const std::string& name) {
    for (std::size_t i = 0; i < csv.header.size(); ++i)
        if (csv.header[i] == name) return std::stod(row.at(i));
    throw std::runtime_error("missing column " + name);
}

std::string scol(const Csv& csv, const std::vector<std::string>& row, const std::string& name) {
    for (std::size_t i = 0; i < csv.header.size(); ++i)
        if (csv.header[i] == name) return row.at(i);
    throw std::runtime_error("missing column " + name);
}

int run_argv(std::vector<std::string> args, std::ostream& console) {
    std::vector<char*> argv;
    static std::string prog = "orbfb";
    argv.push_back(prog.data());
    for (auto& a : args) argv.push_back(a.data());
    return cli::run(static_cast<int>(argv.size()), argv.data(), console);
}

}  // namespace

TEST_CASE("iorb rows carry consistent single-letter values") {
    std::vector<std::string> args{"iorb", "--snr-db"};
    std::string grid;
    for (double s = -6.0; s <= 12.0 + 1e-9; s += 0.5) grid += (grid.empty() ? "" : ",") + std::to_string(s);
    args.push_back(grid + ",40");
    const auto res = cli::execute(args);
    const Csv csv = parse_csv(res.output);
    CHECK(csv.schema == "# orbfb iorb csv v1");
    REQUIRE(csv.rows.size() == 38);

    std::vector<double> vorb;
    for (const auto& r : csv.rows) {
        CHECK(scol(csv, r, "error").empty());
        CHECK(col(csv, r, "i_orb_nats") <= col(csv, r, "capacity_nats") + 1e-12);
        if (col(csv, r, "snr_db") < 39.0) vorb.push_back(col(csv, r, "v_orb"));
    }
    // noiseless limit row
    CHECK(col(csv, csv.rows.back(), "i_orb_nats") >= 0.68);

    // unimodal dispersion column
    int sign_changes = 0, prev = 0;
    for (std::size_t i = 1; i < vorb.size(); ++i) {
        const int s = vorb[i] > vorb[i - 1] ? 1 : -1;
        if (prev != 0 && s != prev) ++sign_changes;
        prev = s;
    }
    CHECK(sign_changes == 1);
}

TEST_CASE("pe-curve saturates above ln 2 and decreases with rate") {
    const auto res = cli::execute({"pe-curve", "--snr-db", "0", "--n", "128", "--rates",
                                   "0.17,0.2,0.23,0.75", "--methods", "ORB_NA,ORB_RCU_MC,ML_NA",
                                   "--samples", "400000", "--seed", "99"});
    const Csv csv = parse_csv(res.output);
    REQUIRE(csv.rows.size() == 12);
    double prev_eps = -1.0;
    std::string prev_method;
    std::map<std::pair<std::string, double>, double> eps_at;
    for (const auto& r : csv.rows) {
        const double eps = col(csv, r, "epsilon");
        const double rate = col(csv, r, "rate_nats");
        const std::string method = scol(csv, r, "method");
        eps_at[{method, rate}] = eps;
        CHECK(eps >= 0.0);
        CHECK(eps <= 1.0);
        if (rate > std::numbers::ln2) CHECK(eps > 0.99);
        if (method == prev_method) CHECK(eps >= prev_eps - 1e-12);  // rates listed increasing
        prev_eps = eps;
        prev_method = method;
    }
    // the approximation tracks the sampled bound within a small factor in
    // the epsilon band of interest
    for (double rate : {0.17, 0.2, 0.23}) {
        const double na = eps_at[{"ORB_NA", rate}];
        const double mc = eps_at[{"ORB_RCU_MC", rate}];
        if (mc >= 1e-3 && mc <= 1e-1) {
            CHECK(na / mc < 3.0);
            CHECK(na / mc > 1.0 / 3.0);
        }
    }
}

TEST_CASE("rate-curve approaches i_orb and stays monotone") {
    const auto res = cli::execute({"rate-curve", "--snr-db", "0", "--epsilon", "0.001", "--n",
                                   "100,400,1600,6400,25600,100000", "--methods", "ORB_NA"});
    const Csv csv = parse_csv(res.output);
    REQUIRE(csv.rows.size() == 6);
    const auto iorb_csv = cli::execute({"iorb", "--snr-db", "0"});
    const Csv ic = parse_csv(iorb_csv.output);
    const double i_orb = col(ic, ic.rows[0], "i_orb_nats");

    double prev = 0.0;
    for (const auto& r : csv.rows) {
        const double rate = col(csv, r, "rate_nats");
        CHECK(rate >= prev);
        CHECK(rate <= i_orb);
        CHECK(col(csv, r, "rate_bits") == doctest::Approx(rate / std::numbers::ln2));
        prev = rate;
    }
    CHECK(i_orb - prev < 0.007);  // n = 1e5: correction nearly gone
}

TEST_CASE("rate-curve MC stays inside the NA accuracy band") {
    const auto res = cli::execute({"rate-curve", "--snr-db", "0", "--epsilon", "0.001", "--n",
                                   "256", "--methods", "ORB_RCU_MC,ORB_NA", "--samples", "400000",
                                   "--seed", "31415"});
    const Csv csv = parse_csv(res.output);
    REQUIRE(csv.rows.size() == 2);
    const double mc = col(csv, csv.rows[0], "rate_nats");
    const double na = col(csv, csv.rows[1], "rate_nats");
    CHECK(mc >= na - 0.05);
    CHECK(mc <= na + 0.02);
}

TEST_CASE("min-n matches the golden reference and orders by rate fraction") {
    const auto res = cli::execute({"min-n", "--snr-db", "0", "--epsilon", "0.001", "--rate-frac",
                                   "0.8,0.9", "--methods", "ORB_NA"});
    const char* dir = std::getenv("ORBFB_GOLDEN_DIR");
    REQUIRE(dir != nullptr);
    std::ifstream g(std::string(dir) + "/min_n_0db.csv", std::ios::binary);
    REQUIRE(g.good());
    std::stringstream buf;
    buf << g.rdbuf();
    CHECK(res.output == buf.str());

    // 0.9C needs strictly more blocklength than 0.8C on the NA table
    const auto table = cli::execute({"min-n", "--snr-db", "0,1,2,3", "--epsilon",
                                     "1e-3,1e-4,1e-5,1e-6", "--rate-frac", "0.8,0.9",
                                     "--methods", "ORB_NA"});
    const Csv csv = parse_csv(table.output);
    REQUIRE(csv.rows.size() == 8);
    for (int i = 0; i < 4; ++i)
        CHECK(col(csv, csv.rows[i + 4], "min_n") > col(csv, csv.rows[i], "min_n"));
}

TEST_CASE("simulate reports are reproducible and self-checking") {
    const std::vector<std::string> args{"simulate", "--snr-db",   "0",   "--n",     "12",
                                        "--m",      "64",         "--codebooks", "30",
                                        "--frames", "400",        "--samples",   "150000",
                                        "--seed",   "2026"};
    const auto a = cli::execute(args);
    const auto b = cli::execute(args);
    CHECK(cli::digest(a.output) == cli::digest(b.output));
    CHECK(a.output.find("\"pass\": true") != std::string::npos);

    // M = 1 has no competing codeword
    const auto m1 = cli::execute({"simulate", "--snr-db", "0", "--n", "12", "--m", "1",
                                  "--codebooks", "5", "--frames", "100", "--samples", "1000"});
    CHECK(m1.output.find("\"fer\": 0.0") != std::string::npos);
}

TEST_CASE("manifest round-trip verifies") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "orbfb_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string out = (dir / "iorb.csv").string();

    std::ostringstream console;
    REQUIRE(run_argv({"iorb", "--snr-db", "0,3", "--output", out}, console) == 0);
    REQUIRE(fs::exists(out));
    REQUIRE(fs::exists(out + ".manifest.json"));

    std::ostringstream verify_out;
    CHECK(run_argv({"verify-manifest", out + ".manifest.json"}, verify_out) == 0);
    CHECK(verify_out.str().find("PASS") != std::string::npos);

    // tamper with the recorded digest: replay must fail
    std::ifstream mf(out + ".manifest.json");
    std::stringstream m;
    m << mf.rdbuf();
    std::string tampered = m.str();
    const auto at = tampered.find("fnv1a64:");
    REQUIRE(at != std::string::npos);
    tampered[at + 8] = tampered[at + 8] == '0' ? '1' : '0';
    std::ofstream(out + ".bad.json") << tampered;
    std::ostringstream fail_out;
    CHECK(run_argv({"verify-manifest", out + ".bad.json"}, fail_out) == 1);
    CHECK(fail_out.str().find("FAIL") != std::string::npos);
    fs::remove_all(dir);
}
