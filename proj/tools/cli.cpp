#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "orbfb/bounds.hpp"
#include "orbfb/channel.hpp"
#include "orbfb/codes.hpp"
#include "orbfb/saddlepoint.hpp"
#include "orbfb/tail.hpp"

namespace orbfb::cli {
namespace {

using nlohmann::json;

// shortest representation that round-trips the exact double
std::string fmt(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

// one CSV line, fields already formatted
template <typename... Ts>
void row(std::ostringstream& out, const Ts&... fields) {
    const char* sep = "";
    ((out << sep << fields, sep = ","), ...);
    out << "\n";
}

std::string sanitize(std::string msg) {
    for (auto& c : msg)
        if (c == ',' || c == '\n') c = ';';
    return msg;
}

struct McFlags {
    std::uint64_t samples = 2'000'000;
    std::uint64_t seed = 12345;
    int shards = 256;
    int threads = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--samples", samples, "Monte Carlo samples per probe");
        cmd->add_option("--seed", seed, "base RNG seed");
        cmd->add_option("--shards", shards, "RNG substreams (fixes the reduction order)");
        cmd->add_option("--threads", threads, "worker threads, 0 = hardware");
    }
    McOptions options() const { return {samples, seed, shards, threads}; }
};

std::string cache_dir_flagged(const std::string& flag) {
    if (!flag.empty()) return flag;
    const char* env = std::getenv("ORBFB_TAIL_CACHE");
    return env ? env : "";
}

// --- subcommand bodies ------------------------------------------------------

std::string run_iorb(const std::vector<double>& snrs) {
    std::ostringstream out;
    out << "# orbfb iorb csv v1\n";
    row(out, "snr_db", "mu", "theta_mu", "sigma_sq", "i_orb_nats", "v_orb", "capacity_nats",
        "dispersion", "error");
    for (double snr : snrs) {
        try {
            const BpskAwgnChannel ch(snr);
            const double mu = compute_mu(ch);
            const double sigma_sq = compute_sigma_sq(ch);
            const auto iv = compute_i_orb_v_orb(ch);
            const double theta = mu > 0.0 ? solve_saddlepoint_any(mu).theta
                                          : -std::numeric_limits<double>::infinity();
            const auto cd = capacity_and_dispersion(ch);
            row(out, fmt(snr), fmt(mu), fmt(theta), fmt(sigma_sq), fmt(iv.i_orb), fmt(iv.v_orb),
                fmt(cd.capacity), fmt(cd.dispersion), "");
        } catch (const std::exception& e) {
            row(out, fmt(snr), "", "", "", "", "", "", "", sanitize(e.what()));
        }
    }
    return out.str();
}

std::string run_pe_curve(double snr, int n, const std::vector<double>& rates,
                         const std::vector<std::string>& methods, const McFlags& mc,
                         const std::string& cache_dir) {
    auto ctx = BoundContext::make(std::make_shared<BpskAwgnChannel>(snr),
                                  cache_dir_flagged(cache_dir));
    std::ostringstream out;
    out << "# orbfb pe-curve csv v1\n";
    row(out, "snr_db", "n", "rate_nats", "rate_bits", "method", "epsilon", "ci", "error");

    // MC sample sets are rate-independent; build once per method
    std::unique_ptr<RcuSampleSet> rcu;
    std::unique_ptr<MlRcuSampleSet> ml;
    for (const auto& name : methods) {
        const Method method = method_from_name(name);
        for (double rate : rates) {
            try {
                const auto op = OperatingPoint::from_rate(n, rate);
                BoundEstimate est;
                switch (method) {
                    case Method::orb_rcu_mc:
                        if (!rcu)
                            rcu = std::make_unique<RcuSampleSet>(*ctx.channel,
                                                                 *ctx.tables.get(n),
                                                                 mc.options());
                        est = rcu->evaluate(op);
                        break;
                    case Method::ml_rcu_relax_mc:
                        if (!ml)
                            ml = std::make_unique<MlRcuSampleSet>(*ctx.channel, n, mc.options());
                        est = ml->evaluate(op);
                        break;
                    case Method::orb_na:
                        est.value = orb_na_epsilon(ctx.rm, op);
                        break;
                    case Method::ml_na:
                        est.value = ml_na_epsilon(ctx.cd, op);
                        break;
                    default:
                        throw std::invalid_argument("pe-curve: unsupported method " + name);
                }
                row(out, fmt(snr), fmt(n), fmt(rate), fmt(rate / std::numbers::ln2), name,
                    fmt(est.value), fmt(est.half_width), "");
            } catch (const std::exception& e) {
                row(out, fmt(snr), fmt(n), fmt(rate), fmt(rate / std::numbers::ln2), name, "", "",
                    sanitize(e.what()));
            }
        }
    }
    return out.str();
}

std::string run_rate_curve(double snr, double epsilon, const std::vector<int>& ns,
                           const std::vector<std::string>& methods, const McFlags& mc,
                           const std::string& cache_dir) {
    auto ctx = BoundContext::make(std::make_shared<BpskAwgnChannel>(snr),
                                  cache_dir_flagged(cache_dir));
    std::ostringstream out;
    out << "# orbfb rate-curve csv v1\n";
    row(out, "snr_db", "epsilon", "n", "method", "rate_nats", "rate_bits", "error");
    for (const auto& name : methods) {
        const Method method = method_from_name(name);
        for (int n : ns) {
            try {
                double rate = 0.0;
                if (method == Method::na_converse) {
                    rate = ml_na_rate(ctx.cd, n, epsilon);
                } else {
                    rate = max_rate(ctx, n, epsilon, method, mc.options()).rate_nats();
                }
                row(out, fmt(snr), fmt(epsilon), fmt(n), name, fmt(rate),
                    fmt(rate / std::numbers::ln2), "");
            } catch (const std::exception& e) {
                row(out, fmt(snr), fmt(epsilon), fmt(n), name, "", "", sanitize(e.what()));
            }
        }
    }
    return out.str();
}

std::string run_min_n(const std::vector<double>& snrs, const std::vector<double>& epsilons,
                      const std::vector<double>& fracs, const std::vector<std::string>& methods,
                      const McFlags& mc, const std::string& cache_dir) {
    // SNR and epsilon lists pair up row-wise (broadcast a singleton)
    if (snrs.size() != epsilons.size() && snrs.size() != 1 && epsilons.size() != 1)
        throw CLI::ValidationError("min-n",
                                   "--snr-db and --epsilon must have equal length (or one of "
                                   "them a single value)");
    const std::size_t rows = std::max(snrs.size(), epsilons.size());

    std::ostringstream out;
    out << "# orbfb min-n csv v1\n";
    row(out, "rate_frac", "snr_db", "epsilon", "method", "min_n", "error");
    for (double frac : fracs) {
        for (std::size_t i = 0; i < rows; ++i) {
            const double snr = snrs[snrs.size() == 1 ? 0 : i];
            const double eps = epsilons[epsilons.size() == 1 ? 0 : i];
            auto ctx = BoundContext::make(std::make_shared<BpskAwgnChannel>(snr),
                                          cache_dir_flagged(cache_dir));
            for (const auto& name : methods) {
                try {
                    const int n =
                        min_blocklength(ctx, frac, eps, method_from_name(name), mc.options());
                    row(out, fmt(frac), fmt(snr), fmt(eps), name, fmt(n), "");
                } catch (const std::exception& e) {
                    row(out, fmt(frac), fmt(snr), fmt(eps), name, "", sanitize(e.what()));
                }
            }
        }
    }
    return out.str();
}

std::string run_simulate(double snr, int n, int m, int k, int codebooks, int frames,
                         std::uint64_t max_queries, const McFlags& mc,
                         const std::string& cache_dir) {
    const auto ch = std::make_shared<BpskAwgnChannel>(snr);
    json rep;
    rep["snr_db"] = snr;
    rep["n"] = n;
    rep["seed"] = mc.seed;

    if (m > 0) {
        const auto fer = simulate_ensemble_fer(*ch, n, m, codebooks, frames, mc.seed, mc.threads);
        TailTableCache tables(cache_dir_flagged(cache_dir));
        const auto bound =
            orb_rcu(*ch, OperatingPoint::from_m(n, static_cast<std::uint64_t>(m)),
                    *tables.get(n), mc.options());
        const double se_fer = fer.half_width / 1.959963984540054;
        const double se_bound = bound.half_width / 1.959963984540054;
        const double slack = 3.0 * std::sqrt(se_fer * se_fer + se_bound * se_bound);
        rep["m"] = m;
        rep["codebooks"] = codebooks;
        rep["frames"] = fer.samples;
        rep["errors"] = static_cast<std::uint64_t>(std::llround(fer.value * fer.samples));
        rep["fer"] = fer.value;
        rep["fer_ci"] = fer.half_width;
        rep["orb_rcu"] = {{"method", method_name(bound.method)},
                          {"n", n},
                          {"M", m},
                          {"rate_nats", std::log(static_cast<double>(m)) / n},
                          {"value", bound.value},
                          {"half_width", bound.half_width},
                          {"samples", bound.samples},
                          {"seed", bound.seed}};
        rep["bound_check"] = {{"pass", fer.value <= bound.value + slack}, {"slack", slack}};
    } else {
        // random systematic code, reliability-ordered guessing walk
        Rng code_rng(mc.seed, 0xC0DE);
        const auto code = LinearCode::random_systematic(n, k, code_rng);
        Rng rng(mc.seed, 1);
        std::uint64_t errors = 0, queries_total = 0;
        std::vector<double> llrs(n);
        for (int f = 0; f < frames; ++f) {
            const std::uint64_t msg = code_rng.next_u64() & ((1ULL << k) - 1);
            const std::uint64_t word = code.encode(msg);
            for (int i = 0; i < n; ++i)
                llrs[i] = ch->llr(ch->sample(bpsk_map((word >> i) & 1ULL), rng));
            const auto res = orbgrand_decode(code, llrs, max_queries);
            queries_total += res ? res->queries : max_queries;
            errors += !(res && res->word == word);
        }
        rep["k"] = k;
        rep["max_queries"] = max_queries;
        rep["frames"] = frames;
        rep["errors"] = errors;
        rep["fer"] = static_cast<double>(errors) / frames;
        rep["avg_queries"] = static_cast<double>(queries_total) / frames;
    }
    return rep.dump(2) + "\n";
}

// --- manifest plumbing ------------------------------------------------------

json make_manifest(const std::vector<std::string>& args, const CommandResult& result,
                   double wall_s) {
    json m;
    m["command"] = args;
    m["digest"] = digest(result.output);
    m["quadrature"] = {{"abs_tol", 1e-10}, {"max_evals", 1'000'000}};
    m["samples"] = result.samples;
    m["seed"] = result.seed;
    m["version"] = std::string("orbfb ") + kVersion;
    m["wall_time_s"] = wall_s;
    return m;
}

int run_verify(const std::string& manifest_path, std::ostream& console) {
    std::ifstream in(manifest_path);
    if (!in) {
        console << "verify-manifest: cannot open " << manifest_path << "\n";
        return 2;
    }
    const json m = json::parse(in);
    const std::vector<std::string> args = m.at("command").get<std::vector<std::string>>();
    const std::string want = m.at("digest").get<std::string>();
    const auto result = execute(args);
    const std::string got = digest(result.output);
    console << "recorded " << want << "\nreplayed " << got << "\n"
            << (got == want ? "PASS" : "FAIL") << ": digests "
            << (got == want ? "match" : "differ") << "\n";
    return got == want ? 0 : 1;
}

struct ParsedCli {
    CLI::App app{"finite-blocklength ORBGRAND performance toolkit", "orbfb"};

    std::vector<double> snrs;
    std::vector<double> epsilons{1e-3};
    std::vector<double> rates;
    std::vector<double> fracs{0.8, 0.9};
    std::vector<int> ns;
    std::vector<std::string> methods{"ORB_NA"};
    int n = 0, m = 0, k = 0, codebooks = 500, frames = 2000;
    std::uint64_t max_queries = 1ULL << 20;
    double snr = 0.0, epsilon = 1e-3;
    std::string output = "-", manifest, cache_dir, verify_path;
    McFlags mc;

    CLI::App* cmd_iorb = nullptr;
    CLI::App* cmd_pe = nullptr;
    CLI::App* cmd_rate = nullptr;
    CLI::App* cmd_minn = nullptr;
    CLI::App* cmd_sim = nullptr;
    CLI::App* cmd_verify = nullptr;

    ParsedCli() {
        app.require_subcommand(1);
        app.set_version_flag("--version", std::string("orbfb ") + kVersion);

        cmd_iorb = app.add_subcommand("iorb", "single-letter coefficients per SNR");
        cmd_iorb->add_option("--snr-db", snrs, "SNR list (dB)")->required()->delimiter(',');

        cmd_pe = app.add_subcommand("pe-curve", "error-probability bounds vs rate at fixed n");
        cmd_pe->add_option("--snr-db", snr, "SNR (dB)")->required();
        cmd_pe->add_option("--n", n, "blocklength")->required();
        cmd_pe->add_option("--rates", rates, "rates in nats/use")->required()->delimiter(',');
        cmd_pe->add_option("--methods", methods, "bound methods")->delimiter(',');
        mc.attach(cmd_pe);

        cmd_rate = app.add_subcommand("rate-curve", "max rate vs blocklength at fixed epsilon");
        cmd_rate->add_option("--snr-db", snr, "SNR (dB)")->required();
        cmd_rate->add_option("--epsilon", epsilon, "target error probability")->required();
        cmd_rate->add_option("--n", ns, "blocklength list")->required()->delimiter(',');
        cmd_rate->add_option("--methods", methods, "bound methods")->delimiter(',');
        mc.attach(cmd_rate);

        cmd_minn = app.add_subcommand("min-n", "minimal blocklength for target rate fraction");
        cmd_minn->add_option("--snr-db", snrs, "SNR list (dB)")->required()->delimiter(',');
        cmd_minn->add_option("--epsilon", epsilons, "epsilon list, pairs with SNR list")
            ->delimiter(',');
        cmd_minn->add_option("--rate-frac", fracs, "fractions of capacity")->delimiter(',');
        cmd_minn->add_option("--methods", methods, "bound methods")->delimiter(',');
        mc.attach(cmd_minn);

        cmd_sim = app.add_subcommand("simulate", "decoder simulation reports");
        cmd_sim->add_option("--snr-db", snr, "SNR (dB)")->required();
        cmd_sim->add_option("--n", n, "blocklength")->required();
        auto* opt_m = cmd_sim->add_option("--m", m, "codebook size (ensemble simulation)");
        auto* opt_k = cmd_sim->add_option("--k", k, "code dimension (syndrome decoder walk)");
        opt_m->excludes(opt_k);
        opt_k->excludes(opt_m);
        cmd_sim->add_option("--codebooks", codebooks, "codebooks in the ensemble");
        cmd_sim->add_option("--frames", frames, "frames per codebook (or total with --k)");
        cmd_sim->add_option("--max-queries", max_queries, "query budget with --k");
        mc.attach(cmd_sim);

        cmd_verify = app.add_subcommand("verify-manifest", "re-run a manifest, compare digests");
        cmd_verify->add_option("manifest", verify_path, "manifest file")->required();

        for (CLI::App* c : {cmd_iorb, cmd_pe, cmd_rate, cmd_minn, cmd_sim}) {
            c->add_option("--output", output, "report path, - for stdout");
            c->add_option("--manifest", manifest, "manifest path (default <output>.manifest.json)");
            c->add_option("--cache-dir", cache_dir,
                          "tail-table cache directory (env ORBFB_TAIL_CACHE)");
        }
    }
};

}  // namespace

std::string digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CommandResult execute(const std::vector<std::string>& args) {
    ParsedCli cli;
    std::vector<const char*> argv{"orbfb"};
    for (const auto& a : args) argv.push_back(a.c_str());
    cli.app.parse(static_cast<int>(argv.size()), argv.data());

    CommandResult result;
    result.seed = cli.mc.seed;
    result.samples = cli.mc.samples;
    if (cli.cmd_iorb->parsed()) {
        result.output = run_iorb(cli.snrs);
        result.samples = 0;
    } else if (cli.cmd_pe->parsed()) {
        result.output = run_pe_curve(cli.snr, cli.n, cli.rates, cli.methods, cli.mc,
                                     cli.cache_dir);
    } else if (cli.cmd_rate->parsed()) {
        result.output = run_rate_curve(cli.snr, cli.epsilon, cli.ns, cli.methods, cli.mc,
                                       cli.cache_dir);
    } else if (cli.cmd_minn->parsed()) {
        result.output =
            run_min_n(cli.snrs, cli.epsilons, cli.fracs, cli.methods, cli.mc, cli.cache_dir);
    } else if (cli.cmd_sim->parsed()) {
        if ((cli.m > 0) == (cli.k > 0))
            throw CLI::ValidationError("simulate", "exactly one of --m / --k is required");
        result.output = run_simulate(cli.snr, cli.n, cli.m, cli.k, cli.codebooks, cli.frames,
                                     cli.max_queries, cli.mc, cli.cache_dir);
    } else {
        throw CLI::ValidationError("verify-manifest must go through run()", "");
    }
    return result;
}

int run(int argc, char** argv, std::ostream& console) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        // verify-manifest short-circuits the report pipeline
        if (!args.empty() && args[0] == "verify-manifest") {
            ParsedCli cli;
            cli.app.parse(argc, argv);
            return run_verify(cli.verify_path, console);
        }

        const auto t0 = std::chrono::steady_clock::now();
        const CommandResult result = execute(args);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        // report
        ParsedCli cli;  // reparse for the I/O flags
        cli.app.parse(argc, argv);
        if (cli.output == "-") {
            console << result.output;
        } else {
            std::ofstream f(cli.output, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + cli.output);
            f << result.output;
        }

        // manifest
        std::string manifest_path = cli.manifest;
        if (manifest_path.empty() && cli.output != "-")
            manifest_path = cli.output + ".manifest.json";
        if (!manifest_path.empty()) {
            std::ofstream f(manifest_path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + manifest_path);
            f << make_manifest(args, result, wall).dump(2) << "\n";
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        ParsedCli cli;
        return cli.app.exit(e, console, console);
    } catch (const std::exception& e) {
        console << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace orbfb::cli
