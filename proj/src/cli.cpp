#include "projcvm/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "projcvm/csv.hpp"
#include "projcvm/dependence.hpp"
#include "projcvm/errors.hpp"
#include "projcvm/experiment.hpp"
#include "projcvm/geometry.hpp"
#include "projcvm/parallel.hpp"
#include "projcvm/permutation.hpp"

namespace projcvm {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

void emit(const json& j, const std::string& format, const std::string& out_path) {
    std::string text;
    if (format == "csv") {
        std::string head, row;
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first) {
                head += ',';
                row += ',';
            }
            first = false;
            head += key;
            row += value.is_string() ? value.get<std::string>() : value.dump();
        }
        text = head + "\n" + row + "\n";
    } else {
        text = j.dump(2) + "\n";
    }
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw DataError("cannot open " + out_path + " for writing");
        out << text;
    }
}

struct TestArgs {
    std::string method, x_path, y_path, output = "json", out_path;
    int perms = 199;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    bool header = false;
    bool exact = false;
    std::optional<double> bandwidth_sq;
};

int run_test(const TestArgs& a) {
    const StatKind kind = stat_kind_from_string(a.method);
    const SampleMatrix x = read_csv(a.x_path, a.header);
    const SampleMatrix y = read_csv(a.y_path, a.header);

    PermConfig cfg;
    cfg.n_perms = a.perms;
    cfg.alpha = a.alpha;
    cfg.master_seed = a.seed;
    cfg.exact = a.exact;
    TwoSampleOptions opt;
    opt.mmd_bandwidth_sq = a.bandwidth_sq;

    const auto t0 = Clock::now();
    const PermResult res = perm_pvalue(x, y, kind, cfg, opt);
    const double elapsed = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

    json j;
    j["method"] = to_string(kind);
    j["statistic"] = res.observed;
    j["p_value"] = res.p_value;
    j["permutations"] = res.n_perms;
    j["seed"] = res.seed;
    j["m"] = x.rows();
    j["n"] = y.rows();
    j["d"] = x.cols();
    j["alpha"] = a.alpha;
    j["reject"] = res.reject;
    j["skipped_tuples"] = res.skipped_tuples;
    j["elapsed_ms"] = elapsed;
    emit(j, a.output, a.out_path);
    return kExitOk;
}

struct IndepArgs {
    std::string method, pairs_path, output = "json", out_path;
    Index p = 0;
    int perms = 199;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    bool header = false;
    Index subsample = 200000;
};

int run_indep(const IndepArgs& a) {
    const DepKind kind = dep_kind_from_string(a.method);
    const SampleMatrix all = read_csv(a.pairs_path, a.header);
    if (a.p < 1 || a.p >= all.cols()) throw DataError("indep: --p must split the columns into two nonempty blocks");
    PairedSample s;
    s.x = all.leftCols(a.p);
    s.y = all.rightCols(all.cols() - a.p);

    PermConfig cfg;
    cfg.n_perms = a.perms;
    cfg.alpha = a.alpha;
    cfg.master_seed = a.seed;
    DepConfig dep;
    dep.subsample_tuples = a.subsample;
    dep.subsample_seed = a.seed;

    const auto t0 = Clock::now();
    const PermResult res = indep_perm_test(s, kind, cfg, dep);
    const double elapsed = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

    json j;
    j["method"] = to_string(kind);
    j["statistic"] = res.observed;
    j["p_value"] = res.p_value;
    j["permutations"] = res.n_perms;
    j["seed"] = res.seed;
    j["n"] = s.x.rows();
    j["p"] = s.x.cols();
    j["q"] = s.y.cols();
    j["alpha"] = a.alpha;
    j["reject"] = res.reject;
    j["skipped_tuples"] = res.skipped_tuples;
    j["elapsed_ms"] = elapsed;
    emit(j, a.output, a.out_path);
    return kExitOk;
}

struct BenchArgs {
    std::string spec_path, out_path;
};

int run_bench(const BenchArgs& a) {
    std::ifstream in(a.spec_path);
    if (!in) throw DataError("cannot open " + a.spec_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(a.spec_path + ": " + e.what());
    }
    const ExperimentSpec spec = experiment_from_json(j);
    const PowerReport report = run_power(spec, thread_count());
    emit(power_report_to_json(report), "json", a.out_path);
    return kExitOk;
}

struct OracleArgs {
    int k = 3;
    Index d = 3;
    int trials = 100;
    Index samples = 100000;
    std::uint64_t seed = 0;
    std::string out_path;
};

// Random direction sets, closed form vs. the sphere Monte-Carlo oracle.
int run_oracle(const OracleArgs& a) {
    if (a.k < 1 || a.k > 4) throw DataError("oracle: --k must be 1..4");
    const RandomStream root(a.seed);
    int within = 0;
    double max_z = 0.0, max_err = 0.0;
    for (int t = 0; t < a.trials; ++t) {
        RandomStream trial = root.substream(static_cast<std::uint64_t>(t));
        const SampleMatrix dirs = sphere_sample(a.d, a.k, trial);
        std::vector<Vector> v;
        for (int i = 0; i < a.k; ++i) {
            v.push_back(dirs.row(i).transpose() * (0.5 + 1.5 * trial.uniform()));
        }
        double closed = 0.5;
        if (a.k == 2) closed = orthant2(v[0], v[1]);
        if (a.k == 3) closed = orthant3(v[0], v[1], v[2]);
        if (a.k == 4) closed = orthant4(v[0], v[1], v[2], v[3]);
        const McEstimate mc = mc_orthant(v, a.samples, trial);
        const double se = std::max(mc.std_error, 1.0 / static_cast<double>(a.samples));
        const double err = std::abs(closed - mc.estimate);
        const double z = err / se;
        within += z <= 3.0 ? 1 : 0;
        max_z = std::max(max_z, z);
        max_err = std::max(max_err, err);
    }
    json j;
    j["k"] = a.k;
    j["d"] = a.d;
    j["trials"] = a.trials;
    j["samples"] = a.samples;
    j["seed"] = a.seed;
    j["within_3se"] = within;
    j["fraction_within_3se"] = static_cast<double>(within) / static_cast<double>(a.trials);
    j["max_z"] = max_z;
    j["max_abs_error"] = max_err;
    emit(j, "json", a.out_path);
    return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Projection-averaged Cramer-von Mises two-sample tests and relatives"};
    app.require_subcommand(1);

    TestArgs test_args;
    double bandwidth = 0.0;
    CLI::App* test = app.add_subcommand("test", "two-sample permutation test on CSV data");
    test->add_option("--method", test_args.method, "cvm|cvm3|energy|mmd|cq|wmw|sign")->required();
    test->add_option("--x", test_args.x_path, "CSV file with the first sample")->required();
    test->add_option("--y", test_args.y_path, "CSV file with the second sample")->required();
    test->add_option("--perms", test_args.perms, "number of Monte-Carlo permutations B");
    test->add_option("--alpha", test_args.alpha, "significance level");
    test->add_option("--seed", test_args.seed, "master seed");
    test->add_flag("--header", test_args.header, "skip a header row");
    test->add_flag("--exact", test_args.exact, "enumerate all label splits (small N only)");
    CLI::Option* bw = test->add_option("--bandwidth-sq", bandwidth, "explicit MMD bandwidth sigma^2");
    test->add_option("--output", test_args.output, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    test->add_option("--out", test_args.out_path, "write the report here instead of stdout");

    IndepArgs indep_args;
    CLI::App* indep = app.add_subcommand("indep", "independence permutation test on paired CSV data");
    indep->add_option("--method", indep_args.method, "tau|bkr|taustar")->required();
    indep->add_option("--pairs", indep_args.pairs_path, "CSV file with p+q columns")->required();
    indep->add_option("--p", indep_args.p, "number of leading columns forming X")->required();
    indep->add_option("--perms", indep_args.perms, "number of Monte-Carlo permutations B");
    indep->add_option("--alpha", indep_args.alpha, "significance level");
    indep->add_option("--seed", indep_args.seed, "master seed");
    indep->add_flag("--header", indep_args.header, "skip a header row");
    indep->add_option("--subsample", indep_args.subsample, "tuple budget above the exact caps");
    indep->add_option("--output", indep_args.output, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    indep->add_option("--out", indep_args.out_path, "write the report here instead of stdout");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "run a declarative power experiment");
    bench->add_option("--spec", bench_args.spec_path, "experiment JSON file")->required();
    bench->add_option("--out", bench_args.out_path, "write the power report here");

    OracleArgs oracle_args;
    CLI::App* oracle = app.add_subcommand("oracle", "validate orthant closed forms against sphere MC");
    oracle->add_option("--k", oracle_args.k, "number of vectors (1..4)");
    oracle->add_option("--d", oracle_args.d, "dimension");
    oracle->add_option("--trials", oracle_args.trials, "number of random vector sets");
    oracle->add_option("--samples", oracle_args.samples, "Monte-Carlo directions per trial");
    oracle->add_option("--seed", oracle_args.seed, "master seed");
    oracle->add_option("--out", oracle_args.out_path, "write the report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            app.exit(e);
            return kExitOk;
        }
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*test) {
            if (bw->count() > 0) test_args.bandwidth_sq = bandwidth;
            return run_test(test_args);
        }
        if (*indep) return run_indep(indep_args);
        if (*bench) return run_bench(bench_args);
        if (*oracle) return run_oracle(oracle_args);
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace projcvm
