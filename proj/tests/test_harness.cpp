#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "projcvm/csv.hpp"
#include "projcvm/distributions.hpp"
#include "projcvm/experiment.hpp"

using namespace projcvm;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const std::string& redirect_to) {
    const std::string cmd = std::string(PROJCVM_CLI_PATH) + " " + args + " > " + redirect_to + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string strip_elapsed(std::string text) {
    static const std::regex re("\"elapsed_ms\": [0-9.eE+-]+");
    return std::regex_replace(text, re, "\"elapsed_ms\": X");
}

}  // namespace

TEST_CASE("structured covariance matrices") {
    const Matrix banded = covariance_matrix(CovStructure::Banded, 6);
    CHECK(banded(0, 0) == 1.0);
    CHECK(banded(0, 1) == 0.6);
    CHECK(banded(0, 2) == 0.3);
    CHECK(banded(0, 3) == 0.0);

    const Matrix autocov = covariance_matrix(CovStructure::Auto, 5);
    CHECK(autocov(0, 1) == doctest::Approx(0.2));
    CHECK(autocov(0, 3) == doctest::Approx(0.008));

    const Matrix block = covariance_matrix(CovStructure::Block, 10);
    CHECK(block(0, 4) == 0.2);
    CHECK(block(0, 5) == 0.0);
    CHECK(block(5, 9) == 0.2);
    CHECK_THROWS_AS(covariance_matrix(CovStructure::Block, 7), BadStructure);

    // all are positive definite at d = 10 (banded/auto checked via LLT)
    for (CovStructure s : {CovStructure::Banded, CovStructure::Auto, CovStructure::Block}) {
        const Matrix c = covariance_matrix(s, 10);
        CHECK(Eigen::LLT<Matrix>(c).info() == Eigen::Success);
    }
}

TEST_CASE("samplers: law checks and determinism") {
    {
        RandomStream rng(601);
        const Index n = 50000;
        const SampleMatrix x = sample(mv_normal(0.0), n, 2, rng);
        CHECK(std::abs(x.col(0).mean()) < 0.02);
        CHECK(std::abs(x.col(1).mean()) < 0.02);
        const Matrix c = (Matrix(x).transpose() * Matrix(x)) / static_cast<double>(n);
        CHECK(std::abs(c(0, 0) - 1.0) < 0.02);
        CHECK(std::abs(c(1, 1) - 1.0) < 0.02);
        CHECK(std::abs(c(0, 1)) < 0.02);
    }
    {
        RandomStream a(602), b(602);
        const SampleMatrix x1 = sample(mv_normal(1.0, CovStructure::Banded), 20, 6, a);
        const SampleMatrix x2 = sample(mv_normal(1.0, CovStructure::Banded), 20, 6, b);
        CHECK((x1 - x2).cwiseAbs().maxCoeff() == 0.0);
    }
    {
        // banded covariance is realized, not just declared
        RandomStream rng(603);
        const Index n = 100000;
        const SampleMatrix x = sample(mv_normal(0.0, CovStructure::Banded), n, 4, rng);
        const Matrix c = (Matrix(x).transpose() * Matrix(x)) / static_cast<double>(n);
        CHECK(std::abs(c(0, 1) - 0.6) < 0.02);
        CHECK(std::abs(c(0, 2) - 0.3) < 0.02);
        CHECK(std::abs(c(0, 3)) < 0.02);
    }
    {
        RandomStream rng(604);
        const SampleMatrix x = sample(mv_cauchy(0.0, 1.0), 100001, 1, rng);
        std::vector<double> v(x.data(), x.data() + x.size());
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        CHECK(std::abs(v[v.size() / 2]) < 0.02);
    }
    {
        // eps = 0 never touches the contaminant stream
        RandomStream a(605), b(605);
        const DistributionSpec base = mv_normal(0.0);
        const DistributionSpec mix = contaminated(mv_normal(0.0), mv_normal(0.0, CovStructure::Banded), 0.0);
        SampleMatrix direct(30, 5);
        {
            // replicate the per-row uniform the mixture would draw: none at eps = 0
            const SampleMatrix from_mix = sample(mix, 30, 5, a);
            const SampleMatrix from_base = sample(base, 30, 5, b);
            CHECK((from_mix - from_base).cwiseAbs().maxCoeff() == 0.0);
            direct = from_base;
        }
        CHECK(direct.rows() == 30);
    }
    {
        // contamination rate is honored
        RandomStream rng(606);
        const DistributionSpec mix = contaminated(mv_normal(0.0), mv_normal(100.0), 0.2);
        const SampleMatrix x = sample(mix, 20000, 1, rng);
        const double frac = (x.array() > 50.0).cast<double>().mean();
        CHECK(std::abs(frac - 0.2) < 0.015);
    }
    {
        RandomStream rng(607);
        const SampleMatrix x = sample(mv_t(0.0, 5.0), 20000, 3, rng);
        CHECK(x.allFinite());
        CHECK(std::abs(x.col(0).mean()) < 0.05);
    }
    {
        RandomStream rng(608);
        CHECK_THROWS_AS(sample(mv_normal(0.0, CovStructure::Block), 5, 7, rng), BadStructure);
        Matrix not_pd = Matrix::Identity(2, 2);
        not_pd(0, 1) = not_pd(1, 0) = 2.0;
        DistributionSpec bad = mv_normal(0.0, CovStructure::Dense);
        bad.dense_cov = not_pd;
        CHECK_THROWS_AS(sample(bad, 5, 2, rng), BadStructure);
    }
}

TEST_CASE("csv round trip and errors") {
    const std::string path = "test_io.csv";
    RandomStream rng(609);
    const SampleMatrix x = oracle::gaussian(7, 3, rng);
    write_csv(path, x);
    const SampleMatrix back = read_csv(path);
    CHECK((x - back).cwiseAbs().maxCoeff() < 1e-15);

    {
        std::ofstream out(path);
        out << "a,b\n1.5,2.5\n3.5,4.5\n";
    }
    const SampleMatrix with_header = read_csv(path, true);
    CHECK(with_header.rows() == 2);
    CHECK(with_header(1, 1) == 4.5);
    CHECK_THROWS_AS(read_csv(path, false), DataError);  // header parsed as numbers

    {
        std::ofstream out(path);
        out << "1,2\n3\n";
    }
    CHECK_THROWS_AS(read_csv(path), DataError);
    CHECK_THROWS_AS(read_csv("no_such_file.csv"), DataError);
    std::remove(path.c_str());
}

TEST_CASE("experiment json round trip") {
    ExperimentSpec spec;
    spec.x_dist = std::make_shared<DistributionSpec>(mv_normal(0.0));
    spec.y_dist = std::make_shared<DistributionSpec>(
        contaminated(mv_normal(0.5, CovStructure::Auto), mv_cauchy(0.0, 2.0), 0.05));
    spec.m = 12;
    spec.n = 10;
    spec.d = 4;
    spec.reps = 3;
    spec.n_perms = 19;
    spec.alpha = 0.1;
    spec.methods = {StatKind::CvM, StatKind::Mmd};
    spec.master_seed = 77;

    const json j = experiment_to_json(spec);
    const ExperimentSpec back = experiment_from_json(j);
    CHECK(back.m == spec.m);
    CHECK(back.n_perms == spec.n_perms);
    CHECK(back.methods == spec.methods);
    CHECK(back.y_dist->kind == DistributionSpec::Kind::Contaminated);
    CHECK(back.y_dist->contaminant->kind == DistributionSpec::Kind::MvCauchy);
    CHECK(experiment_to_json(back) == j);
}

TEST_CASE("run_power: determinism and method-set independence") {
    ExperimentSpec spec;
    spec.x_dist = std::make_shared<DistributionSpec>(mv_normal(0.0));
    spec.y_dist = std::make_shared<DistributionSpec>(mv_normal(1.5));
    spec.m = spec.n = 10;
    spec.d = 3;
    spec.reps = 40;
    spec.n_perms = 29;
    spec.methods = {StatKind::CvM, StatKind::Energy};
    spec.master_seed = 5;

    const PowerReport r1 = run_power(spec, 1);
    const PowerReport r2 = run_power(spec, 2);
    CHECK(r1.methods[0].rate == r2.methods[0].rate);
    CHECK(r1.methods[1].rate == r2.methods[1].rate);
    CHECK(r1.methods[0].rate >= 0.0);
    CHECK(r1.methods[0].rate <= 1.0);
    CHECK(r1.methods[0].std_error ==
          doctest::Approx(std::sqrt(r1.methods[0].rate * (1 - r1.methods[0].rate) / spec.reps)));

    ExperimentSpec only_cvm = spec;
    only_cvm.methods = {StatKind::CvM};
    const PowerReport r3 = run_power(only_cvm, 2);
    CHECK(r3.methods[0].rate == r1.methods[0].rate);

    // strong separation at these sizes: power should be high
    CHECK(r1.methods[0].rate > 0.5);
}

TEST_CASE("run_power holds its level under the null") {
    ExperimentSpec spec;
    spec.x_dist = std::make_shared<DistributionSpec>(mv_normal(0.0));
    spec.y_dist = spec.x_dist;
    spec.m = spec.n = 12;
    spec.d = 3;
    spec.reps = 200;
    spec.n_perms = 39;
    spec.alpha = 0.05;
    spec.methods = {StatKind::CvM};
    spec.master_seed = 31;
    const PowerReport r = run_power(spec, 2);
    const double se = std::sqrt(0.05 * 0.95 / spec.reps);
    CHECK(std::abs(r.methods[0].rate - 0.05) <= 2.0 * se + 1e-12);
}

TEST_CASE("cli: test subcommand and determinism") {
    RandomStream rng(610);
    const SampleMatrix x = oracle::gaussian(12, 3, rng);
    SampleMatrix y = oracle::gaussian(12, 3, rng);
    y.array() += 1.0;
    write_csv("cli_x.csv", x);
    write_csv("cli_y.csv", y);

    CHECK(run_cli("test --method cvm --x cli_x.csv --y cli_y.csv --perms 99 --seed 7", "cli_out1.json") == 0);
    CHECK(run_cli("test --method cvm --x cli_x.csv --y cli_y.csv --perms 99 --seed 7", "cli_out2.json") == 0);
    const std::string a = slurp("cli_out1.json");
    const std::string b = slurp("cli_out2.json");
    CHECK(strip_elapsed(a) == strip_elapsed(b));

    const json j = json::parse(a);
    CHECK(j["method"] == "cvm");
    CHECK(j["m"] == 12);
    CHECK(j["n"] == 12);
    CHECK(j["d"] == 3);
    CHECK(j["permutations"] == 99);
    CHECK(j["p_value"].get<double>() > 0.0);
    CHECK(j["p_value"].get<double>() <= 1.0);
    CHECK(j.contains("skipped_tuples"));
    CHECK(j.contains("elapsed_ms"));
    CHECK(j["reject"].is_boolean());

    for (const char* method : {"energy", "mmd", "cq", "wmw", "sign", "cvm3"}) {
        CHECK(run_cli(std::string("test --method ") + method +
                          " --x cli_x.csv --y cli_y.csv --perms 19 --seed 3",
                      "cli_m.json") == 0);
    }

    CHECK(run_cli("test --method cvm --x missing.csv --y cli_y.csv", "cli_err.txt") == 3);
    CHECK(run_cli("test --method nope --x cli_x.csv --y cli_y.csv", "cli_err.txt") == 2);
    CHECK(run_cli("test --x cli_x.csv --y cli_y.csv", "cli_err.txt") == 2);

    // csv output: two lines, header then row
    CHECK(run_cli("test --method cvm --x cli_x.csv --y cli_y.csv --perms 19 --seed 1 --output csv",
                  "cli_out.csv") == 0);
    const std::string csv = slurp("cli_out.csv");
    CHECK(csv.find("method") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

    std::remove("cli_x.csv");
    std::remove("cli_y.csv");
    std::remove("cli_out1.json");
    std::remove("cli_out2.json");
    std::remove("cli_m.json");
    std::remove("cli_out.csv");
    std::remove("cli_err.txt");
}

TEST_CASE("cli: indep, bench and oracle subcommands") {
    RandomStream rng(611);
    SampleMatrix pairs(20, 3);
    pairs.leftCols(2) = oracle::gaussian(20, 2, rng);
    pairs.col(2) = pairs.col(0) + 0.5 * oracle::gaussian(20, 1, rng).col(0);
    write_csv("cli_pairs.csv", pairs);
    CHECK(run_cli("indep --method taustar --pairs cli_pairs.csv --p 2 --perms 29 --seed 2",
                  "cli_indep.json") == 0);
    const json ji = json::parse(slurp("cli_indep.json"));
    CHECK(ji["p"] == 2);
    CHECK(ji["q"] == 1);
    CHECK(ji["p_value"].get<double>() <= 1.0);

    {
        std::ofstream out("cli_spec.json");
        out << R"({"x_dist":{"kind":"mv_normal","mean":0.0,"cov":"identity"},
                   "y_dist":{"kind":"mv_normal","mean":1.0,"cov":"identity"},
                   "m":10,"n":10,"d":2,"reps":10,"B":19,"alpha":0.05,
                   "methods":["cvm","energy"],"master_seed":3})";
    }
    CHECK(run_cli("bench --spec cli_spec.json --out cli_bench.json", "cli_bench_log.txt") == 0);
    const json jb = json::parse(slurp("cli_bench.json"));
    CHECK(jb["config"]["m"] == 10);
    CHECK(jb["methods"].size() == 2);
    const double rate = jb["methods"][0]["rate"].get<double>();
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);

    CHECK(run_cli("oracle --k 3 --d 4 --trials 20 --samples 20000 --seed 5", "cli_oracle.json") == 0);
    const json jo = json::parse(slurp("cli_oracle.json"));
    CHECK(jo["trials"] == 20);
    CHECK(jo["fraction_within_3se"].get<double>() >= 0.9);

    std::remove("cli_pairs.csv");
    std::remove("cli_indep.json");
    std::remove("cli_spec.json");
    std::remove("cli_bench.json");
    std::remove("cli_bench_log.txt");
    std::remove("cli_oracle.json");
}
