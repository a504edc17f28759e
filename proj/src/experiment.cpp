#include "projcvm/experiment.hpp"

#include <chrono>

#include "projcvm/errors.hpp"
#include "projcvm/parallel.hpp"

namespace projcvm {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void validate(const ExperimentSpec& spec) {
    if (!spec.x_dist || !spec.y_dist) throw InvalidConfig("experiment: missing distribution");
    if (spec.m < 2 || spec.n < 2 || spec.d < 1) throw InvalidConfig("experiment: need m, n >= 2 and d >= 1");
    if (spec.reps < 1) throw InvalidConfig("experiment: need reps >= 1");
    if (spec.n_perms < 1) throw InvalidConfig("experiment: need B >= 1");
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw InvalidConfig("experiment: alpha must be in (0, 1)");
    if (spec.methods.empty()) throw InvalidConfig("experiment: no methods requested");
    for (StatKind k : spec.methods) {
        if (k == StatKind::CvMLinear || k == StatKind::SignProj) {
            if (spec.m != spec.n) throw InvalidConfig("experiment: paired methods need m = n");
        }
    }
}

}  // namespace

PowerReport run_power(const ExperimentSpec& spec, int threads) {
    validate(spec);
    const std::size_t n_methods = spec.methods.size();
    const Index N = spec.m + spec.n;
    const RandomStream root(spec.master_seed);

    std::vector<std::vector<std::uint8_t>> rejected(n_methods,
                                                    std::vector<std::uint8_t>(static_cast<std::size_t>(spec.reps), 0));
    std::vector<std::vector<double>> elapsed(n_methods, std::vector<double>(static_cast<std::size_t>(spec.reps), 0.0));

    parallel_chunks(spec.reps, threads, [&](Index, Index lo, Index hi) {
        std::vector<Index> identity(static_cast<std::size_t>(N));
        for (Index i = 0; i < N; ++i) identity[static_cast<std::size_t>(i)] = i;
        std::vector<Index> assignment;
        std::vector<std::int64_t> ge(n_methods);
        std::vector<double> observed(n_methods);

        for (Index rep = lo; rep < hi; ++rep) {
            const RandomStream rep_stream = root.substream(static_cast<std::uint64_t>(rep));
            RandomStream x_stream = rep_stream.substream(0);
            RandomStream y_stream = rep_stream.substream(1);
            const SampleMatrix x = sample(*spec.x_dist, spec.m, spec.d, x_stream);
            const SampleMatrix y = sample(*spec.y_dist, spec.n, spec.d, y_stream);

            const PooledData pd(x, y);
            TwoSampleOptions opt;
            opt.threads = 1;
            for (StatKind k : spec.methods) {
                if (k == StatKind::Mmd) {
                    opt.mmd_bandwidth_sq = median_heuristic_bandwidth_sq(pd);
                    break;
                }
            }

            auto eval_one = [&](StatKind kind, std::span<const Index> xs, std::span<const Index> ys,
                                std::uint64_t eval_index) {
                if (kind == StatKind::CvMLinear) {
                    RandomStream block = rep_stream.substream(0x20000000ull + eval_index);
                    return l_cvm_indexed(pd, xs, ys, block).value;
                }
                return eval_two_sample(kind, pd, xs, ys, opt).value;
            };

            const std::span<const Index> xs_obs(identity.data(), static_cast<std::size_t>(spec.m));
            const std::span<const Index> ys_obs(identity.data() + spec.m, static_cast<std::size_t>(spec.n));
            for (std::size_t k = 0; k < n_methods; ++k) {
                const auto t0 = Clock::now();
                observed[k] = eval_one(spec.methods[k], xs_obs, ys_obs, 0);
                elapsed[k][static_cast<std::size_t>(rep)] = ms_since(t0);
                ge[k] = 0;
            }

            // One permutation stream per b, identical for every method.
            for (int b = 1; b <= spec.n_perms; ++b) {
                RandomStream perm_stream = rep_stream.substream(2 + static_cast<std::uint64_t>(b));
                assignment = identity;
                perm_stream.shuffle(assignment);
                const std::span<const Index> xs(assignment.data(), static_cast<std::size_t>(spec.m));
                const std::span<const Index> ys(assignment.data() + spec.m, static_cast<std::size_t>(spec.n));
                for (std::size_t k = 0; k < n_methods; ++k) {
                    const auto t0 = Clock::now();
                    const double v = eval_one(spec.methods[k], xs, ys, static_cast<std::uint64_t>(b));
                    elapsed[k][static_cast<std::size_t>(rep)] += ms_since(t0);
                    if (v >= observed[k]) ++ge[k];
                }
            }

            for (std::size_t k = 0; k < n_methods; ++k) {
                const double p = static_cast<double>(ge[k] + 1) / static_cast<double>(spec.n_perms + 1);
                rejected[k][static_cast<std::size_t>(rep)] = p <= spec.alpha ? 1 : 0;
            }
        }
    });

    PowerReport report;
    report.spec = spec;
    for (std::size_t k = 0; k < n_methods; ++k) {
        MethodPower mp;
        mp.method = spec.methods[k];
        std::int64_t hits = 0;
        double ms = 0.0;
        for (Index rep = 0; rep < spec.reps; ++rep) {
            hits += rejected[k][static_cast<std::size_t>(rep)];
            ms += elapsed[k][static_cast<std::size_t>(rep)];
        }
        mp.rate = static_cast<double>(hits) / static_cast<double>(spec.reps);
        mp.std_error = std::sqrt(mp.rate * (1.0 - mp.rate) / static_cast<double>(spec.reps));
        mp.mean_ms = ms / static_cast<double>(spec.reps);
        report.methods.push_back(mp);
    }
    return report;
}

nlohmann::json distribution_to_json(const DistributionSpec& d) {
    using Kind = DistributionSpec::Kind;
    nlohmann::json j;
    switch (d.kind) {
        case Kind::MvNormal:
        case Kind::MvT: {
            j["kind"] = d.kind == Kind::MvNormal ? "mv_normal" : "mv_t";
            if (d.mean) {
                j["mean"] = std::vector<double>(d.mean->data(), d.mean->data() + d.mean->size());
            } else {
                j["mean"] = d.mean_fill;
            }
            if (d.cov == CovStructure::Dense) {
                std::vector<std::vector<double>> rows;
                for (Index r = 0; r < d.dense_cov.rows(); ++r) {
                    rows.emplace_back(d.dense_cov.row(r).begin(), d.dense_cov.row(r).end());
                }
                j["cov"] = nlohmann::json{{"dense", rows}};
            } else {
                j["cov"] = to_string(d.cov);
            }
            if (d.kind == Kind::MvT) j["df"] = d.df;
            break;
        }
        case Kind::MvCauchy:
            j["kind"] = "mv_cauchy";
            j["gamma"] = d.gamma;
            j["s"] = d.s;
            break;
        case Kind::Contaminated:
            j["kind"] = "contaminated";
            j["base"] = distribution_to_json(*d.base);
            j["contaminant"] = distribution_to_json(*d.contaminant);
            j["eps"] = d.eps;
            break;
    }
    return j;
}

std::shared_ptr<const DistributionSpec> distribution_from_json(const nlohmann::json& j) {
    auto d = std::make_shared<DistributionSpec>();
    const std::string kind = j.at("kind").get<std::string>();
    auto parse_mean = [&] {
        if (!j.contains("mean")) return;
        if (j["mean"].is_number()) {
            d->mean_fill = j["mean"].get<double>();
        } else {
            const auto v = j["mean"].get<std::vector<double>>();
            d->mean = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
        }
    };
    auto parse_cov = [&] {
        if (!j.contains("cov")) return;
        if (j["cov"].is_string()) {
            d->cov = cov_structure_from_string(j["cov"].get<std::string>());
        } else {
            d->cov = CovStructure::Dense;
            const auto rows = j["cov"].at("dense").get<std::vector<std::vector<double>>>();
            const auto r = static_cast<Index>(rows.size());
            d->dense_cov.resize(r, r);
            for (Index i = 0; i < r; ++i) {
                if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != r) {
                    throw BadStructure("dense covariance is not square");
                }
                for (Index c = 0; c < r; ++c) d->dense_cov(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            }
        }
    };
    if (kind == "mv_normal") {
        d->kind = DistributionSpec::Kind::MvNormal;
        parse_mean();
        parse_cov();
    } else if (kind == "mv_t") {
        d->kind = DistributionSpec::Kind::MvT;
        parse_mean();
        parse_cov();
        d->df = j.at("df").get<double>();
    } else if (kind == "mv_cauchy") {
        d->kind = DistributionSpec::Kind::MvCauchy;
        d->gamma = j.value("gamma", 0.0);
        d->s = j.value("s", 1.0);
    } else if (kind == "contaminated") {
        d->kind = DistributionSpec::Kind::Contaminated;
        d->base = distribution_from_json(j.at("base"));
        d->contaminant = distribution_from_json(j.at("contaminant"));
        d->eps = j.at("eps").get<double>();
    } else {
        throw InvalidConfig("unknown distribution kind: " + kind);
    }
    return d;
}

nlohmann::json experiment_to_json(const ExperimentSpec& spec) {
    nlohmann::json j;
    j["x_dist"] = distribution_to_json(*spec.x_dist);
    j["y_dist"] = distribution_to_json(*spec.y_dist);
    j["m"] = spec.m;
    j["n"] = spec.n;
    j["d"] = spec.d;
    j["reps"] = spec.reps;
    j["B"] = spec.n_perms;
    j["alpha"] = spec.alpha;
    std::vector<std::string> methods;
    methods.reserve(spec.methods.size());
    for (StatKind k : spec.methods) methods.emplace_back(to_string(k));
    j["methods"] = methods;
    j["master_seed"] = spec.master_seed;
    return j;
}

ExperimentSpec experiment_from_json(const nlohmann::json& j) {
    ExperimentSpec spec;
    spec.x_dist = distribution_from_json(j.at("x_dist"));
    spec.y_dist = distribution_from_json(j.at("y_dist"));
    spec.m = j.at("m").get<Index>();
    spec.n = j.at("n").get<Index>();
    spec.d = j.at("d").get<Index>();
    spec.reps = j.at("reps").get<int>();
    spec.n_perms = j.at("B").get<int>();
    spec.alpha = j.value("alpha", 0.05);
    for (const auto& name : j.at("methods")) {
        spec.methods.push_back(stat_kind_from_string(name.get<std::string>()));
    }
    spec.master_seed = j.value("master_seed", std::uint64_t{0});
    return spec;
}

nlohmann::json power_report_to_json(const PowerReport& report) {
    nlohmann::json j;
    j["config"] = experiment_to_json(report.spec);
    nlohmann::json methods = nlohmann::json::array();
    for (const MethodPower& mp : report.methods) {
        methods.push_back({{"method", to_string(mp.method)},
                           {"rate", mp.rate},
                           {"std_error", mp.std_error},
                           {"mean_ms_per_test", mp.mean_ms}});
    }
    j["methods"] = methods;
    return j;
}

}  // namespace projcvm
