#include "qaml/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "qaml/attacks.hpp"
#include "qaml/chaos.hpp"
#include "qaml/circuits.hpp"
#include "qaml/classifier.hpp"
#include "qaml/clifford.hpp"
#include "qaml/data.hpp"
#include "qaml/encodings.hpp"
#include "qaml/linalg.hpp"
#include "qaml/mps.hpp"
#include "qaml/rng.hpp"

namespace qaml {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

json resolve_config(const std::string& sub, const json& given, const json& defaults) {
    if (!given.is_null() && !given.is_object())
        throw ConfigError(sub + ": config must be a JSON object");
    json out = defaults;
    if (given.is_object()) {
        for (auto it = given.begin(); it != given.end(); ++it) {
            if (!defaults.contains(it.key()))
                throw ConfigError(sub + ": unknown config key \"" + it.key() + "\"");
            const json& d = defaults.at(it.key());
            const json& v = it.value();
            const bool ok = (d.is_number() && v.is_number()) || (d.is_string() && v.is_string()) ||
                            (d.is_array() && v.is_array()) || (d.is_boolean() && v.is_boolean());
            if (!ok)
                throw ConfigError(sub + ": config key \"" + it.key() + "\" has the wrong type");
            out[it.key()] = v;
        }
    }
    return out;
}

template <typename T>
T cfg(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key \"") + key + "\" has the wrong element type");
    }
}

int cfg_positive_int(const json& j, const char* key) {
    int v = cfg<int>(j, key);
    if (v < 1) throw ConfigError(std::string("config key \"") + key + "\" must be positive");
    return v;
}

std::string blank() { return std::string(); }

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / double(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size() - 1));
}

double tail_mean(const std::vector<double>& v, std::size_t count) {
    if (v.empty()) return 0.0;
    std::size_t take = std::min(count, v.size());
    double s = 0.0;
    for (std::size_t i = v.size() - take; i < v.size(); ++i) s += v[i];
    return s / double(take);
}

// ---------------------------------------------------------------- weak-scaling

RunResult run_weak_scaling(const json& given, std::uint64_t seed, int threads) {
    const json defaults = {
        {"encoding", "all"},
        {"sizes", {4, 8, 16}},
        {"amplitude_sizes", {8, 512}},
        {"trials", 20},
        {"eps_grid", {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}},
    };
    RunResult res;
    res.subcommand = "weak-scaling";
    res.resolved_config = resolve_config(res.subcommand, given, defaults);
    const json& c = res.resolved_config;

    const std::string enc_name = cfg<std::string>(c, "encoding");
    if (enc_name != "all" && enc_name != "amplitude" && enc_name != "angle" && enc_name != "dense")
        throw ConfigError("weak-scaling: encoding must be amplitude|angle|dense|all");
    const std::vector<int> sizes = cfg<std::vector<int>>(c, "sizes");
    const std::vector<int> amp_sizes = cfg<std::vector<int>>(c, "amplitude_sizes");
    const int trials = cfg_positive_int(c, "trials");
    const std::vector<double> grid = cfg<std::vector<double>>(c, "eps_grid");
    if (grid.empty()) throw ConfigError("weak-scaling: eps_grid must not be empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] <= 0.0) throw ConfigError("weak-scaling: eps_grid entries must be positive");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw ConfigError("weak-scaling: eps_grid must be strictly increasing");
    }
    for (int s : sizes)
        if (s < 1) throw ConfigError("weak-scaling: sizes must be positive");
    for (int s : amp_sizes)
        if (s < 2) throw ConfigError("weak-scaling: amplitude_sizes must be at least 2");

    struct Task {
        Encoding enc;
        int n = 0;
        int trial = 0;
    };
    std::vector<Task> tasks;
    const bool all = enc_name == "all";
    if (all || enc_name == "angle")
        for (int n : sizes)
            for (int t = 0; t < trials; ++t) tasks.push_back({Encoding::kAngle, n, t});
    if (all || enc_name == "dense")
        for (int n : sizes) {
            if (n % 2 != 0)
                throw ConfigError("weak-scaling: dense encoding needs even feature sizes");
            for (int t = 0; t < trials; ++t) tasks.push_back({Encoding::kDense, n, t});
        }
    if (all || enc_name == "amplitude")
        for (int n : amp_sizes)
            for (int t = 0; t < trials; ++t) tasks.push_back({Encoding::kAmplitude, n, t});

    res.table.header = {"encoding", "n_features", "trial",      "eps",        "shift",
                        "fitted_c", "expected_c", "rel_err",    "ball_check", "wall_time_ms"};

    struct TaskOut {
        std::vector<std::vector<std::string>> rows;
        double fitted = 0.0;
    };
    std::vector<TaskOut> outs(tasks.size());
    RngStream root(seed);

    parallel_for(int(tasks.size()), threads, [&](int ti) {
        const Task& task = tasks[std::size_t(ti)];
        auto start = Clock::now();
        RngStream rng = root.child(std::uint64_t(ti));
        Eigen::VectorXd x(task.n), w(task.n);
        double expected = 0.0;
        if (task.enc == Encoding::kAmplitude) {
            // The (||x||, angle-to-w) geometry is drawn per trial, independent
            // of n, so the fitted coefficient is directly comparable across
            // feature counts.
            RngStream geom = root.child((1ull << 32) + std::uint64_t(task.trial));
            double r = geom.uniform(0.5, 2.0);
            x.setZero();
            x[0] = r;
            w.setZero();
            w[1 + int(rng.uniform_index(std::uint64_t(task.n - 1)))] = 1.0;
            expected = amplitude_shift_coefficient(x, w);
        } else {
            for (int i = 0; i < task.n; ++i) {
                x[i] = rng.uniform(0.0, kDefaultAngleRange);
                w[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
            }
            expected = task.enc == Encoding::kAngle ? angle_shift_coefficient(w)
                                                    : dense_shift_coefficient(x, w);
        }
        ShiftFit fit = measure_state_shift(task.enc, x, w, grid);
        double rel = std::abs(fit.coefficient - expected) / expected;
        double wall = ms_since(start);
        TaskOut& out = outs[std::size_t(ti)];
        out.fitted = fit.coefficient;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            bool ball_ok = fit.shift[g] <= expected * grid[g] * 1.05 + 1e-12;
            out.rows.push_back({encoding_name(task.enc), format_int(task.n),
                                format_int(task.trial), format_double(grid[g]),
                                format_double(fit.shift[g]), format_double(fit.coefficient),
                                format_double(expected), format_double(rel),
                                ball_ok ? "pass" : "fail", format_double(wall)});
        }
    });

    std::map<std::string, std::vector<double>> fitted_by_config;
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        for (auto& row : outs[ti].rows) res.table.add_row(std::move(row));
        fitted_by_config[encoding_name(tasks[ti].enc) + "_" + std::to_string(tasks[ti].n)]
            .push_back(outs[ti].fitted);
    }
    json fitted_means = json::object();
    for (const auto& [key, values] : fitted_by_config) fitted_means[key] = mean_of(values);
    res.summary = {{"mean_fitted_coefficient", fitted_means}};
    return res;
}

// ----------------------------------------------------------------- otoc-bound

RunResult run_otoc_bound(const json& given, std::uint64_t seed, int threads) {
    const json defaults = {
        {"n", 6},
        {"depths", {0, 1, 2, 4}},
        {"w_kinds", {"commuting", "local", "scrambled"}},
        {"delta", 0.5},
        {"trials", 10000},
        {"k_measured", 1},
    };
    RunResult res;
    res.subcommand = "otoc-bound";
    res.resolved_config = resolve_config(res.subcommand, given, defaults);
    const json& c = res.resolved_config;

    const int n = cfg_positive_int(c, "n");
    if (n < 2 || n > 10) throw ConfigError("otoc-bound: n must be in [2, 10]");
    const std::vector<int> depths = cfg<std::vector<int>>(c, "depths");
    for (int d : depths)
        if (d < 0) throw ConfigError("otoc-bound: depths must be non-negative");
    const std::vector<std::string> kinds = cfg<std::vector<std::string>>(c, "w_kinds");
    for (const auto& k : kinds)
        if (k != "commuting" && k != "local" && k != "scrambled")
            throw ConfigError("otoc-bound: w_kinds entries must be commuting|local|scrambled");
    if (depths.empty() || kinds.empty())
        throw ConfigError("otoc-bound: depths and w_kinds must not be empty");
    const double delta = cfg<double>(c, "delta");
    if (delta <= 0.0) throw ConfigError("otoc-bound: delta must be positive");
    const int trials = cfg_positive_int(c, "trials");
    if (trials < 2) throw ConfigError("otoc-bound: trials must be at least 2");
    const int k_measured = cfg_positive_int(c, "k_measured");
    if (k_measured > n) throw ConfigError("otoc-bound: k_measured must be <= n");

    res.table.header = {"depth",  "w_kind",           "otoc",
                        "delta",  "empirical_prob",   "bound",
                        "pass",   "predicted_variance", "sample_variance",
                        "fourth_moment", "wall_time_ms"};

    const int tasks = int(depths.size() * kinds.size());
    std::vector<std::vector<std::string>> rows(static_cast<std::size_t>(tasks));
    std::atomic<int> fails{0};
    RngStream root(seed);
    const Eigen::Index dim = Eigen::Index(1) << n;
    const DenseOperator z = measured_z_operator(n, k_measured);

    parallel_for(tasks, threads, [&](int ti) {
        auto start = Clock::now();
        const int depth = depths[std::size_t(ti) / kinds.size()];
        const std::string& kind = kinds[std::size_t(ti) % kinds.size()];
        RngStream rng = root.child(std::uint64_t(ti));
        ParamCircuit circ = build_brickwork(n, depth, rng);
        DenseOperator u = compile(circ, Eigen::VectorXd());
        DenseOperator w;
        if (kind == "commuting") {
            StateVector phases(dim);
            for (Eigen::Index i = 0; i < dim; ++i) {
                double phi = rng.uniform(0.0, 2.0 * M_PI);
                phases[i] = Complex(std::cos(phi), std::sin(phi));
            }
            w = u.adjoint() * phases.asDiagonal() * u;
        } else if (kind == "local") {
            w = kron(identity_op(dim / 2), haar_unitary(2, rng));
        } else {
            w = haar_unitary(dim, rng);
        }
        OtocBoundCheck check = verify_otoc_bound(u, w, z, delta, trials, rng);
        double commutator = otoc(u, w, z);
        double pb = std::min(check.bound, 1.0);
        double slack = 4.0 * std::sqrt(pb * std::max(1.0 - pb, 0.0) / trials) + 4.0 / trials;
        bool pass = check.empirical_prob <= pb + slack;
        if (!pass) fails.fetch_add(1);
        rows[std::size_t(ti)] = {format_int(depth),
                                 kind,
                                 format_double(commutator),
                                 format_double(delta),
                                 format_double(check.empirical_prob),
                                 format_double(check.bound),
                                 pass ? "pass" : "fail",
                                 format_double(check.predicted_variance),
                                 format_double(check.sample_variance),
                                 format_double(check.fourth_moment),
                                 format_double(ms_since(start))};
    });

    for (auto& row : rows) res.table.add_row(std::move(row));
    res.summary = {{"configurations", tasks}, {"bound_violations", fails.load()}};
    return res;
}

// ----------------------------------------------------------------- loe-growth

RunResult run_loe_growth(const json& given, std::uint64_t seed, int threads) {
    const json defaults = {
        {"sizes", {4, 6, 8}}, {"max_layers", 12}, {"samples", 8},
        {"family", "hw-efficient"}, {"k_measured", 1}, {"fit_layers", 3},
    };
    RunResult res;
    res.subcommand = "loe-growth";
    res.resolved_config = resolve_config(res.subcommand, given, defaults);
    const json& c = res.resolved_config;

    const std::vector<int> sizes = cfg<std::vector<int>>(c, "sizes");
    if (sizes.empty()) throw ConfigError("loe-growth: sizes must not be empty");
    for (int n : sizes)
        if (n < 2 || n > 10) throw ConfigError("loe-growth: sizes must be in [2, 10]");
    const int max_layers = cfg_positive_int(c, "max_layers");
    const int samples = cfg_positive_int(c, "samples");
    const int fit_layers = cfg_positive_int(c, "fit_layers");
    const int k_measured = cfg_positive_int(c, "k_measured");
    const std::string family_name = cfg<std::string>(c, "family");
    CircuitFamily family;
    if (family_name == "hw-efficient")
        family = CircuitFamily::kHwEfficient;
    else if (family_name == "brickwork")
        family = CircuitFamily::kBrickwork;
    else
        throw ConfigError("loe-growth: family must be hw-efficient|brickwork");

    res.table.header = {"family", "n_qubits", "layers", "mean_s2", "std_s2", "wall_time_ms"};

    struct SizeOut {
        std::vector<LoeGrowthRow> curve;
        double wall = 0.0;
    };
    std::vector<SizeOut> outs(sizes.size());
    RngStream root(seed);
    parallel_for(int(sizes.size()), threads, [&](int si) {
        auto start = Clock::now();
        const int n = sizes[std::size_t(si)];
        if (k_measured > n) throw ConfigError("loe-growth: k_measured must be <= every size");
        RngStream rng = root.child(std::uint64_t(si));
        outs[std::size_t(si)].curve =
            loe_growth_curve(family, n, max_layers, samples, k_measured, rng);
        outs[std::size_t(si)].wall = ms_since(start);
    });

    json slopes = json::object();
    json plateaus = json::object();
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const auto& curve = outs[si].curve;
        for (const auto& row : curve)
            res.table.add_row({family_name, format_int(sizes[si]), format_int(row.layers),
                               format_double(row.mean_s2), format_double(row.std_s2),
                               format_double(outs[si].wall)});
        // Least-squares slope of the first fit_layers points, and the mean of
        // the last three as the plateau estimate.
        int m = std::min<int>(fit_layers, int(curve.size()));
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < m; ++i) {
            double lx = curve[std::size_t(i)].layers, ly = curve[std::size_t(i)].mean_s2;
            sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
        }
        double slope = m > 1 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
        std::vector<double> tail;
        for (std::size_t i = curve.size() >= 3 ? curve.size() - 3 : 0; i < curve.size(); ++i)
            tail.push_back(curve[i].mean_s2);
        std::string key = std::to_string(sizes[si]);
        slopes[key] = slope;
        plateaus[key] = mean_of(tail);
    }
    res.summary = {{"early_slope", slopes}, {"plateau_mean_s2", plateaus}};
    return res;
}

// ------------------------------------------------------------ approx-universal

RunResult run_approx_universal(const json& given, std::uint64_t seed, int threads) {
    const json defaults = {
        {"n", 6},
        {"circuits", 10},
        {"attacks", 5},
        {"trials", 2000},
        {"k_measured", 1},
        {"eps_grid", {0.0, 0.05, 0.1, 0.15, 0.17677669529663687, 0.2, 0.3, 0.5, 1.0}},
    };
    RunResult res;
    res.subcommand = "approx-universal";
    res.resolved_config = resolve_config(res.subcommand, given, defaults);
    const json& c = res.resolved_config;

    const int n = cfg_positive_int(c, "n");
    if (n < 1 || n > 10) throw ConfigError("approx-universal: n must be in [1, 10]");
    const int circuits = cfg_positive_int(c, "circuits");
    const int attacks = cfg_positive_int(c, "attacks");
    const int trials = cfg_positive_int(c, "trials");
    const int k_measured = cfg_positive_int(c, "k_measured");
    if (k_measured > n) throw ConfigError("approx-universal: k_measured must be <= n");
    const std::vector<double> grid = cfg<std::vector<double>>(c, "eps_grid");
    if (grid.empty()) throw ConfigError("approx-universal: eps_grid must not be empty");
    for (double e : grid)
        if (e < 0.0 || e > 2.0)
            throw ConfigError("approx-universal: eps_grid entries must be in [0, 2]");

    const Eigen::Index dim = Eigen::Index(1) << n;
    const double sqrt_d = std::sqrt(double(dim));
    RngStream root(seed);

    std::vector<DenseOperator> zu(static_cast<std::size_t>(circuits)), wuniv(static_cast<std::size_t>(circuits));
    const DenseOperator z = measured_z_operator(n, k_measured);
    for (int ci = 0; ci < circuits; ++ci) {
        RngStream rng = root.child(std::uint64_t(ci));
        DenseOperator u = haar_unitary(dim, rng);
        zu[std::size_t(ci)] = u.adjoint() * z * u;
        wuniv[std::size_t(ci)] = build_exact_universal(u, k_measured).w;
    }

    struct PairOut {
        double success = 0.0, one = 0.0, two = 0.0, wall = 0.0;
    };
    const int pairs = circuits * attacks;
    std::vector<PairOut> outs(std::size_t(grid.size()) * std::size_t(pairs));
    parallel_for(int(outs.size()), threads, [&](int ti) {
        auto start = Clock::now();
        const std::size_t e = std::size_t(ti) / std::size_t(pairs);
        const std::size_t ci = (std::size_t(ti) % std::size_t(pairs)) / std::size_t(attacks);
        RngStream builder = root.child((1ull << 32) + std::uint64_t(ti));
        UniversalAttack attack = build_approx_universal(wuniv[ci], grid[e], builder);
        std::uint64_t eval_seed = root.child((1ull << 33) + std::uint64_t(ti)).next_u64();
        AttackReport rep =
            success_fraction(attack, zu[ci], StateSource::kHaar, trials, eval_seed);

        DenseOperator pd = attack.generator->materialize();
        DenseOperator comm = pd * zu[ci] - zu[ci] * pd;
        DenseOperator shift = comm + wuniv[ci].adjoint() * comm * wuniv[ci];
        PairOut& out = outs[std::size_t(ti)];
        out.success = rep.success_fraction;
        out.one = 1.0 - std::atan(grid[e] * comm.norm() / sqrt_d) / M_PI;
        out.two = 1.0 - std::atan(attack.angle * shift.norm() / sqrt_d) / M_PI;
        out.wall = ms_since(start);
    });

    res.table.header = {"eps",      "eps_sqrt_d",        "mean_success",
                        "std_success", "analytic_one_term", "analytic_two_term",
                        "circuits", "attacks",           "trials",
                        "wall_time_ms"};
    json curve = json::array();
    for (std::size_t e = 0; e < grid.size(); ++e) {
        std::vector<double> success, one, two;
        double wall = 0.0;
        for (int p = 0; p < pairs; ++p) {
            const PairOut& o = outs[e * std::size_t(pairs) + std::size_t(p)];
            success.push_back(o.success);
            one.push_back(o.one);
            two.push_back(o.two);
            wall += o.wall;
        }
        res.table.add_row({format_double(grid[e]), format_double(grid[e] * sqrt_d),
                           format_double(mean_of(success)), format_double(sample_std(success)),
                           format_double(mean_of(one)), format_double(mean_of(two)),
                           format_int(circuits), format_int(attacks), format_int(trials),
                           format_double(wall)});
        curve.push_back({{"eps", grid[e]}, {"mean_success", mean_of(success)}});
    }
    res.summary = {{"curve", curve}};
    return res;
}

// ------------------------------------------------------------- train-adversary

RunResult run_train_adversary(const json& given, std::uint64_t seed, int threads) {
    const json defaults = {
        {"mode", "random"},
        {"n", 6},
        {"depths", {1, 4, 12, 24, 34}},
        {"repetitions", 3},
        {"train_states", 1024},
        {"test_states", 256},
        {"epochs", 1},
        {"batch_size", 32},
        {"learning_rate", 0.01},
        {"k_measured", 1},
        {"train_images", ""},
        {"train_labels", ""},
        {"test_images", ""},
        {"test_labels", ""},
        {"pca_components", 4},
        {"train_limit", 2000},
        {"test_limit", 500},
        {"classifier_layers", {2, 24}},
        {"classifier_epochs", 20},
        {"angle_range", kDefaultAngleRange},
        {"checkpoints", true},
    };
    RunResult res;
    res.subcommand = "train-adversary";
    res.resolved_config = resolve_config(res.subcommand, given, defaults);
    const json& c = res.resolved_config;

    const std::string mode = cfg<std::string>(c, "mode");
    if (mode != "random" && mode != "mnist")
        throw ConfigError("train-adversary: mode must be random|mnist");
    const int reps = cfg_positive_int(c, "repetitions");
    const int k_measured = cfg_positive_int(c, "k_measured");
    AdversaryConfig acfg;
    acfg.epochs = cfg_positive_int(c, "epochs");
    acfg.batch_size = cfg_positive_int(c, "batch_size");
    acfg.learning_rate = cfg<double>(c, "learning_rate");
    if (acfg.learning_rate <= 0.0)
        throw ConfigError("train-adversary: learning_rate must be positive");
    acfg.train_states = cfg_positive_int(c, "train_states");
    acfg.test_states = cfg_positive_int(c, "test_states");
    const bool checkpoints = cfg<bool>(c, "checkpoints");

    res.table.header = {"mode",          "n_qubits",    "depth",
                        "rep",           "classifier_accuracy", "final_loss",
                        "success_fraction", "mean_abs_dy", "ties",
                        "wall_time_ms"};

    RngStream root(seed);
    std::mutex extras_mutex;

    if (mode == "random") {
        const int n = cfg_positive_int(c, "n");
        if (n < 2 || n > 10) throw ConfigError("train-adversary: n must be in [2, 10]");
        if (k_measured > n) throw ConfigError("train-adversary: k_measured must be <= n");
        const std::vector<int> depths = cfg<std::vector<int>>(c, "depths");
        if (depths.empty()) throw ConfigError("train-adversary: depths must not be empty");
        for (int d : depths)
            if (d < 1) throw ConfigError("train-adversary: depths must be positive");

        const int tasks = int(depths.size()) * reps;
        std::vector<std::vector<std::string>> rows(static_cast<std::size_t>(tasks));
        std::vector<double> successes(static_cast<std::size_t>(tasks));
        parallel_for(tasks, threads, [&](int ti) {
            auto start = Clock::now();
            const int depth = depths[std::size_t(ti) / std::size_t(reps)];
            const int rep = ti % reps;
            RngStream circ_rng = root.child(std::uint64_t(ti));
            DenseOperator u = compile(build_brickwork(n, depth, circ_rng), Eigen::VectorXd());
            RngStream train_rng = root.child((1ull << 32) + std::uint64_t(ti));
            AdversaryResult adv =
                train_product_adversary(u, k_measured, {}, {}, {}, acfg, train_rng);
            successes[std::size_t(ti)] = adv.report.success_fraction;
            rows[std::size_t(ti)] = {mode,
                                     format_int(n),
                                     format_int(depth),
                                     format_int(rep),
                                     blank(),
                                     format_double(tail_mean(adv.batch_loss, 5)),
                                     format_double(adv.report.success_fraction),
                                     format_double(adv.report.mean_abs_dy),
                                     format_int(adv.report.ties),
                                     format_double(ms_since(start))};
            if (checkpoints) {
                json ck;
                ck["mode"] = mode;
                ck["depth"] = depth;
                ck["rep"] = rep;
                ck["params"] = std::vector<double>(adv.params.data(),
                                                   adv.params.data() + adv.params.size());
                ck["batch_loss"] = adv.batch_loss;
                ck["success_fraction"] = adv.report.success_fraction;
                char name[64];
                snprintf(name, sizeof name, "adversary_n%d_depth%02d_rep%02d.json", n, depth, rep);
                std::lock_guard<std::mutex> lock(extras_mutex);
                res.extra_files.emplace_back(name, ck.dump(2) + "\n");
            }
        });
        for (auto& row : rows) res.table.add_row(std::move(row));

        json by_depth = json::object();
        for (std::size_t di = 0; di < depths.size(); ++di) {
            std::vector<double> vals(successes.begin() + long(di) * reps,
                                     successes.begin() + long(di + 1) * reps);
            by_depth[std::to_string(depths[di])] = mean_of(vals);
        }
        res.summary = {{"mean_success_by_depth", by_depth}};
        std::sort(res.extra_files.begin(), res.extra_files.end());
        return res;
    }

    // mnist mode: classical pipeline -> angle-encoded classifier -> adversary.
    for (const char* key : {"train_images", "train_labels", "test_images", "test_labels"})
        if (cfg<std::string>(c, key).empty())
            throw ConfigError(std::string("train-adversary: mnist mode needs config key \"") +
                              key + "\"");
    const int pca_components = cfg_positive_int(c, "pca_components");
    if (pca_components > 10) throw ConfigError("train-adversary: pca_components must be <= 10");
    const double range = cfg<double>(c, "angle_range");
    if (range <= 0.0) throw ConfigError("train-adversary: angle_range must be positive");
    const std::vector<int> layer_counts = cfg<std::vector<int>>(c, "classifier_layers");
    if (layer_counts.empty())
        throw ConfigError("train-adversary: classifier_layers must not be empty");
    for (int l : layer_counts)
        if (l < 1) throw ConfigError("train-adversary: classifier_layers must be positive");
    const int classifier_epochs = cfg_positive_int(c, "classifier_epochs");
    if (k_measured > pca_components)
        throw ConfigError("train-adversary: k_measured must be <= pca_components");

    const int train_limit = cfg<int>(c, "train_limit");
    const int test_limit = cfg<int>(c, "test_limit");
    if (train_limit < 0 || test_limit < 0)
        throw ConfigError("train-adversary: limits must be >= 0 (0 keeps every sample)");
    LabeledVectors train_raw, test_raw;
    try {
        train_raw = load_binary_digits(cfg<std::string>(c, "train_images"),
                                       cfg<std::string>(c, "train_labels"), train_limit);
        test_raw = load_binary_digits(cfg<std::string>(c, "test_images"),
                                      cfg<std::string>(c, "test_labels"), test_limit);
    } catch (const std::exception& e) {
        throw IoError(std::string("train-adversary: ") + e.what());
    }
    if (train_raw.x.size() < 2 || test_raw.x.empty())
        throw IoError("train-adversary: not enough 0/1 digits in the input files");

    PcaModel pca = fit_pca(train_raw.x, pca_components);
    int clamped = 0;
    auto encode_set = [&](const LabeledVectors& raw) {
        std::vector<StateVector> states;
        states.reserve(raw.x.size());
        for (const auto& v : raw.x)
            states.push_back(encode_angle(project_and_scale(pca, v, range, &clamped)));
        return states;
    };
    const std::vector<StateVector> train_states = encode_set(train_raw);
    const std::vector<StateVector> test_states = encode_set(test_raw);

    // Normalized-dataset cache artifact with its content hash.
    EncodedDataset cache;
    cache.n_features = pca_components;
    cache.range = range;
    for (const auto& v : train_raw.x) cache.x.push_back(project_and_scale(pca, v, range));
    cache.y = train_raw.y;
    res.extra_files.emplace_back("train_features.json", encoded_dataset_to_text(cache));

    const int nq = pca_components;
    const int tasks = int(layer_counts.size()) * reps;
    std::vector<std::vector<std::string>> rows(static_cast<std::size_t>(tasks));
    std::vector<double> successes(static_cast<std::size_t>(tasks)), accuracies(static_cast<std::size_t>(tasks));
    parallel_for(tasks, threads, [&](int ti) {
        auto start = Clock::now();
        const int layers = layer_counts[std::size_t(ti) / std::size_t(reps)];
        const int rep = ti % reps;
        ParamCircuit circ = build_hw_efficient(nq, layers);
        RngStream rng = root.child(std::uint64_t(ti));
        Eigen::VectorXd init(circ.n_params);
        for (int i = 0; i < circ.n_params; ++i) init[i] = rng.uniform(-M_PI, M_PI);
        TrainConfig tc;
        tc.epochs = classifier_epochs;
        tc.batch_size = acfg.batch_size;
        tc.learning_rate = acfg.learning_rate;
        tc.loss = Loss::kHinge;
        TrainResult tr = train(circ, init, train_states, train_raw.y, k_measured, tc, rng);
        const double acc = accuracy(circ, tr.params, test_states, test_raw.y, k_measured);

        DenseOperator u = compile(circ, tr.params);
        std::vector<int> flip_labels(train_states.size());
        for (std::size_t i = 0; i < train_states.size(); ++i)
            flip_labels[i] =
                predict(circ, tr.params, train_states[i], k_measured) >= 0.0 ? 1 : -1;
        RngStream adv_rng = root.child((1ull << 32) + std::uint64_t(ti));
        AdversaryResult adv = train_product_adversary(u, k_measured, train_states, flip_labels,
                                                      test_states, acfg, adv_rng);
        successes[std::size_t(ti)] = adv.report.success_fraction;
        accuracies[std::size_t(ti)] = acc;
        rows[std::size_t(ti)] = {mode,
                                 format_int(nq),
                                 format_int(layers),
                                 format_int(rep),
                                 format_double(acc),
                                 format_double(tail_mean(adv.batch_loss, 5)),
                                 format_double(adv.report.success_fraction),
                                 format_double(adv.report.mean_abs_dy),
                                 format_int(adv.report.ties),
                                 format_double(ms_since(start))};
        if (checkpoints) {
            json ck;
            ck["mode"] = mode;
            ck["layers"] = layers;
            ck["rep"] = rep;
            ck["circuit"] = json::parse(circuit_to_text(circ));
            ck["classifier_params"] =
                std::vector<double>(tr.params.data(), tr.params.data() + tr.params.size());
            ck["classifier_accuracy"] = acc;
            ck["epoch_loss"] = tr.epoch_loss;
            ck["adversary_params"] =
                std::vector<double>(adv.params.data(), adv.params.data() + adv.params.size());
            ck["adversary_success"] = adv.report.success_fraction;
            char name[64];
            snprintf(name, sizeof name, "mnist_layers%02d_rep%02d.json", layers, rep);
            std::lock_guard<std::mutex> lock(extras_mutex);
            res.extra_files.emplace_back(name, ck.dump(2) + "\n");
        }
    });
    for (auto& row : rows) res.table.add_row(std::move(row));

    json by_layers = json::object();
    json acc_by_layers = json::object();
    for (std::size_t li = 0; li < layer_counts.size(); ++li) {
        std::vector<double> s(successes.begin() + long(li) * reps,
                              successes.begin() + long(li + 1) * reps);
        std::vector<double> a(accuracies.begin() + long(li) * reps,
                              accuracies.begin() + long(li + 1) * reps);
        by_layers[std::to_string(layer_counts[li])] = mean_of(s);
        acc_by_layers[std::to_string(layer_counts[li])] = mean_of(a);
    }
    res.summary = {{"mean_success_by_layers", by_layers},
                   {"mean_accuracy_by_layers", acc_by_layers},
                   {"train_samples", train_raw.x.size()},
                   {"test_samples", test_raw.x.size()},
                   {"clamped_projections", clamped}};
    std::sort(res.extra_files.begin(), res.extra_files.end());
    return res;
}

// -------------------------------------------------------------- clifford-spoof

RunResult run_clifford_spoof(const json& given, std::uint64_t seed, int threads) {
    const json defaults = {
        {"n", 6}, {"samples", 100}, {"product_states", 1000}, {"mode", "both"},
        {"k_measured", 1},
    };
    RunResult res;
    res.subcommand = "clifford-spoof";
    res.resolved_config = resolve_config(res.subcommand, given, defaults);
    const json& c = res.resolved_config;

    const int n = cfg_positive_int(c, "n");
    if (n < 1 || n > 10) throw ConfigError("clifford-spoof: n must be in [1, 10]");
    const int samples = cfg_positive_int(c, "samples");
    const int product_states = cfg_positive_int(c, "product_states");
    const int k_measured = cfg_positive_int(c, "k_measured");
    if (k_measured > n) throw ConfigError("clifford-spoof: k_measured must be <= n");
    const std::string mode = cfg<std::string>(c, "mode");
    if (mode != "dense" && mode != "angle" && mode != "both")
        throw ConfigError("clifford-spoof: mode must be dense|angle|both");
    const bool do_dense = mode != "angle";
    const bool do_angle = mode != "dense";

    res.table.header = {"mode", "n_qubits", "sample", "found", "tests_until_found",
                        "success_fraction", "max_cut_s2", "wall_time_ms"};

    struct SampleOut {
        std::vector<std::vector<std::string>> rows;
        int angle_attempts = 0;
        bool angle_found = false;
        double dense_success = 1.0;
    };
    std::vector<SampleOut> outs(static_cast<std::size_t>(samples));
    RngStream root(seed);
    const DenseOperator z = measured_z_operator(n, k_measured);

    parallel_for(samples, threads, [&](int si) {
        auto start = Clock::now();
        RngStream rng = root.child(std::uint64_t(si));
        std::vector<CliffordGate> gates = random_clifford_gates(n, rng);
        CliffordTableau tab = clifford_from_gates(n, gates);
        DenseOperator u = clifford_dense(n, gates);
        DenseOperator zu = u.adjoint() * z * u;
        SampleOut& out = outs[std::size_t(si)];

        auto cut_s2 = [&](const DenseOperator& w) {
            return n >= 2 ? loe(w).max_s2 : 0.0;
        };

        if (do_dense) {
            PauliString p = universal_spoof_dense_encoding(tab);
            UniversalAttack attack;
            attack.w = p.materialize();
            attack.provenance = AttackProvenance::kExactFlipConjugate;
            AttackReport rep =
                success_fraction(attack, zu, StateSource::kRandomProduct, product_states,
                                 root.child((1ull << 32) + std::uint64_t(si)).next_u64());
            out.dense_success = rep.success_fraction;
            out.rows.push_back({"dense", format_int(n), format_int(si), "1", "1",
                                format_double(rep.success_fraction),
                                format_double(cut_s2(attack.w)),
                                format_double(ms_since(start))});
        }
        if (do_angle) {
            auto angle_start = Clock::now();
            AngleSpoofResult spoof = find_angle_encoding_spoof(tab, k_measured);
            out.angle_attempts = spoof.attempts;
            out.angle_found = spoof.found;
            std::string success_cell = blank(), s2_cell = blank();
            if (spoof.found) {
                UniversalAttack attack;
                attack.w = spoof.p.materialize();
                attack.provenance = AttackProvenance::kExactFlipConjugate;
                RngStream arng = root.child((1ull << 33) + std::uint64_t(si));
                std::vector<StateVector> states;
                states.reserve(std::size_t(product_states));
                Eigen::VectorXd x(n);
                for (int t = 0; t < product_states; ++t) {
                    for (int q = 0; q < n; ++q) x[q] = arng.uniform(0.0, M_PI);
                    states.push_back(encode_angle(x));
                }
                AttackReport rep = success_fraction_on_states(attack, zu, states);
                success_cell = format_double(rep.success_fraction);
                s2_cell = format_double(cut_s2(attack.w));
            }
            out.rows.push_back({"angle", format_int(n), format_int(si),
                                spoof.found ? "1" : "0", format_int(spoof.attempts),
                                success_cell, s2_cell, format_double(ms_since(angle_start))});
        }
    });

    double attempts_sum = 0.0;
    int angle_found = 0;
    double min_dense_success = 1.0;
    for (auto& out : outs) {
        for (auto& row : out.rows) res.table.add_row(std::move(row));
        attempts_sum += out.angle_attempts;
        angle_found += out.angle_found ? 1 : 0;
        min_dense_success = std::min(min_dense_success, out.dense_success);
    }
    res.summary = {{"angle_mean_attempts", do_angle ? attempts_sum / samples : 0.0},
                   {"angle_found", angle_found},
                   {"dense_min_success", do_dense ? min_dense_success : 0.0}};
    return res;
}

// ------------------------------------------------------------------- mps-bench

RunResult run_mps_bench(const json& given, std::uint64_t seed, int threads) {
    const json defaults = {
        {"n", 12},       {"layers", 12},     {"chi_max", 64},       {"svd_cut", 1e-12},
        {"k_measured", 1}, {"workloads", 5}, {"compare_n", 8},      {"compare_layers", 6},
    };
    RunResult res;
    res.subcommand = "mps-bench";
    res.resolved_config = resolve_config(res.subcommand, given, defaults);
    const json& c = res.resolved_config;

    const int n = cfg_positive_int(c, "n");
    if (n < 2 || n > 24) throw ConfigError("mps-bench: n must be in [2, 24]");
    const int layers = cfg_positive_int(c, "layers");
    const int chi_max = cfg_positive_int(c, "chi_max");
    const double svd_cut = cfg<double>(c, "svd_cut");
    if (svd_cut < 0.0 || svd_cut >= 1.0)
        throw ConfigError("mps-bench: svd_cut must be in [0, 1)");
    const int k_measured = cfg_positive_int(c, "k_measured");
    if (k_measured > std::min(n, cfg<int>(c, "compare_n")))
        throw ConfigError("mps-bench: k_measured must be <= n and compare_n");
    const int workloads = cfg_positive_int(c, "workloads");
    const int compare_n = cfg_positive_int(c, "compare_n");
    if (compare_n < 2 || compare_n > 12)
        throw ConfigError("mps-bench: compare_n must be in [2, 12]");
    const int compare_layers = cfg_positive_int(c, "compare_layers");

    res.table.header = {"record",  "n_qubits",  "layers",   "layer",       "cut",
                        "bond_dim", "entropy",  "discarded_weight", "workload", "sv_y",
                        "mps_y",   "abs_diff",  "wall_time_ms"};

    RngStream root(seed);
    auto start = Clock::now();
    BrickworkMpsRun run =
        run_brickwork_mps(n, layers, chi_max, svd_cut, root.child(0).next_u64());
    const double telemetry_wall = ms_since(start);
    Eigen::Index max_bond = 1;
    for (const auto& row : run.rows) {
        max_bond = std::max(max_bond, row.bond_dim);
        res.table.add_row({"telemetry", format_int(n), format_int(layers),
                           format_int(row.layer), format_int(row.cut),
                           format_int(row.bond_dim), format_double(row.entropy),
                           format_double(row.discarded_weight), blank(), blank(), blank(),
                           blank(), format_double(telemetry_wall)});
    }

    std::vector<std::vector<std::string>> agree_rows(static_cast<std::size_t>(workloads));
    std::vector<double> diffs(static_cast<std::size_t>(workloads));
    parallel_for(workloads, threads, [&](int wi) {
        auto wstart = Clock::now();
        RngStream rng = root.child(100 + std::uint64_t(wi));
        ParamCircuit circ = build_brickwork(compare_n, compare_layers, rng);
        StateVector psi = basis_state(Eigen::Index(1) << compare_n, 0);
        psi = apply_circuit(circ, Eigen::VectorXd(), psi);
        const double sv_y = measured_z_expectation(psi, k_measured);

        Mps m = mps_zero_state(compare_n);
        for (const Gate& g : circ.gates)
            apply_two_qubit_gate(m, g.fixed, g.q0, Eigen::Index(1) << compare_n, 0.0);
        const double mps_y = mps_expectation(m, mpo_measured_z(compare_n, k_measured));
        diffs[std::size_t(wi)] = std::abs(sv_y - mps_y);
        agree_rows[std::size_t(wi)] = {"agreement",
                                       format_int(compare_n),
                                       format_int(compare_layers),
                                       blank(),
                                       blank(),
                                       blank(),
                                       blank(),
                                       blank(),
                                       format_int(wi),
                                       format_double(sv_y),
                                       format_double(mps_y),
                                       format_double(std::abs(sv_y - mps_y)),
                                       format_double(ms_since(wstart))};
    });
    for (auto& row : agree_rows) res.table.add_row(std::move(row));

    double max_diff = 0.0;
    for (double d : diffs) max_diff = std::max(max_diff, d);
    res.summary = {{"max_bond_dim", max_bond},
                   {"final_discarded_weight", run.state.discarded_weight},
                   {"max_backend_abs_diff", max_diff}};
    return res;
}

}  // namespace

std::vector<std::string> experiment_names() {
    return {"weak-scaling",   "otoc-bound",     "loe-growth", "approx-universal",
            "train-adversary", "clifford-spoof", "mps-bench"};
}

RunResult run_experiment(const std::string& subcommand, const json& config, std::uint64_t seed,
                         int threads) {
    if (threads < 1) throw ConfigError("threads must be positive");
    RunResult res;
    if (subcommand == "weak-scaling")
        res = run_weak_scaling(config, seed, threads);
    else if (subcommand == "otoc-bound")
        res = run_otoc_bound(config, seed, threads);
    else if (subcommand == "loe-growth")
        res = run_loe_growth(config, seed, threads);
    else if (subcommand == "approx-universal")
        res = run_approx_universal(config, seed, threads);
    else if (subcommand == "train-adversary")
        res = run_train_adversary(config, seed, threads);
    else if (subcommand == "clifford-spoof")
        res = run_clifford_spoof(config, seed, threads);
    else if (subcommand == "mps-bench")
        res = run_mps_bench(config, seed, threads);
    else
        throw ConfigError("unknown subcommand \"" + subcommand + "\"");
    res.seed = seed;
    res.determinism_hash = csv_determinism_hash(res.table, {"wall_time_ms"});
    return res;
}

std::string write_run(const RunResult& result, const std::string& out_dir, double wall_time_s) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

    const std::string csv_name = result.subcommand + ".csv";
    write_text_file(out_dir + "/" + csv_name, csv_to_string(result.table));
    json extra_names = json::array();
    for (const auto& [name, content] : result.extra_files) {
        write_text_file(out_dir + "/" + name, content);
        extra_names.push_back(name);
    }

    char hash[32];
    snprintf(hash, sizeof hash, "%016llx",
             static_cast<unsigned long long>(result.determinism_hash));
    json manifest;
    manifest["subcommand"] = result.subcommand;
    manifest["version"] = kVersion;
    manifest["seed"] = result.seed;
    manifest["config"] = result.resolved_config;
    manifest["determinism_hash"] = hash;
    manifest["csv"] = csv_name;
    manifest["extra_files"] = extra_names;
    manifest["summary"] = result.summary;
    manifest["wall_time_s"] = wall_time_s;
    manifest["rows"] = result.table.rows.size();

    const std::string manifest_path = out_dir + "/" + result.subcommand + "_manifest.json";
    write_text_file(manifest_path, manifest.dump(2) + "\n");
    return manifest_path;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace qaml
