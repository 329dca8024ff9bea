#include "qdeloc/run.hpp"
#include "qdeloc/errors.hpp"
#include "qdeloc/exactsim.hpp"
#include "qdeloc/oracles.hpp"
#include "qdeloc/parallel.hpp"
#include "qdeloc/replicatn.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <tuple>

namespace qdeloc::harness {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kExactHeader{"t",           "q",          "I_mean", "I_stderr", "S_annealed",
                                            "S_annealed_err", "S_quenched", "S_quenched_err", "n_realizations",
                                            "d",           "N",          "seed"};
const std::vector<std::string> kExactPurityHeader{"t", "cut", "purity", "purity_err", "n_realizations", "d", "N", "seed"};
const std::vector<std::string> kTnHeader{"t", "value_kind", "value", "log_deficit", "d", "N", "q", "eps", "chi_max_used"};
const std::vector<std::string> kOracleHeader{"t", "value_kind", "value", "log_deficit", "d", "N", "q", "cut"};

std::string sibling(const std::string &path, std::string_view suffix) {
    fs::path p(path);
    return (p.parent_path() / (p.stem().string() + std::string(suffix) + p.extension().string())).string();
}

double purity_deficit(int d, int N, int cut, double q, double value) {
    if (q != 2.0 || !(value > 0)) return kNaN;
    return std::log(value / oracles::haar_purity(d, N, cut));
}

void sort_records(ObservableSeries &s) {
    auto key = [](const ObservableRecord &r) {
        return std::make_tuple(static_cast<int>(r.provenance), static_cast<int>(r.kind), r.d, r.N, r.q, r.cut, r.t);
    };
    std::stable_sort(s.records.begin(), s.records.end(), [&](const auto &a, const auto &b) { return key(a) < key(b); });
}

ObservableSeries run_exact(const ExperimentConfig &c, const std::string &out, std::vector<std::string> &files) {
    ObservableSeries series;
    CsvWriter csv(out, kExactHeader);
    files.push_back(out);
    std::unique_ptr<CsvWriter> pcsv;
    if (!c.cuts.empty()) {
        pcsv = std::make_unique<CsvWriter>(sibling(out, "_purity"), kExactPurityHeader);
        files.push_back(pcsv->path());
    }
    for (int N : c.Ns) {
        exact::EnsembleConfig e;
        e.d = c.d;
        e.N = N;
        e.depth = c.depth;
        e.qs = c.qs;
        e.realizations = c.realizations;
        e.seed = c.seed;
        e.random_local_basis = c.random_local_basis;
        e.bootstrap = c.bootstrap;
        e.threads = c.threads;
        if (!c.cuts.empty()) e.purity_cut = resolve_cut(c.cuts.front(), N);
        const auto res = exact::ensemble_run(e);
        for (const auto &p : res.points) {
            ObservableRecord r;
            r.provenance = Provenance::mc;
            r.kind = ValueKind::ipr;
            r.d = c.d;
            r.N = N;
            r.q = p.q;
            r.t = p.t;
            r.value = p.ipr_mean;
            r.value_err = p.ipr_stderr;
            r.s_annealed = p.s_annealed;
            r.s_annealed_err = p.s_annealed_err;
            r.s_quenched = p.s_quenched;
            r.s_quenched_err = p.s_quenched_err;
            const double sh = haar_reference_entropy(c.d, N, p.q);
            r.deficit = sh - p.s_annealed;
            r.deficit_err = p.s_annealed_err;
            r.realizations = res.realizations;
            r.seed = c.seed;
            series.append(r);
            csv.row({cell(p.t), cell(p.q), cell(p.ipr_mean), cell(p.ipr_stderr), cell(p.s_annealed),
                     cell(p.s_annealed_err), cell(p.s_quenched), cell(p.s_quenched_err), cell(res.realizations),
                     cell(c.d), cell(N), cell(c.seed)});
        }
        for (const auto &p : res.purity) {
            ObservableRecord r;
            r.provenance = Provenance::mc;
            r.kind = ValueKind::purity;
            r.d = c.d;
            r.N = N;
            r.q = 2.0;
            r.t = p.t;
            r.cut = *e.purity_cut;
            r.value = p.mean;
            r.value_err = p.error;
            r.deficit = purity_deficit(c.d, N, r.cut, 2.0, p.mean);
            r.deficit_err = p.mean > 0 ? p.error / p.mean : 0.0;
            r.realizations = res.realizations;
            r.seed = c.seed;
            series.append(r);
            pcsv->row({cell(p.t), cell(r.cut), cell(p.mean), cell(p.error), cell(res.realizations), cell(c.d),
                       cell(N), cell(c.seed)});
        }
    }
    return series;
}

struct TnTask {
    int N;
    double q;
    ValueKind kind;
    int cut;
};

ObservableSeries run_tn(const ExperimentConfig &c, const std::string &out, std::vector<std::string> &files) {
    std::vector<TnTask> tasks;
    for (int N : c.Ns) {
        for (double q : c.qs) tasks.push_back({N, q, ValueKind::ipr, -1});
        for (int cut : c.cuts)
            for (double q : c.qs) tasks.push_back({N, q, ValueKind::purity, resolve_cut(cut, N)});
        if (c.sum_bipartitions) tasks.push_back({N, 2.0, ValueKind::bipartition_sum, -1});
    }
    tn::TnOptions opt;
    opt.eps = c.eps;
    opt.chi_max = c.chi_max;
    opt.allow_q4 = c.allow_q4;

    CsvWriter csv(out, kTnHeader);
    files.push_back(out);
    ObservableSeries series;
    std::mutex mutex;
    parallel_for(tasks.size(), worker_count(c.threads), [&](std::uint64_t i) {
        const auto &task = tasks[i];
        const int q = static_cast<int>(task.q);
        std::vector<ObservableRecord> recs;
        auto make = [&](int t, double log_value, int chi) {
            ObservableRecord r;
            r.provenance = Provenance::tn;
            r.kind = task.kind;
            r.d = c.d;
            r.N = task.N;
            r.q = task.q;
            r.t = t;
            r.cut = task.cut;
            r.value = std::exp(log_value);
            r.eps = c.eps;
            r.chi_max_used = chi;
            if (task.kind == ValueKind::purity) {
                r.deficit = purity_deficit(c.d, task.N, task.cut, task.q, r.value);
            } else {
                r.s_annealed = q == 1 ? 0.0 : log_value / (1.0 - task.q);
                r.deficit = ipr_deficit(c.d, task.N, task.q, q == 1 ? 0.0 : log_value);
                r.deficit_err = tn_deficit_error(task.N, t, task.q, c.eps);
            }
            recs.push_back(r);
        };
        if (task.kind == ValueKind::ipr) {
            for (const auto &p : tn::averaged_ipr_series(c.d, q, task.N, c.depth, opt))
                make(p.t, p.log_value, p.chi_max_used);
        } else if (task.kind == ValueKind::purity) {
            for (const auto &p : tn::averaged_purity_series(c.d, q, task.N, task.cut, c.depth, opt))
                make(p.t, p.log_value, p.chi_max_used);
        } else {
            // The sum over bipartitions after t layers equals the averaged IPR after t + 1.
            for (int t = 0; t + 1 <= c.depth; ++t)
                make(t + 1, std::log(tn::sum_over_bipartitions(c.d, task.N, t, opt)), 0);
        }
        std::lock_guard lock(mutex);
        for (const auto &r : recs) {
            const double log_def = r.kind == ValueKind::purity
                                       ? kNaN
                                       : r.deficit * (r.q - 1.0);
            csv.row({cell(r.t), std::string(kind_name(r.kind)), cell(r.value), cell(log_def), cell(r.d), cell(r.N),
                     cell(r.q), cell(r.eps), cell(r.chi_max_used)});
            series.append(r);
        }
    });
    return series;
}

ObservableSeries run_oracle(const ExperimentConfig &c, const std::string &out, std::vector<std::string> &files) {
    CsvWriter csv(out, kOracleHeader);
    files.push_back(out);
    ObservableSeries series;
    for (int N : c.Ns) {
        for (double qd : c.qs) {
            const int q = static_cast<int>(qd);
            ObservableRecord r;
            r.provenance = Provenance::oracle;
            r.kind = ValueKind::ipr;
            r.d = c.d;
            r.N = N;
            r.q = qd;
            r.t = -1;
            r.value = oracles::haar_ipr(c.d, N, q);
            r.s_annealed = oracles::haar_entropy(c.d, N, q);
            r.deficit = 0.0;
            series.append(r);
            csv.row({"", "haar_ipr", cell(r.value), cell(0.0), cell(c.d), cell(N), cell(qd), ""});
            csv.row({"", "haar_log_ipr", cell(oracles::haar_log_ipr(c.d, N, q)), "", cell(c.d), cell(N), cell(qd), ""});
            csv.row({"", "haar_entropy", cell(r.s_annealed), "", cell(c.d), cell(N), cell(qd), ""});
            csv.row({"", "haar_ipr_std", cell(oracles::haar_ipr_std(c.d, N, q)), "", cell(c.d), cell(N), cell(qd), ""});
        }
        for (int cut0 : c.cuts) {
            const int cut = resolve_cut(cut0, N);
            const double ph = oracles::haar_purity(c.d, N, cut);
            csv.row({"", "haar_purity", cell(ph), "", cell(c.d), cell(N), cell(2.0), cell(cut)});
            for (int t = 0; t <= c.depth; ++t) {
                ObservableRecord r;
                r.provenance = Provenance::oracle;
                r.kind = ValueKind::purity;
                r.d = c.d;
                r.N = N;
                r.q = 2.0;
                r.t = t;
                r.cut = cut;
                r.value = oracles::walk_purity(c.d, N, cut, oracles::walk_steps(N, cut, t));
                r.deficit = std::log(r.value / ph);
                series.append(r);
                csv.row({cell(t), "walk_purity", cell(r.value), cell(r.deficit), cell(c.d), cell(N), cell(2.0),
                         cell(cut)});
            }
        }
    }
    return series;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

} // namespace

nlohmann::json build_versions() {
    nlohmann::json v;
    v["qdeloc"] = "1.0.0";
#if defined(__clang__)
    v["compiler"] = fmt::format("clang {}.{}.{}", __clang_major__, __clang_minor__, __clang_patchlevel__);
#elif defined(__GNUC__)
    v["compiler"] = fmt::format("gcc {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__);
#endif
    v["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
    v["boost"] = fmt::format("{}.{}.{}", BOOST_VERSION / 100000, BOOST_VERSION / 100 % 1000, BOOST_VERSION % 100);
    v["fmt"] = FMT_VERSION;
    v["json"] = fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                            NLOHMANN_JSON_VERSION_PATCH);
    return v;
}

std::string write_manifest(const std::string &dir, const nlohmann::json &manifest) {
    fs::create_directories(dir.empty() ? "." : dir);
    const auto path = (fs::path(dir.empty() ? "." : dir) / "manifest.json").string();
    std::ofstream f(path);
    if (!f) throw ConfigError(fmt::format("cannot write {}", path));
    f << manifest.dump(2) << '\n';
    return path;
}

std::string run_directory(const ExperimentConfig &c) {
    if (!c.run_dir.empty()) return c.run_dir;
    const auto parent = fs::path(c.output).parent_path();
    return parent.empty() ? "." : parent.string();
}

std::string output_path(const ExperimentConfig &c) {
    const fs::path out(c.output);
    if (c.run_dir.empty() || out.is_absolute()) return out.string();
    return (fs::path(c.run_dir) / out).string();
}

ObservableSeries run_series(const ExperimentConfig &config, std::vector<std::string> &files) {
    validate(config);
    const auto out = output_path(config);
    ObservableSeries series;
    switch (config.engine) {
    case Engine::exact: series = run_exact(config, out, files); break;
    case Engine::tn: series = run_tn(config, out, files); break;
    case Engine::oracle: series = run_oracle(config, out, files); break;
    }
    sort_records(series);
    return series;
}

RunResult run(const ExperimentConfig &config) {
    const auto start = std::chrono::steady_clock::now();
    const auto started_at = utc_now();
    RunResult result;
    result.series = run_series(config, result.outputs);
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto bad = result.series.deficit_violations();
    if (!bad.empty())
        std::cerr << fmt::format("warning: {} records with deficit below -1e-9 (first at N={}, t={})\n", bad.size(),
                                 bad.front().N, bad.front().t);

    auto &m = result.manifest;
    m["config"] = to_json(config);
    m["versions"] = build_versions();
    m["seeds"] = {{"master", config.seed},
                  {"realizations", config.engine == Engine::exact ? config.realizations : 0},
                  {"derivation", config.engine == Engine::exact ? "seed_seq(master, realization index)" : "none"}};
    m["workers"] = worker_count(config.threads);
    m["started_at"] = started_at;
    m["wall_time_s"] = result.wall_seconds;
    m["records"] = result.series.records.size();
    m["deficit_violations"] = bad.size();
    m["outputs"] = result.outputs;
    result.outputs.push_back(write_manifest(run_directory(config), m));
    return result;
}

} // namespace qdeloc::harness
