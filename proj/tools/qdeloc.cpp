#include "qdeloc/config.hpp"
#include "qdeloc/crosscheck.hpp"
#include "qdeloc/errors.hpp"
#include "qdeloc/figures.hpp"
#include "qdeloc/fit.hpp"
#include "qdeloc/oracles.hpp"
#include "qdeloc/run.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <utility>

using namespace qdeloc;
using namespace qdeloc::harness;

namespace {

using Settings = std::vector<std::pair<std::string, std::string>>;

/// Flags recorded in order, applied on top of the config file.
void setting(CLI::App *app, Settings &s, const std::string &flag, const std::string &key, const std::string &help) {
    app->add_option_function<std::string>(flag, [&s, key](const std::string &v) { s.emplace_back(key, v); }, help);
}

void toggle(CLI::App *app, Settings &s, const std::string &flag, const std::string &key, const std::string &help) {
    app->add_flag_callback(flag, [&s, key] { s.emplace_back(key, "true"); }, help);
}

void common(CLI::App *app, Settings &s, std::string &config_file) {
    app->add_option("--config", config_file, "flat key = value file; flags win on conflict");
    setting(app, s, "--d", "d", "local dimension");
    setting(app, s, "--N", "N", "system sizes, e.g. 8,12 or 8:16:2");
    setting(app, s, "--q", "q", "Renyi indices, comma separated");
    setting(app, s, "--depth", "depth", "number of brick-wall layers");
    setting(app, s, "--seed", "seed", "master seed");
    setting(app, s, "--cut", "cut", "left-block size for purities (N/2 accepted)");
    setting(app, s, "--out", "output", "CSV output path");
    setting(app, s, "--run-dir", "run_dir", "directory for outputs and manifest.json");
    setting(app, s, "--threads", "threads", "worker count (0: QDELOC_THREADS or hardware)");
}

ExperimentConfig assemble(Engine engine, const std::string &file, const Settings &s) {
    ExperimentConfig c;
    c.engine = engine;
    if (!file.empty()) c = load_config(file, c);
    c.engine = engine;
    for (const auto &[k, v] : s) apply_setting(c, k, v);
    return c;
}

int report_run(const RunResult &r) {
    for (const auto &f : r.outputs) std::cout << f << '\n';
    std::cerr << fmt::format("{} records in {:.2f} s\n", r.series.records.size(), r.wall_seconds);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Hilbert-space delocalization in brick-wall Haar circuits"};
    app.require_subcommand(1);

    std::string config_file;
    Settings s;

    auto *exact = app.add_subcommand("exact", "statevector Monte Carlo ensemble");
    common(exact, s, config_file);
    setting(exact, s, "--realizations", "realizations", "number of circuit realizations");
    setting(exact, s, "--bootstrap", "bootstrap", "bootstrap resamples for error bars");
    toggle(exact, s, "--random-local-basis", "random_local_basis", "rotate every site by a Haar unitary first");

    auto *tn = app.add_subcommand("tn", "replica tensor-network contraction");
    common(tn, s, config_file);
    setting(tn, s, "--eps", "eps", "discarded squared singular weight per bond");
    setting(tn, s, "--chi-max", "chi_max", "bond dimension cap");
    toggle(tn, s, "--allow-q4", "allow_q4", "enable q = 4");
    toggle(tn, s, "--sum-bipartitions", "sum_bipartitions", "also evaluate the exhaustive bipartition sum (q = 2)");
    bool purity_flag = false;
    tn->add_flag("--purity", purity_flag, "measure the purity of the left half (same as --cut N/2)");

    auto *oracle = app.add_subcommand("oracle", "closed-form values");
    std::string kind = "haar";
    int od = 2, oN = 8, oq = 2, ocut = -1, odepth = 20;
    oracle->add_option("kind", kind, "haar, walk or constants")->check(CLI::IsMember({"haar", "walk", "constants"}));
    oracle->add_option("--d", od, "local dimension");
    oracle->add_option("--N", oN, "system size");
    oracle->add_option("--q", oq, "Renyi index");
    oracle->add_option("--cut", ocut, "left-block size for the walk purity (default N/2)");
    oracle->add_option("--depth", odepth, "last depth for the walk purity");
    std::string oracle_out;
    oracle->add_option("--json", oracle_out, "write JSON here instead of stdout");

    auto *fit = app.add_subcommand("fit", "fit the exponential approach to the Haar value");
    std::vector<std::string> inputs;
    std::string provenance = "tn", fit_out;
    int fd = 2;
    double fq = 2.0;
    std::optional<int> t_min, t_max;
    FitWindow window;
    fit->add_option("inputs", inputs, "CSV files from the exact or tn verbs")->required();
    fit->add_option("--provenance", provenance, "tn or mc")->check(CLI::IsMember({"tn", "mc"}));
    fit->add_option("--d", fd, "local dimension");
    fit->add_option("--q", fq, "Renyi index");
    fit->add_option("--t-min", t_min, "first depth of the window");
    fit->add_option("--t-max", t_max, "last depth of the window");
    fit->add_option("--floor", window.floor, "smallest usable deficit");
    fit->add_option("--tail", window.tail_fraction, "fraction of usable depths kept without --t-min");
    fit->add_option("--json", fit_out, "write JSON here instead of stdout");

    auto *figure = app.add_subcommand("figure", "reproduce one figure as CSV, SVG and sidecar JSON");
    std::string fig_id, scale = "quick", fig_dir = "figures";
    int fig_threads = 0;
    figure->add_option("id", fig_id, "figure id")->required()->check(CLI::IsMember(kFigureIds));
    figure->add_option("--scale", scale, "quick or desk")->check(CLI::IsMember({"quick", "desk"}));
    figure->add_option("--out-dir", fig_dir, "output directory");
    figure->add_option("--threads", fig_threads, "worker count");

    auto *cross = app.add_subcommand("crosscheck", "compare the engines with each other and with the oracles");
    CrosscheckParams cp;
    std::string cross_out;
    bool no_q1 = false;
    cross->add_option("--d", cp.d, "local dimension");
    cross->add_option("--N", cp.N, "system size");
    cross->add_option("--q", cp.q, "Renyi index");
    cross->add_option("--depth", cp.depth, "last depth");
    cross->add_option("--realizations", cp.realizations, "Monte Carlo realizations");
    cross->add_option("--seed", cp.seed, "master seed");
    cross->add_option("--eps", cp.eps, "tensor-network cutoff");
    cross->add_option("--threads", cp.threads, "worker count");
    cross->add_flag("--corrupt-k", cp.corrupt_k, "negative control: feed the walk oracle d/(d^2+2)");
    cross->add_flag("--no-q1", no_q1, "skip the deep-circuit Shannon entropy check");
    cross->add_option("--json", cross_out, "write the report here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    auto emit = [](const std::string &path, const nlohmann::json &j) {
        if (path.empty()) {
            std::cout << j.dump(2) << '\n';
        } else {
            std::ofstream(path) << j.dump(2) << '\n';
            std::cout << path << '\n';
        }
    };

    try {
        if (*exact) return report_run(run(assemble(Engine::exact, config_file, s)));
        if (*tn) {
            if (purity_flag) s.emplace_back("cut", "N/2");
            return report_run(run(assemble(Engine::tn, config_file, s)));
        }
        if (*oracle) {
            nlohmann::json j;
            if (kind == "haar") {
                const auto h = oracles::haar_stationary(od, oN, oq);
                j = {{"d", od},         {"N", oN},          {"q", oq},
                     {"ipr", h.ipr},    {"log_ipr", h.log_ipr}, {"entropy", h.entropy},
                     {"entropy_extended", h.entropy_extended}, {"ipr_second_moment", h.ipr_second_moment},
                     {"ipr_std", h.ipr_std}};
            } else if (kind == "walk") {
                const int cut = ocut < 0 ? oN / 2 : ocut;
                j = {{"d", od}, {"N", oN}, {"cut", cut}, {"haar_purity", oracles::haar_purity(od, oN, cut)}};
                for (int t = 0; t <= odepth; ++t)
                    j["purity"].push_back(oracles::walk_purity(od, oN, cut, oracles::walk_steps(oN, cut, t)));
            } else {
                const auto c = oracles::asymptotic_constants(od);
                j = {{"d", od}, {"K", c.K}, {"decay_base", c.base}, {"velocity", c.velocity},
                     {"alpha_large_d", c.alpha_large_d}};
            }
            emit(oracle_out, j);
            return 0;
        }
        if (*fit) {
            ObservableSeries series;
            for (const auto &f : inputs) series.append(read_series_csv(f));
            window.t_min = t_min;
            window.t_max = t_max;
            const auto p = provenance == "tn" ? Provenance::tn : Provenance::mc;
            const auto result = fit_decay(deficit_curves(series, p, fd, fq), window);
            auto j = result.to_json();
            for (std::size_t k = 0; k < result.Ns.size(); ++k) j["hsd_time_eps_1e-2"].push_back(result.hsd_time(k, 1e-2));
            emit(fit_out, j);
            return 0;
        }
        if (*figure) {
            const auto out = reproduce_figure(fig_id, parse_scale(scale), fig_dir, fig_threads);
            for (const auto &f : out.files) std::cout << f << '\n';
            return 0;
        }
        if (*cross) {
            cp.include_q1 = !no_q1;
            const auto rep = crosscheck(cp);
            emit(cross_out, rep.to_json());
            return rep.all_pass() ? 0 : 1;
        }
    } catch (const CapacityError &e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
