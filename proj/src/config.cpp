#include "qdeloc/config.hpp"
#include "qdeloc/errors.hpp"
#include "qdeloc/exactsim.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qdeloc::harness {

namespace {

std::string trimmed(std::string_view s) { return boost::algorithm::trim_copy(std::string(s)); }

template <class T> T parse_number(std::string_view key, std::string_view text) {
    try {
        return boost::lexical_cast<T>(trimmed(text));
    } catch (const boost::bad_lexical_cast &) {
        throw ConfigError(fmt::format("cannot parse '{}' for {}", text, key));
    }
}

bool parse_bool(std::string_view key, std::string_view text) {
    const auto t = boost::algorithm::to_lower_copy(trimmed(text));
    if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
    if (t == "0" || t == "false" || t == "no" || t == "off") return false;
    throw ConfigError(fmt::format("cannot parse '{}' as a boolean for {}", text, key));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> parts;
    const auto text = trimmed(s);
    if (text.empty()) return parts;
    boost::algorithm::split(parts, text, boost::is_any_of(","));
    for (auto &p : parts) boost::algorithm::trim(p);
    return parts;
}

} // namespace

std::string_view engine_name(Engine e) {
    switch (e) {
    case Engine::exact: return "exact";
    case Engine::tn: return "tn";
    case Engine::oracle: return "oracle";
    }
    return "?";
}

Engine parse_engine(std::string_view s) {
    const auto t = trimmed(s);
    if (t == "exact") return Engine::exact;
    if (t == "tn") return Engine::tn;
    if (t == "oracle") return Engine::oracle;
    throw ConfigError(fmt::format("unknown engine '{}'", s));
}

std::vector<int> parse_int_list(std::string_view s) {
    std::vector<int> out;
    for (const auto &part : split_list(s)) {
        std::vector<std::string> r;
        boost::algorithm::split(r, part, boost::is_any_of(":"));
        if (r.size() == 1) {
            out.push_back(parse_number<int>("list", r[0]));
            continue;
        }
        if (r.size() > 3) throw ConfigError(fmt::format("bad range '{}'", part));
        const int a = parse_number<int>("range", r[0]);
        const int b = parse_number<int>("range", r[1]);
        const int step = r.size() == 3 ? parse_number<int>("range", r[2]) : 1;
        if (step <= 0 || b < a) throw ConfigError(fmt::format("bad range '{}'", part));
        for (int v = a; v <= b; v += step) out.push_back(v);
    }
    return out;
}

std::vector<double> parse_real_list(std::string_view s) {
    std::vector<double> out;
    for (const auto &part : split_list(s)) out.push_back(parse_number<double>("list", part));
    return out;
}

void apply_setting(ExperimentConfig &c, std::string_view raw_key, std::string_view value) {
    auto key = trimmed(raw_key);
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "engine")
        c.engine = parse_engine(value);
    else if (key == "d")
        c.d = parse_number<int>(key, value);
    else if (key == "N" || key == "n")
        c.Ns = parse_int_list(value);
    else if (key == "q")
        c.qs = parse_real_list(value);
    else if (key == "depth")
        c.depth = parse_number<int>(key, value);
    else if (key == "realizations")
        c.realizations = parse_number<std::uint64_t>(key, value);
    else if (key == "seed")
        c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "eps")
        c.eps = parse_number<double>(key, value);
    else if (key == "chi_max")
        c.chi_max = parse_number<int>(key, value);
    else if (key == "allow_q4")
        c.allow_q4 = parse_bool(key, value);
    else if (key == "cuts" || key == "cut" || key == "purity_cut") {
        c.cuts.clear();
        for (const auto &p : split_list(value)) {
            // "N/2" is accepted literally.
            if (p == "N/2" || p == "n/2")
                c.cuts.push_back(-1);
            else
                c.cuts.push_back(parse_number<int>(key, p));
        }
    } else if (key == "sum_bipartitions")
        c.sum_bipartitions = parse_bool(key, value);
    else if (key == "random_local_basis")
        c.random_local_basis = parse_bool(key, value);
    else if (key == "bootstrap")
        c.bootstrap = parse_number<int>(key, value);
    else if (key == "threads")
        c.threads = parse_number<int>(key, value);
    else if (key == "output" || key == "out")
        c.output = trimmed(value);
    else if (key == "run_dir")
        c.run_dir = trimmed(value);
    else
        throw ConfigError(fmt::format("unknown configuration key '{}'", raw_key));
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trimmed(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", lineno));
        auto value = trimmed(std::string_view(line).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        apply_setting(base, std::string_view(line).substr(0, eq), value);
    }
    return base;
}

ExperimentConfig load_config(const std::string &path, ExperimentConfig base) {
    std::ifstream f(path);
    if (!f) throw ConfigError(fmt::format("cannot open config file {}", path));
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

int resolve_cut(int cut, int N) { return cut < 0 ? N / 2 : cut; }

void validate(const ExperimentConfig &c) {
    if (c.d < 2) throw DomainError(fmt::format("local dimension d={} must be >= 2", c.d));
    if (c.Ns.empty()) throw ConfigError("no system size given");
    if (c.qs.empty() && !(c.engine == Engine::tn && c.sum_bipartitions)) throw ConfigError("no Renyi index given");
    if (c.depth < 0) throw ConfigError("depth must be non-negative");
    for (int N : c.Ns) {
        if (N < 2 || N % 2 != 0) throw LayoutError(fmt::format("chain length N={} must be even and >= 2", N));
        for (int cut : c.cuts) {
            const int a = resolve_cut(cut, N);
            if (a < 0 || a > N) throw UnsupportedRegionError(fmt::format("cut {} outside chain of {}", a, N));
        }
    }
    for (double q : c.qs)
        if (!(q > 0.0)) throw DomainError(fmt::format("Renyi index q={} must be positive", q));

    switch (c.engine) {
    case Engine::exact: {
        if (c.realizations < 1) throw ConfigError("exact engine needs at least one realization");
        if (c.cuts.size() > 1) throw ConfigError("exact engine measures one purity cut per run");
        for (int N : c.Ns) {
            const double log_amp = N * std::log2(static_cast<double>(c.d));
            if (log_amp > std::log2(static_cast<double>(exact::kMaxAmplitudes)) + 1e-9)
                throw CapacityError(fmt::format("exact engine: d^N = {}^{} exceeds 2^24 amplitudes", c.d, N));
        }
        break;
    }
    case Engine::tn: {
        for (double q : c.qs) {
            if (q != std::floor(q) || q < 2)
                throw ConfigError(fmt::format("tensor network needs integer q >= 2, got {}", q));
            if (q >= 5 || (q == 4 && !c.allow_q4))
                throw CapacityError(fmt::format("tensor network for q={} is disabled", q));
        }
        if (!(c.eps >= 0.0)) throw ConfigError("eps must be non-negative");
        if (c.chi_max < 1) throw ConfigError("chi_max must be positive");
        if (c.cuts.size() > 1) throw ConfigError("tensor network measures one purity cut per run");
        if (c.sum_bipartitions)
            for (int N : c.Ns)
                if (N > 28) throw CapacityError(fmt::format("bipartition sum needs N <= 28, got {}", N));
        break;
    }
    case Engine::oracle:
        for (double q : c.qs)
            if (q != std::floor(q)) throw ConfigError(fmt::format("closed forms need integer q, got {}", q));
        break;
    }
}

nlohmann::json to_json(const ExperimentConfig &c) {
    nlohmann::json j;
    j["engine"] = engine_name(c.engine);
    j["d"] = c.d;
    j["N"] = c.Ns;
    j["q"] = c.qs;
    j["depth"] = c.depth;
    j["realizations"] = c.realizations;
    j["seed"] = c.seed;
    j["eps"] = c.eps;
    j["chi_max"] = c.chi_max;
    j["allow_q4"] = c.allow_q4;
    j["cuts"] = c.cuts;
    j["sum_bipartitions"] = c.sum_bipartitions;
    j["random_local_basis"] = c.random_local_basis;
    j["bootstrap"] = c.bootstrap;
    j["threads"] = c.threads;
    j["output"] = c.output;
    j["run_dir"] = c.run_dir;
    return j;
}

} // namespace qdeloc::harness
