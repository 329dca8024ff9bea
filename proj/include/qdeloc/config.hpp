#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qdeloc::harness {

enum class Engine { exact, tn, oracle };

std::string_view engine_name(Engine e);
Engine parse_engine(std::string_view s);

/// One experiment. Read from a flat `key = value` file and/or CLI flags (flags applied last win).
struct ExperimentConfig {
    Engine engine = Engine::exact;
    int d = 2;
    std::vector<int> Ns{8};
    std::vector<double> qs{2.0};
    int depth = 20;
    std::uint64_t realizations = 1000;
    std::uint64_t seed = 1;
    double eps = 1e-15;
    int chi_max = 512;
    bool allow_q4 = false;
    /// Left-block sizes for purities; empty means no purity. A cut of -1 stands for N/2.
    std::vector<int> cuts;
    bool sum_bipartitions = false;
    bool random_local_basis = false;
    int bootstrap = 200;
    int threads = 0;
    std::string output = "out.csv";
    /// When set, outputs and manifest.json go under this directory.
    std::string run_dir;
};

/// Set one field from its textual form. Keys use underscores or dashes interchangeably.
void apply_setting(ExperimentConfig &config, std::string_view key, std::string_view value);

/// Parse `key = value` lines; `#` starts a comment. Unknown keys raise ConfigError.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string &path, ExperimentConfig base = {});

/// Engine capability checks (ConfigError / CapacityError), e.g. the tensor network needs integer q <= 3
/// unless q = 4 is enabled, and the exact engine caps d^N.
void validate(const ExperimentConfig &config);

/// Resolve a cut for chain length N (-1 means N/2).
int resolve_cut(int cut, int N);

nlohmann::json to_json(const ExperimentConfig &config);

/// Comma-separated lists, "a:b" inclusive ranges and "a:b:step" are accepted for integer lists.
std::vector<int> parse_int_list(std::string_view s);
std::vector<double> parse_real_list(std::string_view s);

} // namespace qdeloc::harness
