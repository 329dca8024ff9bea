#pragma once

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace qdeloc::harness {

/// quick: seconds to a minute, for smoke tests. desk: the scaled-down reference runs.
enum class Scale { quick, desk };
Scale parse_scale(std::string_view s);

struct FigureOutput {
    std::string id;
    std::vector<std::string> files;
    /// Parameters used, substitutions against the reference scale, fits and checks.
    nlohmann::json sidecar;
};

inline const std::vector<std::string> kFigureIds{"fig1_left", "fig1_right", "fig2a", "fig2b", "fig2cd", "fig3"};

/// Emit CSV, SVG and <id>.json under out_dir. Unknown ids raise ConfigError.
FigureOutput reproduce_figure(std::string_view id, Scale scale, const std::string &out_dir, int threads = 0);

} // namespace qdeloc::harness
