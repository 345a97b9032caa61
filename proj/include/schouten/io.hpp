#pragma once

#include "schouten/blowup.hpp"
#include "schouten/conformal.hpp"
#include "schouten/continuation.hpp"
#include "schouten/symfuncs.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace schouten {

using json = nlohmann::ordered_json;

/// Environment variable that overrides `outputs.directory`.
inline constexpr const char* kOutputDirEnv = "SCHOUTEN_OUTPUT_DIR";

struct FProfile {
    std::string kind = "constant";  // constant | cosine
    double value = 1.0;
    double amplitude = 0.0;  // cosine: f = value (1 + amplitude prod_a cos(...))
    int mode = 1;

    std::vector<double> evaluate(const GridChart& chart) const;
};

struct RunConfig {
    // manifold
    std::string backend = "torus";
    int n = 3;
    int resolution = 16;
    std::string recipe = "flat";
    double recipe_amplitude = 0.0;
    int recipe_mode = 1;
    double length = 1.0;
    // function
    std::string family = "ricci_det";
    int k = 0;
    FProfile f;
    double ramp_end = 0.5;
    SolverOptions solver;
    std::string output_dir = "out";
    bool dump_fields = true;
    std::uint64_t seed = 1;
    int verify_samples = 1000;
    std::vector<int> curvature_resolutions{64, 128};
    double blowup_threshold_analysis = -8.0;

    GridChart chart(int resolution_override = 0) const;
    MetricRecipe metric_recipe() const;
    SymFuncSpec function() const;
};

/// Parses and validates a configuration; unknown keys are rejected.
/// Throws ArgumentError on malformed input.
RunConfig config_from_json(const json& j);
RunConfig load_config(const std::filesystem::path& path);
void validate(const RunConfig& c);
json to_json(const RunConfig& c);

/// Output directory after the environment override.
std::filesystem::path output_directory(const RunConfig& c);

Problem build_problem(const RunConfig& c, int resolution_override = 0);

json to_json(const ConditionReport& r);
json to_json(const ContinuationState& s, bool with_field);
json to_json(const BlowupReport& r);
json to_json(const MonitorReport& r);

void write_json(const std::filesystem::path& path, const json& j);
void write_history(const std::filesystem::path& path, const std::vector<ContinuationState>& history,
                   bool with_fields);
std::vector<ContinuationState> read_history(const std::filesystem::path& path);

/// CSV with header `node,<coordinate names>,u`.
void write_field(const std::filesystem::path& path, const GridChart& chart, std::span<const double> u);
std::vector<double> read_field(const std::filesystem::path& path);

/// CSV with header `r,w_hat,2*log r`.
void write_profile(const std::filesystem::path& path, std::span<const RadialSample> profile);

}  // namespace schouten
