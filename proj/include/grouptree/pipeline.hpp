#pragma once

#include <map>
#include <string>
#include <vector>

#include "grouptree/ingest.hpp"
#include "grouptree/returns.hpp"
#include "grouptree/synth.hpp"

namespace grouptree {

enum class AlphaMode { fixed, calibrate };
enum class BetaMode { per_window, full_sample };

/// Full run description. Analytic parameters come from a flat key=value
/// config file; output_dir and parallelism are execution details supplied
/// separately (CLI flags / environment) so a config describes the same run
/// wherever it executes.
struct PipelineConfig {
    enum class Source { csv, synth } source = Source::synth;

    // csv source
    std::string prices_path;
    std::string categories_path;
    std::string external_path;
    GapPolicy gap_policy;

    // synth source
    SynthConfig synth;

    std::size_t window_length = 750;
    std::size_t window_step = 20;

    AlphaMode alpha_mode = AlphaMode::fixed;
    double alpha_value = 2.25;
    double alpha_tolerance = 1e-3;
    double alpha_max = 10.0;

    BetaMode beta_mode = BetaMode::per_window;
    IndexMode index_mode = IndexMode::raw;
    bool emit_breakdown = false;

    // execution
    std::string output_dir;
    unsigned parallelism = 0;  // 0 = default_parallelism()

    void validate() const;
};

/// Parses the flat `key = value` config format ('#' comments allowed).
/// Relative input paths are resolved against the config file's directory.
PipelineConfig load_pipeline_config(const std::string& path);

struct RunManifest {
    std::size_t stock_count = 0;
    std::size_t panel_dates = 0;
    std::size_t aligned_pairs = 0;
    std::size_t window_count = 0;
    CalibrationResult alpha;
    AlphaMode alpha_mode = AlphaMode::fixed;
    std::vector<std::string> output_files;          // relative to output_dir, sorted
    std::map<std::string, std::string> input_digests;  // role -> sha256 (csv source)
};

/// Runs ingest -> returns -> (align, beta, alpha, modified) -> per-window
/// correlation + tree for raw and modified returns -> grouping series, and
/// writes all artifacts plus manifest.json into output_dir. All numeric work
/// is merged in window order, so outputs are byte-identical for any
/// parallelism degree. Nothing is written until the whole run has computed.
RunManifest run_pipeline(const PipelineConfig& config);

/// The calibration part of the pipeline alone (shares all ingest and
/// windowing behavior with run_pipeline).
CalibrationResult calibrate_only(const PipelineConfig& config);

}  // namespace grouptree
