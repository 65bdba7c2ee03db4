#include "grouptree/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "grouptree/corrnet.hpp"
#include "grouptree/csv.hpp"
#include "grouptree/digest.hpp"
#include "grouptree/errors.hpp"
#include "grouptree/grouping.hpp"
#include "grouptree/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace grouptree {

namespace {

constexpr const char* kToolVersion = "0.1.0";

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("[") + name + "] " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string("[") + name + "] " + e.what());
    }
}

// ---------------------------------------------------------------------------
// config parsing

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

double to_number(const std::string& key, std::string_view value) {
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "' needs a number, got '" +
                          std::string(value) + "'");
    }
    return v;
}

std::size_t to_count(const std::string& key, std::string_view value) {
    const double v = to_number(key, value);
    if (v < 0.0 || v != std::floor(v) || v > 1e15) {
        throw ConfigError("config key '" + key + "' needs a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, std::string_view value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("config key '" + key + "' needs true or false");
}

std::vector<std::pair<std::size_t, double>> to_schedule(const std::string& key,
                                                        std::string_view value) {
    std::vector<std::pair<std::size_t, double>> schedule;
    if (value.find(':') == std::string_view::npos) {
        const double constant = to_number(key, value);
        if (constant != 0.0) schedule.emplace_back(0, constant);
        return schedule;
    }
    std::size_t pos = 0;
    while (pos <= value.size()) {
        const std::size_t comma = std::min(value.find(',', pos), value.size());
        const std::string_view item = trim(value.substr(pos, comma - pos));
        const std::size_t colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw ConfigError("config key '" + key + "' needs index:value pairs");
        }
        schedule.emplace_back(to_count(key, trim(item.substr(0, colon))),
                              to_number(key, trim(item.substr(colon + 1))));
        pos = comma + 1;
        if (comma == value.size()) break;
    }
    return schedule;
}

}  // namespace

void PipelineConfig::validate() const {
    if (window_length < 2) throw ConfigError("window length T must be at least 2");
    if (window_step < 1) throw ConfigError("window step must be at least 1");
    if (alpha_mode == AlphaMode::fixed && !(alpha_value >= 0.0)) {
        throw ConfigError("fixed alpha must be >= 0");
    }
    if (alpha_mode == AlphaMode::calibrate && !(alpha_tolerance > 0.0)) {
        throw ConfigError("alpha tolerance must be > 0");
    }
    if (!(alpha_max > 0.0)) throw ConfigError("alpha_max must be > 0");
    if (source == Source::csv) {
        const std::pair<const char*, const std::string*> required[] = {
            {"prices", &prices_path},
            {"categories", &categories_path},
            {"external", &external_path},
        };
        for (const auto& [role, path] : required) {
            if (path->empty()) {
                throw ConfigError(std::string("csv source needs a '") + role + "' path");
            }
            if (!fs::exists(*path)) {
                throw ConfigError(std::string("missing ") + role + " file: " + *path);
            }
        }
    } else {
        synth.validate();
    }
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    const fs::path base = fs::path(path).parent_path();
    const auto resolve = [&](std::string_view p) {
        fs::path candidate{std::string(p)};
        if (candidate.is_absolute()) return candidate.string();
        return (base / candidate).string();
    };

    PipelineConfig cfg;
    bool saw_source = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = trim(line);
        if (const auto hash = s.find('#'); hash != std::string_view::npos) {
            s = trim(s.substr(0, hash));
        }
        if (s.empty()) continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              " is not 'key = value': " + std::string(s));
        }
        const std::string key{trim(s.substr(0, eq))};
        const std::string_view value = trim(s.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + " has an empty key or value");
        }

        if (key == "source") {
            if (value == "csv") {
                cfg.source = PipelineConfig::Source::csv;
            } else if (value == "synth") {
                cfg.source = PipelineConfig::Source::synth;
            } else {
                throw ConfigError("source must be 'csv' or 'synth'");
            }
            saw_source = true;
        } else if (key == "prices") {
            cfg.prices_path = resolve(value);
        } else if (key == "categories") {
            cfg.categories_path = resolve(value);
        } else if (key == "external") {
            cfg.external_path = resolve(value);
        } else if (key == "forward_fill_limit") {
            cfg.gap_policy.forward_fill_limit = to_count(key, value);
        } else if (key == "T") {
            cfg.window_length = to_count(key, value);
        } else if (key == "step") {
            cfg.window_step = to_count(key, value);
        } else if (key == "alpha") {
            if (value == "calibrate") {
                cfg.alpha_mode = AlphaMode::calibrate;
            } else {
                cfg.alpha_mode = AlphaMode::fixed;
                cfg.alpha_value = to_number(key, value);
            }
        } else if (key == "alpha_tolerance") {
            cfg.alpha_tolerance = to_number(key, value);
        } else if (key == "alpha_max") {
            cfg.alpha_max = to_number(key, value);
        } else if (key == "beta_mode") {
            if (value == "per_window") {
                cfg.beta_mode = BetaMode::per_window;
            } else if (value == "full_sample") {
                cfg.beta_mode = BetaMode::full_sample;
            } else {
                throw ConfigError("beta_mode must be 'per_window' or 'full_sample'");
            }
        } else if (key == "index_mode") {
            if (value == "raw") {
                cfg.index_mode = IndexMode::raw;
            } else if (value == "normalized") {
                cfg.index_mode = IndexMode::normalized;
            } else {
                throw ConfigError("index_mode must be 'raw' or 'normalized'");
            }
        } else if (key == "emit_breakdown") {
            cfg.emit_breakdown = to_bool(key, value);
        } else if (key == "synth.sectors") {
            cfg.synth.n_sectors = to_count(key, value);
        } else if (key == "synth.stocks_per_sector") {
            cfg.synth.stocks_per_sector = to_count(key, value);
        } else if (key == "synth.days") {
            cfg.synth.days = to_count(key, value);
        } else if (key == "synth.sector_loading") {
            cfg.synth.sector_loading = to_number(key, value);
        } else if (key == "synth.global_loading") {
            cfg.synth.global_loading = to_number(key, value);
        } else if (key == "synth.noise_sigma") {
            cfg.synth.noise_sigma = to_number(key, value);
        } else if (key == "synth.external_sigma") {
            cfg.synth.external_sigma = to_number(key, value);
        } else if (key == "synth.external_loading") {
            cfg.synth.external_loading_schedule = to_schedule(key, value);
        } else if (key == "synth.seed") {
            cfg.synth.seed = static_cast<std::uint64_t>(to_count(key, value));
        } else if (key == "synth.start_date") {
            cfg.synth.start_date = std::string(value);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    if (!saw_source) throw ConfigError("config needs a 'source' key (csv or synth)");
    return cfg;
}

namespace {

// ---------------------------------------------------------------------------
// run machinery

struct LoadedInputs {
    PricePanel panel;
    CategoryMap categories;
    ExternalReturnSeries external;
    std::map<std::string, std::string> digests;  // role -> sha256 (csv source)
};

LoadedInputs load_inputs(const PipelineConfig& cfg) {
    LoadedInputs in;
    if (cfg.source == PipelineConfig::Source::csv) {
        in.panel = load_panel(cfg.prices_path, {}, cfg.gap_policy);
        in.categories = load_categories(cfg.categories_path);
        in.external = log_returns(load_index_series(cfg.external_path));
        in.digests["prices"] = sha256_file(cfg.prices_path);
        in.digests["categories"] = sha256_file(cfg.categories_path);
        in.digests["external"] = sha256_file(cfg.external_path);
    } else {
        SynthMarket market = generate_market(cfg.synth);
        in.panel = std::move(market.panel);
        in.categories = std::move(market.categories);
        in.external = std::move(market.external);
    }
    // Fail before any compute if a panel ticker lacks a category.
    for (const std::string& ticker : in.panel.tickers) in.categories.category_of(ticker);
    return in;
}

BetaSeries build_betas(const PipelineConfig& cfg, const AlignedReturns& aligned,
                       const std::vector<WindowSpec>& windows) {
    if (cfg.beta_mode == BetaMode::per_window) return beta_series(aligned, windows);
    // Full-sample mode: one exposure per stock over the whole aligned span,
    // replicated across the schedule.
    const std::vector<WindowSpec> whole = {WindowSpec{0, aligned.sample_count(), 1}};
    const BetaSeries full = beta_series(aligned, whole);
    BetaSeries out;
    out.tickers = full.tickers;
    out.window_length = windows.front().length;
    out.window_starts.reserve(windows.size());
    for (const WindowSpec& w : windows) out.window_starts.push_back(w.start);
    out.betas.resize(full.betas.rows(), static_cast<Eigen::Index>(windows.size()));
    for (Eigen::Index w = 0; w < out.betas.cols(); ++w) out.betas.col(w) = full.betas.col(0);
    return out;
}

double nan_skipping_mean(const std::vector<double>& values) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : values) {
        if (!std::isnan(v)) {
            sum += v;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

std::string csv_value(double v) { return std::isnan(v) ? "" : format_double(v); }

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
    if (!out) throw DataError("write failed: " + path.string());
}

std::string render_tree_csv(const SpanningTree& tree) {
    struct Row {
        std::string a, b;
        double rho;
    };
    std::vector<Row> rows;
    rows.reserve(tree.edges.size());
    for (const TreeEdge& e : tree.edges) {
        std::string ta = tree.nodes[e.a];
        std::string tb = tree.nodes[e.b];
        if (tb < ta) std::swap(ta, tb);
        rows.push_back({std::move(ta), std::move(tb), e.rho});
    }
    std::sort(rows.begin(), rows.end(),
              [](const Row& x, const Row& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
    std::string out = "ticker_a,ticker_b,rho\n";
    for (const Row& r : rows) {
        out += r.a;
        out += ',';
        out += r.b;
        out += ',';
        out += format_double(r.rho);
        out += '\n';
    }
    return out;
}

std::string render_breakdown_csv(const std::map<std::string, CategoryBreakdown>& breakdown) {
    std::string out = "category,same_category_edges,node_count\n";
    for (const auto& [category, counts] : breakdown) {
        out += category;
        out += ',';
        out += std::to_string(counts.same_category_edges);
        out += ',';
        out += std::to_string(counts.node_count);
        out += '\n';
    }
    return out;
}

json config_echo(const PipelineConfig& cfg) {
    json echo;
    echo["source"] = cfg.source == PipelineConfig::Source::csv ? "csv" : "synth";
    echo["window_length"] = cfg.window_length;
    echo["window_step"] = cfg.window_step;
    echo["alpha_mode"] = cfg.alpha_mode == AlphaMode::calibrate ? "calibrate" : "fixed";
    if (cfg.alpha_mode == AlphaMode::fixed) {
        echo["alpha"] = cfg.alpha_value;
    } else {
        echo["alpha_tolerance"] = cfg.alpha_tolerance;
        echo["alpha_max"] = cfg.alpha_max;
    }
    echo["beta_mode"] = cfg.beta_mode == BetaMode::per_window ? "per_window" : "full_sample";
    echo["index_mode"] = cfg.index_mode == IndexMode::raw ? "raw" : "normalized";
    echo["emit_breakdown"] = cfg.emit_breakdown;
    if (cfg.source == PipelineConfig::Source::csv) {
        echo["forward_fill_limit"] = cfg.gap_policy.forward_fill_limit;
    } else {
        json synth;
        synth["sectors"] = cfg.synth.n_sectors;
        synth["stocks_per_sector"] = cfg.synth.stocks_per_sector;
        synth["days"] = cfg.synth.days;
        synth["sector_loading"] = cfg.synth.sector_loading;
        synth["global_loading"] = cfg.synth.global_loading;
        synth["noise_sigma"] = cfg.synth.noise_sigma;
        synth["external_sigma"] = cfg.synth.external_sigma;
        json schedule = json::array();
        for (const auto& [from, loading] : cfg.synth.external_loading_schedule) {
            schedule.push_back({{"from", from}, {"loading", loading}});
        }
        synth["external_loading_schedule"] = schedule;
        synth["seed"] = cfg.synth.seed;
        synth["start_date"] = cfg.synth.start_date;
        echo["synth"] = synth;
    }
    return echo;
}

struct PreparedRun {
    LoadedInputs inputs;
    IndexSeries custom_index;
    AlignedReturns aligned;
    std::vector<WindowSpec> windows;
    BetaSeries betas;
};

PreparedRun prepare(const PipelineConfig& cfg) {
    cfg.validate();
    PreparedRun run;
    run.inputs = stage("ingest", [&] { return load_inputs(cfg); });
    run.custom_index =
        stage("index", [&] { return build_custom_index(run.inputs.panel, cfg.index_mode); });
    stage("align", [&] {
        const ReturnPanel returns = log_returns(run.inputs.panel);
        const LaggedAlignment alignment =
            align_lagged(returns.calendar, run.inputs.external.calendar);
        run.aligned = gather_aligned(returns, run.inputs.external, alignment);
        return 0;
    });
    run.windows = stage("windows", [&] {
        return rolling_windows(run.aligned.sample_count(), cfg.window_length, cfg.window_step);
    });
    run.betas = stage("beta", [&] { return build_betas(cfg, run.aligned, run.windows); });
    return run;
}

CalibrationResult resolve_alpha(const PipelineConfig& cfg, const PreparedRun& run) {
    if (cfg.alpha_mode == AlphaMode::calibrate) {
        // Calibrate against the exposures the run will actually apply
        // (per-window or full-sample, per beta_mode).
        return stage("calibrate", [&] {
            return calibrate_alpha(run.aligned, run.betas, run.windows, cfg.alpha_tolerance,
                                   cfg.alpha_max);
        });
    }
    return CalibrationResult{cfg.alpha_value, 0.0, 0, true};
}

}  // namespace

CalibrationResult calibrate_only(const PipelineConfig& config) {
    PipelineConfig cfg = config;
    cfg.alpha_mode = AlphaMode::calibrate;
    const PreparedRun run = prepare(cfg);
    return resolve_alpha(cfg, run);
}

RunManifest run_pipeline(const PipelineConfig& config) {
    if (config.output_dir.empty()) throw ConfigError("run needs an output directory");
    const PreparedRun run = prepare(config);
    const std::vector<WindowSpec>& windows = run.windows;

    CalibrationResult alpha = resolve_alpha(config, run);

    const ModifiedReturnPanel modified = stage("modify", [&] {
        return modified_returns(run.aligned, run.betas, alpha.alpha);
    });

    // Window start dates label every per-window artifact.
    std::vector<std::string> window_dates;
    window_dates.reserve(windows.size());
    for (const WindowSpec& w : windows) window_dates.push_back(run.aligned.dates[w.start]);

    // Raw and modified panels live on the same aligned sample axis, so each
    // window covers the same dates in both.
    ReturnPanel raw_panel;
    raw_panel.tickers = run.aligned.tickers;
    raw_panel.calendar.dates = run.aligned.dates;
    raw_panel.returns = run.aligned.stock;
    ReturnPanel modified_panel;
    modified_panel.tickers = modified.tickers;
    modified_panel.calendar = modified.calendar;
    modified_panel.returns = modified.returns;

    const std::vector<double> xcorr_raw =
        stage("xcorr", [&] { return mean_cross_correlation(run.aligned, windows); });
    const std::vector<double> xcorr_modified = stage("xcorr", [&] {
        AlignedReturns view;
        view.tickers = modified.tickers;
        view.dates = modified.calendar.dates;
        view.stock = modified.returns;
        view.external_lagged = run.aligned.external_lagged.head(
            static_cast<Eigen::Index>(modified.sample_count()));
        return mean_cross_correlation(view, windows);
    });
    if (config.alpha_mode == AlphaMode::fixed) {
        alpha.objective = std::abs(nan_skipping_mean(xcorr_modified));
    }

    std::vector<SpanningTree> raw_trees(windows.size());
    std::vector<SpanningTree> modified_trees(windows.size());
    const unsigned degree = config.parallelism ? config.parallelism : default_parallelism();
    stage("trees", [&] {
        parallel_for(windows.size(), degree, [&](std::size_t w) {
            raw_trees[w] = asset_tree(correlation_matrix(raw_panel, windows[w]));
            modified_trees[w] = asset_tree(correlation_matrix(modified_panel, windows[w]));
        });
        return 0;
    });

    const GroupingSeries g_raw = stage("grouping", [&] {
        return grouping_series(raw_trees, run.inputs.categories, window_dates);
    });
    const GroupingSeries g_modified = stage("grouping", [&] {
        return grouping_series(modified_trees, run.inputs.categories, window_dates);
    });

    // Everything computed; emit the artifacts in a fixed order.
    RunManifest manifest;
    manifest.stock_count = run.inputs.panel.stock_count();
    manifest.panel_dates = run.inputs.panel.length();
    manifest.aligned_pairs = run.aligned.sample_count();
    manifest.window_count = windows.size();
    manifest.alpha = alpha;
    manifest.alpha_mode = config.alpha_mode;
    manifest.input_digests = run.inputs.digests;

    const fs::path out_dir{config.output_dir};
    fs::create_directories(out_dir / "trees_raw");
    fs::create_directories(out_dir / "trees_modified");
    if (config.emit_breakdown) {
        fs::create_directories(out_dir / "breakdowns_raw");
        fs::create_directories(out_dir / "breakdowns_modified");
    }

    {
        std::string csv = "date,level\n";
        for (std::size_t t = 0; t < run.custom_index.values.size(); ++t) {
            csv += run.custom_index.calendar.dates[t];
            csv += ',';
            csv += format_double(run.custom_index.values[t]);
            csv += '\n';
        }
        write_file(out_dir / "custom_index.csv", csv);
        manifest.output_files.push_back("custom_index.csv");
    }
    {
        std::string csv = "window_start_date,raw_mean,modified_mean\n";
        for (std::size_t w = 0; w < windows.size(); ++w) {
            csv += window_dates[w];
            csv += ',';
            csv += csv_value(xcorr_raw[w]);
            csv += ',';
            csv += csv_value(xcorr_modified[w]);
            csv += '\n';
        }
        write_file(out_dir / "mean_xcorr.csv", csv);
        manifest.output_files.push_back("mean_xcorr.csv");
    }
    {
        std::string csv =
            "window_start_date,G_raw,G_modified,G_raw_relative,G_modified_relative\n";
        for (std::size_t w = 0; w < windows.size(); ++w) {
            csv += window_dates[w];
            csv += ',';
            csv += csv_value(g_raw.values[w]);
            csv += ',';
            csv += csv_value(g_modified.values[w]);
            csv += ',';
            csv += csv_value(g_raw.relative_values[w]);
            csv += ',';
            csv += csv_value(g_modified.relative_values[w]);
            csv += '\n';
        }
        write_file(out_dir / "grouping.csv", csv);
        manifest.output_files.push_back("grouping.csv");
    }
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const std::string raw_name = "trees_raw/tree_" + window_dates[w] + ".csv";
        const std::string mod_name = "trees_modified/tree_" + window_dates[w] + ".csv";
        write_file(out_dir / raw_name, render_tree_csv(raw_trees[w]));
        write_file(out_dir / mod_name, render_tree_csv(modified_trees[w]));
        manifest.output_files.push_back(raw_name);
        manifest.output_files.push_back(mod_name);
        if (config.emit_breakdown) {
            const std::string raw_bd = "breakdowns_raw/breakdown_" + window_dates[w] + ".csv";
            const std::string mod_bd =
                "breakdowns_modified/breakdown_" + window_dates[w] + ".csv";
            write_file(out_dir / raw_bd, render_breakdown_csv(per_category_breakdown(
                                             raw_trees[w], run.inputs.categories)));
            write_file(out_dir / mod_bd, render_breakdown_csv(per_category_breakdown(
                                             modified_trees[w], run.inputs.categories)));
            manifest.output_files.push_back(raw_bd);
            manifest.output_files.push_back(mod_bd);
        }
    }

    json alpha_json;
    alpha_json["mode"] = config.alpha_mode == AlphaMode::calibrate ? "calibrate" : "fixed";
    alpha_json["alpha"] = alpha.alpha;
    alpha_json["objective"] = alpha.objective;
    alpha_json["evaluations"] = alpha.evaluations;
    alpha_json["tolerance_met"] = alpha.tolerance_met;
    write_file(out_dir / "alpha_calibration.json", alpha_json.dump(2) + "\n");
    manifest.output_files.push_back("alpha_calibration.json");

    std::sort(manifest.output_files.begin(), manifest.output_files.end());

    json mjson;
    mjson["format"] = 1;
    mjson["tool"] = {{"name", "grouptree"}, {"version", kToolVersion}};
    mjson["config"] = config_echo(config);
    if (!manifest.input_digests.empty()) {
        json inputs;
        inputs["prices"] = {{"path", config.prices_path},
                            {"sha256", manifest.input_digests.at("prices")}};
        inputs["categories"] = {{"path", config.categories_path},
                                {"sha256", manifest.input_digests.at("categories")}};
        inputs["external"] = {{"path", config.external_path},
                              {"sha256", manifest.input_digests.at("external")}};
        mjson["inputs"] = inputs;
    }
    mjson["data"] = {{"stocks", manifest.stock_count},
                     {"panel_dates", manifest.panel_dates},
                     {"aligned_pairs", manifest.aligned_pairs},
                     {"window_count", manifest.window_count},
                     {"first_window_start", window_dates.front()},
                     {"last_window_start", window_dates.back()}};
    mjson["alpha"] = alpha_json;
    mjson["outputs"] = manifest.output_files;
    write_file(out_dir / "manifest.json", mjson.dump(2) + "\n");
    manifest.output_files.push_back("manifest.json");
    std::sort(manifest.output_files.begin(), manifest.output_files.end());

    return manifest;
}

}  // namespace grouptree
