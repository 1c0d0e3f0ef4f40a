// oodsim: corpus similarity and OOD correlation reports from the command line.
//
//   oodsim prepare    --config run.toml
//   oodsim similarity --config run.toml [--seed N] [--sample-k K] [--metrics Cosine,Wstn]
//   oodsim correlate  --similarity similarity.csv --performance perf.csv [--method kendall]
//   oodsim heatmap    --correlation correlation.json
//   oodsim run-all    --config run.toml
//
// Settings resolve as flag > environment (OODSIM_*) > config file.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oodsim/oodsim.hpp"

namespace {

using namespace oodsim;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> sample_k;
    std::string metrics;
    std::string out;
    std::string embeddings;
    std::string format;

    std::string similarity;
    std::string performance;
    std::string correlation;
    std::vector<std::string> methods;
    std::optional<double> threshold;
    bool exclude_id = false;
    bool quiet = false;
};

void add_run_flags(CLI::App* cmd, Flags& f, bool config_required) {
    auto* c = cmd->add_option("--config", f.config, "run configuration (.toml or .json)");
    if (config_required) c->required();
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--sample-k", f.sample_k, "samples drawn per corpus");
    cmd->add_option("--metrics", f.metrics, "comma-separated subset of Cosine,Mauve,Wstn,JSD");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--embeddings", f.embeddings, "word-vector file");
    cmd->add_option("--format", f.format, "word-vector encoding: text or binary");
    cmd->add_flag("--quiet", f.quiet, "suppress progress notes on stderr");
}

void add_correlation_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--method", f.methods, "kendall, pearson or spearman (repeatable)");
    cmd->add_option("--threshold", f.threshold, "agreement needed to count as consistent");
    cmd->add_flag("--exclude-id", f.exclude_id, "drop ID rows before correlating");
}

ConfigOverrides flag_overrides(const Flags& f) {
    ConfigOverrides o;
    o.seed = f.seed;
    o.sample_k = f.sample_k;
    if (!f.metrics.empty()) o.metrics = parse_metric_list(f.metrics);
    if (!f.out.empty()) o.output_dir = f.out;
    if (!f.embeddings.empty()) o.embeddings = f.embeddings;
    if (!f.format.empty()) o.embedding_format = parse_vector_format(f.format);
    return o;
}

RunConfig resolve_config(const Flags& f) {
    RunConfig config = f.config.empty() ? RunConfig{} : load_config(f.config);
    apply(config, merge(overrides_from_env(), flag_overrides(f)));
    if (!f.methods.empty()) {
        config.correlation_methods.clear();
        for (const auto& m : f.methods) config.correlation_methods.push_back(parse_correlation_method(m));
    }
    if (f.threshold) config.consistency_threshold = *f.threshold;
    if (f.exclude_id) config.include_id_rows = false;
    if (!f.performance.empty()) config.performance_table = f.performance;
    return config;
}

void print_consistency(const CorrelationAnalysis& a) {
    std::printf("consistent train sets at agreement >= %s\n", format_double(a.threshold).c_str());
    for (const auto& [method, counts] : a.consistency) {
        const std::string name(to_string(method));
        std::printf("  %-9s", name.c_str());
        for (const auto& [metric, n] : counts) {
            const std::string m(to_string(metric));
            std::printf("  %s %d", m.c_str(), n);
        }
        std::printf("\n");
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Embedding-based corpus similarity and OOD correlation reports"};
    app.require_subcommand(1);
    Flags f;

    auto* prepare = app.add_subcommand("prepare", "balance and size-match corpora");
    add_run_flags(prepare, f, true);

    auto* similarity = app.add_subcommand("similarity", "score train/test corpus pairs");
    add_run_flags(similarity, f, true);

    auto* correlate = app.add_subcommand("correlate", "correlate similarity scores with model performance");
    add_run_flags(correlate, f, false);
    correlate->add_option("--similarity", f.similarity, "similarity.csv or similarity.json");
    correlate->add_option("--performance", f.performance, "performance table CSV (train,test,score[,measure])");
    add_correlation_flags(correlate, f);

    auto* heatmap = app.add_subcommand("heatmap", "render correlation heatmaps as SVG");
    add_run_flags(heatmap, f, false);
    heatmap->add_option("--correlation", f.correlation, "correlation.json from the correlate step");
    heatmap->add_option("--similarity", f.similarity, "similarity report (used with --performance)");
    heatmap->add_option("--performance", f.performance, "performance table CSV");
    add_correlation_flags(heatmap, f);

    auto* run_all_cmd = app.add_subcommand("run-all", "prepare (if enabled), similarity, correlate, heatmap");
    add_run_flags(run_all_cmd, f, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::ConfigInvalid);
    }

    const auto config = resolve_config(f);
    std::ostream* log = f.quiet ? nullptr : &std::cerr;
    const auto& out = config.output_dir;

    if (prepare->parsed()) {
        const auto prepared = prepare_data(config, log);
        for (const auto& e : prepared.manifest)
            std::printf("%s (%s): %zu samples -> %s\n", e.name.c_str(), std::string(to_string(e.split)).c_str(), e.size,
                        (prepared_dir(config) / e.file).string().c_str());
    } else if (similarity->parsed()) {
        const auto report = run_similarity(config, log);
        std::printf("%zu records -> %s\n", report.records.size(), (out / "similarity.csv").string().c_str());
    } else if (correlate->parsed()) {
        const fs::path sims = f.similarity.empty() ? out / "similarity.csv" : fs::path(f.similarity);
        if (!config.performance_table) throw ConfigError("correlate needs --performance or a configured table");
        validate_config(config, false);
        const auto analysis = run_correlation(sims, *config.performance_table, correlation_settings(config), out);
        print_consistency(analysis);
        std::printf("-> %s\n", (out / "correlation.csv").string().c_str());
    } else if (heatmap->parsed()) {
        CorrelationAnalysis analysis;
        if (!f.correlation.empty()) {
            analysis = load_correlation(f.correlation);
        } else if (config.performance_table) {
            validate_config(config, false);
            const fs::path sims = f.similarity.empty() ? out / "similarity.csv" : fs::path(f.similarity);
            analysis = compute_correlation(load_similarity_report(sims), load_performance_table(*config.performance_table),
                                           correlation_settings(config));
        } else {
            analysis = load_correlation(out / "correlation.json");
        }
        for (const auto& path : emit_heatmaps(analysis, out)) std::printf("-> %s\n", path.string().c_str());
    } else if (run_all_cmd->parsed()) {
        const auto result = run_all(config, log);
        std::printf("%zu similarity records -> %s\n", result.similarity.records.size(), out.string().c_str());
        if (result.correlation) print_consistency(*result.correlation);
        for (const auto& path : result.heatmaps) std::printf("-> %s\n", path.string().c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const oodsim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return static_cast<int>(oodsim::ExitCode::ConfigInvalid);
    } catch (const oodsim::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return static_cast<int>(oodsim::ExitCode::DataInvalid);
    } catch (const oodsim::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return static_cast<int>(oodsim::ExitCode::IoFailure);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
