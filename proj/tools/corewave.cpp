#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "corewave/corewave.hpp"
#include "corewave/fetch.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace corewave;

namespace {

constexpr std::uint64_t kDefaultSeed = 20061010;

struct Globals {
    std::string config;
    std::uint64_t seed = kDefaultSeed;
    std::string out = "out";
};

int exit_code_for(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::config: return 2;
        case ErrorCategory::data: return 3;
        case ErrorCategory::numerical: return 4;
    }
    return 1;
}

pipeline::EvaluationConfig load_or_default(const Globals& g) {
    return g.config.empty() ? pipeline::EvaluationConfig{} : pipeline::load_config(g.config);
}

fs::path ensure_out(const Globals& g) {
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec || !fs::is_directory(g.out)) fail(ErrorCode::IoError, "cannot create output directory " + g.out);
    return g.out;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + p.string());
    return out;
}

std::string num(double v) { return pipeline::format_number(v); }

void cmd_decompose(const Globals& g, const std::string& input, bool is_index, const std::string& spec_text) {
    auto series = pipeline::load_series_csv(input);
    if (is_index) series = estimators::yoy_log_inflation(series);
    const auto spec = wavelet::parse_spec(spec_text, 1);
    const auto d = wavelet::decompose(series, spec);
    const fs::path dir = ensure_out(g);

    auto out = open_out(dir / "decomposition.tsv");
    out << "date\toriginal";
    for (int j = 1; j <= spec.level; ++j) out << "\tA" << j;
    for (int j = 1; j <= spec.level; ++j) out << "\tD" << j;
    out << '\n';
    std::vector<std::vector<double>> a, det;
    for (int j = 1; j <= spec.level; ++j) {
        a.push_back(wavelet::reconstruct_approximation(d, j));
        det.push_back(wavelet::reconstruct_details(d, j));
    }
    for (std::size_t t = 0; t < series.size(); ++t) {
        out << series.start.plus(static_cast<int>(t)).to_string() << '\t' << num(series.values[t]);
        for (const auto& v : a) out << '\t' << num(v[t]);
        for (const auto& v : det) out << '\t' << num(v[t]);
        out << '\n';
    }

    auto coef = open_out(dir / "coefficients.tsv");
    coef << "kind\tlevel\tindex\tvalue\n";
    for (std::size_t k = 0; k < d.approx.size(); ++k) coef << "approx\t" << spec.level << '\t' << k << '\t' << num(d.approx[k]) << '\n';
    for (std::size_t j = 0; j < d.details.size(); ++j) {
        for (std::size_t k = 0; k < d.details[j].size(); ++k) coef << "detail\t" << j + 1 << '\t' << k << '\t' << num(d.details[j][k]) << '\n';
    }
    std::cout << "wrote " << (dir / "decomposition.tsv").string() << " and " << (dir / "coefficients.tsv").string() << " ("
              << d.extension_mode << " extension)\n";
}

void cmd_measure(const Globals& g, const std::vector<std::string>& names) {
    const auto cfg = load_or_default(g);
    const auto set = pipeline::build_measures(cfg);
    const fs::path dir = ensure_out(g);
    std::size_t written = 0;
    for (const auto& m : set.measures) {
        if (!names.empty() && std::find(names.begin(), names.end(), m.spec.name) == names.end()) continue;
        pipeline::write_series_csv(dir / (m.spec.name + ".csv"), m.series);
        ++written;
    }
    for (const auto& n : names) {
        if (std::none_of(set.measures.begin(), set.measures.end(), [&](const auto& m) { return m.spec.name == n; })) {
            fail(ErrorCode::ConfigError, "measure " + n + " is not configured");
        }
    }
    pipeline::write_series_csv(dir / "parent.csv", set.parent);
    std::cout << "wrote " << written << " measure(s) over " << set.window.to_string() << " to " << dir.string() << "\n";
}

void cmd_select(const Globals& g) {
    const auto cfg = load_or_default(g);
    const auto parent = pipeline::load_sample_parent(cfg);
    const auto outcome = selection::run_selection(parent, cfg.selection);
    const fs::path dir = ensure_out(g);

    auto audit = open_out(dir / "selection_audit.tsv");
    audit << selection::kAuditHeader << '\n';
    for (const auto& c : outcome.candidates) audit << selection::audit_line(c) << '\n';

    auto kept = open_out(dir / "selection_retained.tsv");
    kept << "spec\tshape\n";
    for (const auto& c : outcome.retained) kept << c.spec.name() << '\t' << (c.shape ? selection::shape_name(*c.shape) : "-") << '\n';

    const auto& s = cfg.selection;
    auto meta = open_out(dir / "selection_metadata.tsv");
    meta << "key\tvalue\n";
    meta << "window\t" << window_of(parent).to_string() << '\n';
    meta << "candidates\t" << outcome.candidates.size() << '\n';
    meta << "retained\t" << outcome.retained.size() << '\n';
    meta << "jb_min_p\t" << num(s.jb.min_p) << '\n';
    meta << "jb_rule\t" << (s.jb.rule == selection::JbRule::own_level_normal ? "own_level_normal" : "stop_before_normal") << '\n';
    meta << "entropy_kind\t" << (s.entropy.kind == wavelet::EntropyKind::shannon ? "shannon" : "log_energy") << '\n';
    meta << "entropy_tolerance\t" << num(s.entropy.tolerance) << '\n';
    meta << "similarity_threshold\t" << num(s.similarity_threshold) << '\n';
    meta << "shape_plateau_fraction\t" << num(s.shape.plateau_fraction) << '\n';
    meta << "shape_pointed_ratio\t" << num(s.shape.pointed_ratio) << '\n';
    std::cout << outcome.retained.size() << " of " << outcome.candidates.size() << " candidates retained; audit in " << dir.string() << "\n";
}

void cmd_evaluate(const Globals& g, const std::string& format) {
    const auto cfg = load_or_default(g);
    const auto fmt = pipeline::parse_report_format(format);
    const auto report = pipeline::run_evaluation(cfg);
    const auto files = pipeline::emit_report(report, fmt, g.out);
    std::cout << "evaluated " << report.measures.size() << " measures over " << report.window.to_string() << "; wrote " << files.size()
              << " files to " << g.out << "\n";
}

void cmd_gen_critical_values(const Globals& g, int replications) {
    if (replications < 1000) fail(ErrorCode::ConfigError, "use at least 1000 replications");
    const auto table = econometrics::simulate_critical_values(replications, g.seed);
    const fs::path dir = ensure_out(g);
    char header[160];
    std::snprintf(header, sizeof header,
                  "Lower-tail quantiles of unit-root test statistics under the null; %d replications, seed %llu", replications,
                  static_cast<unsigned long long>(g.seed));
    auto out = open_out(dir / "critical_values.txt");
    out << table.to_text(header);
    std::cout << "wrote " << (dir / "critical_values.txt").string() << "\n";
}

void cmd_fetch(const Globals& g, const std::string& url, std::string name, bool raw, bool out_given) {
    if (name.empty()) {
        name = url.substr(url.find_last_of('/') + 1);
        name = name.substr(0, name.find('?'));
        if (name.empty()) fail(ErrorCode::ConfigError, "cannot derive a file name from the URL; pass --name");
        if (!name.ends_with(".csv")) name += ".csv";
    }
    const auto cfg = load_or_default(g);
    const fs::path dest = out_given ? fs::path(g.out) / name : cfg.resolve(name);
    const auto bytes = fetch::fetch_csv(url, dest, !raw);
    std::cout << "fetched " << bytes << " bytes into " << dest.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Core inflation measures from wavelet decompositions, and their evaluation"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Configuration file (INI sections: data, evaluation, smoother, selection, measures)");
    app.add_option("--seed", g.seed, "Seed for simulation subcommands")->capture_default_str();
    auto* out_opt = app.add_option("--out", g.out, "Output directory")->capture_default_str();

    auto* decompose = app.add_subcommand("decompose", "Wavelet decomposition of a monthly series");
    std::string input, spec_text = "db10-L4";
    bool is_index = false;
    decompose->add_option("--input", input, "CSV with date,value")->required()->check(CLI::ExistingFile);
    decompose->add_option("--wavelet", spec_text, "Wavelet and level, e.g. db10-L4, sym5-L5, haar-L2")->capture_default_str();
    decompose->add_flag("--index", is_index, "Input is a price index; decompose its year-on-year inflation");

    auto* measure = app.add_subcommand("measure", "Build core inflation measures and write them as CSV");
    std::vector<std::string> names;
    measure->add_option("--measure", names, "Measure name (repeatable; default: all configured)");

    auto* select = app.add_subcommand("select", "Run the wavelet selection procedure and write the audit");

    auto* evaluate = app.add_subcommand("evaluate", "Run the full evaluation and write all tables");
    std::string format = "tsv";
    evaluate->add_option("--format", format, "tsv or json-lines")->check(CLI::IsMember({"tsv", "json-lines", "jsonl"}))->capture_default_str();

    auto* gencv = app.add_subcommand("gen-critical-values", "Simulate the unit-root critical-value table");
    int replications = 200000;
    gencv->add_option("--replications", replications, "Monte Carlo replications per cell")->capture_default_str();

    auto* fetch_cmd = app.add_subcommand("fetch", "Download a CSV into the archive directory");
    std::string url, name;
    bool raw = false;
    fetch_cmd->add_option("--url", url, "http(s) URL of the CSV")->required();
    fetch_cmd->add_option("--name", name, "File name in the archive (default: last URL segment)");
    fetch_cmd->add_flag("--raw", raw, "Store the body unchanged, without header normalisation or validation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*decompose) cmd_decompose(g, input, is_index, spec_text);
        else if (*measure) cmd_measure(g, names);
        else if (*select) cmd_select(g);
        else if (*evaluate) cmd_evaluate(g, format);
        else if (*gencv) cmd_gen_critical_values(g, replications);
        else if (*fetch_cmd) cmd_fetch(g, url, name, raw, out_opt->count() > 0);
    } catch (const Error& e) {
        std::cerr << "corewave: " << e.what() << "\n";
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << "corewave: error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
