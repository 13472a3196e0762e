// redlab: detect redundant activity labels in event logs, generate
// synthetic perturbations, and score detection quality over the H_{x,y}
// grid. Exit codes: 0 success, 1 configuration error, 2 I/O or parse
// error; machine-readable error JSON goes to standard error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "redlab/csv.hpp"
#include "redlab/detector.hpp"
#include "redlab/evaluation.hpp"
#include "redlab/event_log.hpp"
#include "redlab/parallel.hpp"
#include "redlab/relation_graph.hpp"
#include "redlab/report.hpp"
#include "redlab/semantic.hpp"
#include "redlab/version.hpp"
#include "redlab/xes.hpp"

namespace {

using redlab::ConfigError;
using redlab::ParseError;

// ---------------------------------------------------------------------
// Flat key=value settings file. Command-line flags always win; file values
// only fill options the user did not pass. Unknown keys are rejected so a
// typo cannot silently change a run.

const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        // global
        "threads", "seed", "format",
        // input
        "input", "input-format", "map", "value-cols", "numeric-keys",
        "delimiter",
        // detector
        "theta-c", "theta-d", "theta-s", "combination", "at-least-k",
        "low-frequency", "low-frequency-combination", "low-frequency-k",
        "theta-ld", "theta-a", "trim", "group", "strict-na", "cf-weights",
        "attributes", "semantic-provider", "vectors",
        // detect outputs
        "out", "csv",
        // perturb
        "select-pct", "rename-pct", "out-log", "out-truth",
        // evaluate
        "x", "y", "replicates", "known", "out-raw", "out-summary",
        // export-dfg
        "kind",
    };
    return keys;
}

std::string trimmed(const std::string& s) {
    const auto from = s.find_first_not_of(" \t");
    if (from == std::string::npos) return "";
    const auto to = s.find_last_not_of(" \t");
    return s.substr(from, to - from + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

class FlatConfig {
public:
    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open '" + path + "'");
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::string text = trimmed(line);
            if (text.empty() || text[0] == '#') continue;
            const auto eq = text.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
            const std::string key = trimmed(text.substr(0, eq));
            const std::string value = trimmed(text.substr(eq + 1));
            if (key.empty())
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": empty key");
            if (known_config_keys().count(key) == 0)
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
            if (!values_.emplace(key, value).second)
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": duplicate key '" + key + "'");
        }
    }

    bool filled(const CLI::Option* opt, const std::string& key,
                std::string& raw) const {
        if (opt != nullptr && opt->count() > 0) return false; // flag wins
        const auto it = values_.find(key);
        if (it == values_.end()) return false;
        raw = it->second;
        return true;
    }

    void fill(const CLI::Option* opt, const std::string& key,
              std::string& target) const {
        std::string raw;
        if (filled(opt, key, raw)) target = raw;
    }

    void fill(const CLI::Option* opt, const std::string& key,
              double& target) const {
        std::string raw;
        if (filled(opt, key, raw)) target = parse_number(key, raw);
    }

    void fill(const CLI::Option* opt, const std::string& key,
              std::optional<double>& target) const {
        std::string raw;
        if (filled(opt, key, raw)) target = parse_number(key, raw);
    }

    void fill(const CLI::Option* opt, const std::string& key,
              unsigned& target) const {
        std::string raw;
        if (filled(opt, key, raw))
            target = static_cast<unsigned>(parse_integer(key, raw));
    }

    void fill(const CLI::Option* opt, const std::string& key,
              std::optional<std::uint64_t>& target) const {
        std::string raw;
        if (filled(opt, key, raw)) target = parse_integer(key, raw);
    }

    void fill(const CLI::Option* opt, const std::string& key,
              bool& target) const {
        std::string raw;
        if (!filled(opt, key, raw)) return;
        if (raw == "true" || raw == "1" || raw == "yes" || raw == "on")
            target = true;
        else if (raw == "false" || raw == "0" || raw == "no" || raw == "off")
            target = false;
        else
            throw ConfigError("config key '" + key + "': expected a boolean, "
                              "got '" + raw + "'");
    }

    void fill(const CLI::Option* opt, const std::string& key,
              std::vector<std::string>& target) const {
        std::string raw;
        if (filled(opt, key, raw)) target = split_commas(raw);
    }

    void fill(const CLI::Option* opt, const std::string& key,
              std::vector<double>& target) const {
        std::string raw;
        if (!filled(opt, key, raw)) return;
        target.clear();
        for (const auto& item : split_commas(raw))
            target.push_back(parse_number(key, trimmed(item)));
    }

private:
    static double parse_number(const std::string& key,
                               const std::string& raw) {
        const char* begin = raw.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin || *end != '\0')
            throw ConfigError("config key '" + key + "': not a number: '" +
                              raw + "'");
        return v;
    }

    static std::uint64_t parse_integer(const std::string& key,
                                       const std::string& raw) {
        const char* begin = raw.c_str();
        char* end = nullptr;
        const std::uint64_t v = std::strtoull(begin, &end, 10);
        if (end == begin || *end != '\0')
            throw ConfigError("config key '" + key +
                              "': not a non-negative integer: '" + raw + "'");
        return v;
    }

    std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------
// Shared option groups.

struct GlobalOptions {
    std::string config_path;
    unsigned threads = static_cast<unsigned>(redlab::default_thread_count());
    std::optional<std::uint64_t> seed;
    std::string format = "table";

    CLI::Option* threads_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* format_opt = nullptr;

    void apply(const FlatConfig& cfg) {
        cfg.fill(threads_opt, "threads", threads);
        cfg.fill(seed_opt, "seed", seed);
        cfg.fill(format_opt, "format", format);
        if (threads == 0) throw ConfigError("threads must be at least 1");
        if (format != "json" && format != "csv" && format != "table")
            throw ConfigError("format must be json, csv or table");
    }

    /// The seed to use: the given one, or a fresh one to be echoed back.
    std::uint64_t seed_or_generate() const {
        if (seed) return *seed;
        std::random_device rd;
        return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
};

struct InputOptions {
    std::string path;
    std::string format; // "", "csv" or "xes"
    std::string map_spec;
    std::vector<std::string> value_cols;
    std::vector<std::string> numeric_keys;
    std::string delimiter = ",";

    CLI::Option* path_opt = nullptr;
    CLI::Option* format_opt = nullptr;
    CLI::Option* map_opt = nullptr;
    CLI::Option* value_cols_opt = nullptr;
    CLI::Option* numeric_keys_opt = nullptr;
    CLI::Option* delimiter_opt = nullptr;

    void add_to(CLI::App* cmd) {
        path_opt = cmd->add_option("input", path, "event log (.csv or .xes)");
        format_opt = cmd->add_option("--input-format", format,
                                     "input format; default: by extension")
                         ->check(CLI::IsMember({"csv", "xes"}));
        map_opt = cmd->add_option(
            "--map", map_spec,
            "CSV column mapping, e.g. case=CaseID,activity=Activity,time=TS");
        value_cols_opt =
            cmd->add_option("--value-cols", value_cols,
                            "CSV columns holding numeric values")
                ->delimiter(',');
        numeric_keys_opt =
            cmd->add_option("--numeric-keys", numeric_keys,
                            "XES attribute keys holding numeric values")
                ->delimiter(',');
        delimiter_opt = cmd->add_option("--delimiter", delimiter,
                                        "CSV field delimiter (default ,)");
    }

    void apply(const FlatConfig& cfg) {
        cfg.fill(path_opt, "input", path);
        cfg.fill(format_opt, "input-format", format);
        cfg.fill(map_opt, "map", map_spec);
        cfg.fill(value_cols_opt, "value-cols", value_cols);
        cfg.fill(numeric_keys_opt, "numeric-keys", numeric_keys);
        cfg.fill(delimiter_opt, "delimiter", delimiter);
    }

    std::string resolved_format() const {
        if (!format.empty()) return format;
        const auto dot = path.rfind('.');
        if (dot != std::string::npos && path.substr(dot) == ".xes")
            return "xes";
        return "csv";
    }

    redlab::EventLog load() const {
        if (path.empty())
            throw ConfigError("no input log given (positional argument or "
                              "config key 'input')");
        redlab::LoadWarnings warnings;
        redlab::EventLog log = [&] {
            if (resolved_format() == "xes") {
                const std::set<std::string> keys(numeric_keys.begin(),
                                                 numeric_keys.end());
                return redlab::load_xes(path, keys, &warnings);
            }
            redlab::ColumnMapping mapping;
            mapping.case_col = "case";
            mapping.activity_col = "activity";
            mapping.time_col = "timestamp";
            for (const auto& part : map_spec.empty()
                                        ? std::vector<std::string>{}
                                        : split_commas(map_spec)) {
                const auto eq = part.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("--map: expected key=column, got '" +
                                      part + "'");
                const std::string key = trimmed(part.substr(0, eq));
                const std::string column = trimmed(part.substr(eq + 1));
                if (key == "case")
                    mapping.case_col = column;
                else if (key == "activity")
                    mapping.activity_col = column;
                else if (key == "time")
                    mapping.time_col = column;
                else
                    throw ConfigError("--map: unknown key '" + key +
                                      "' (expected case, activity or time)");
            }
            mapping.value_cols = value_cols;
            if (delimiter.size() != 1)
                throw ConfigError("--delimiter must be a single character");
            mapping.delimiter = delimiter[0];
            return redlab::load_csv(path, mapping, &warnings);
        }();

        if (warnings.skipped_events > 0)
            std::cerr << "note: skipped " << warnings.skipped_events
                      << " event(s) without label or timestamp\n";
        if (warnings.date_only_timestamps > 0)
            std::cerr << "note: " << warnings.date_only_timestamps
                      << " date-only timestamp(s) read as midnight UTC\n";
        for (const auto& note : warnings.notes)
            std::cerr << "note: " << note << '\n';
        return log;
    }
};

struct DetectorOptions {
    std::optional<double> theta_c;
    std::optional<double> theta_d;
    std::optional<double> theta_s;
    std::string combination = "all";
    unsigned at_least_k = 1;
    std::optional<double> low_frequency;
    std::string low_frequency_combination = "any";
    unsigned low_frequency_k = 1;
    double theta_ld = 0.9;
    double theta_a = 0.1;
    double trim = 0.0;
    bool group = false;
    bool strict_na = false;
    std::vector<double> cf_weights;
    std::vector<std::string> attributes;
    std::string semantic_provider = "edit";
    std::string vectors_path;

    CLI::Option* theta_c_opt = nullptr;
    CLI::Option* theta_d_opt = nullptr;
    CLI::Option* theta_s_opt = nullptr;
    CLI::Option* combination_opt = nullptr;
    CLI::Option* at_least_k_opt = nullptr;
    CLI::Option* low_frequency_opt = nullptr;
    CLI::Option* low_frequency_combination_opt = nullptr;
    CLI::Option* low_frequency_k_opt = nullptr;
    CLI::Option* theta_ld_opt = nullptr;
    CLI::Option* theta_a_opt = nullptr;
    CLI::Option* trim_opt = nullptr;
    CLI::Option* group_opt = nullptr;
    CLI::Option* strict_na_opt = nullptr;
    CLI::Option* cf_weights_opt = nullptr;
    CLI::Option* attributes_opt = nullptr;
    CLI::Option* semantic_provider_opt = nullptr;
    CLI::Option* vectors_opt = nullptr;

    void add_to(CLI::App* cmd) {
        theta_c_opt = cmd->add_option(
            "--theta-c", theta_c,
            "control-flow threshold; omit to disable the perspective");
        theta_d_opt = cmd->add_option(
            "--theta-d", theta_d,
            "data-value threshold; omit to disable the perspective");
        theta_s_opt = cmd->add_option(
            "--theta-s", theta_s,
            "semantic threshold; omit to disable the perspective");
        combination_opt =
            cmd->add_option("--combination", combination,
                            "how satisfied perspectives combine")
                ->check(CLI::IsMember({"all", "any", "at_least"}));
        at_least_k_opt = cmd->add_option("--at-least-k", at_least_k,
                                         "k for --combination at_least");
        low_frequency_opt = cmd->add_option(
            "--low-frequency", low_frequency,
            "event-count fraction below which the override rule applies");
        low_frequency_combination_opt =
            cmd->add_option("--low-frequency-combination",
                            low_frequency_combination,
                            "override combination for rare labels")
                ->check(CLI::IsMember({"all", "any", "at_least"}));
        low_frequency_k_opt =
            cmd->add_option("--low-frequency-k", low_frequency_k,
                            "k for the at_least override");
        theta_ld_opt = cmd->add_option(
            "--theta-ld", theta_ld,
            "long-distance significance threshold (default 0.9)");
        theta_a_opt = cmd->add_option(
            "--theta-a", theta_a,
            "percentile-vector clustering radius (default 0.1)");
        trim_opt = cmd->add_option(
            "--trim", trim, "fraction trimmed from each end of a dataset");
        group_opt = cmd->add_flag("--group", group,
                                  "add union-find groups over redundant pairs");
        strict_na_opt = cmd->add_flag(
            "--strict-na", strict_na,
            "score inapplicable perspectives as 1 instead of skipping them");
        cf_weights_opt =
            cmd->add_option("--cf-weights", cf_weights,
                            "four weights: directly-out,directly-in,"
                            "indirectly-out,indirectly-in")
                ->delimiter(',');
        attributes_opt =
            cmd->add_option("--attributes", attributes,
                            "per-activity attribute picks, label=attribute")
                ->delimiter(',');
        semantic_provider_opt =
            cmd->add_option("--semantic-provider", semantic_provider,
                            "semantic similarity source (default edit)")
                ->check(CLI::IsMember({"edit", "vectors"}));
        vectors_opt = cmd->add_option(
            "--vectors", vectors_path,
            "word-vector table for --semantic-provider vectors");
    }

    void apply(const FlatConfig& cfg) {
        cfg.fill(theta_c_opt, "theta-c", theta_c);
        cfg.fill(theta_d_opt, "theta-d", theta_d);
        cfg.fill(theta_s_opt, "theta-s", theta_s);
        cfg.fill(combination_opt, "combination", combination);
        cfg.fill(at_least_k_opt, "at-least-k", at_least_k);
        cfg.fill(low_frequency_opt, "low-frequency", low_frequency);
        cfg.fill(low_frequency_combination_opt, "low-frequency-combination",
                 low_frequency_combination);
        cfg.fill(low_frequency_k_opt, "low-frequency-k", low_frequency_k);
        cfg.fill(theta_ld_opt, "theta-ld", theta_ld);
        cfg.fill(theta_a_opt, "theta-a", theta_a);
        cfg.fill(trim_opt, "trim", trim);
        cfg.fill(group_opt, "group", group);
        cfg.fill(strict_na_opt, "strict-na", strict_na);
        cfg.fill(cf_weights_opt, "cf-weights", cf_weights);
        cfg.fill(attributes_opt, "attributes", attributes);
        cfg.fill(semantic_provider_opt, "semantic-provider",
                 semantic_provider);
        cfg.fill(vectors_opt, "vectors", vectors_path);
    }

    redlab::DetectorConfig build() const {
        redlab::DetectorConfig cfg;
        cfg.theta_c = theta_c;
        cfg.theta_d = theta_d;
        cfg.theta_s = theta_s;
        cfg.combination = redlab::combination_from_string(combination);
        cfg.at_least_k = at_least_k;
        if (low_frequency) {
            redlab::LowFrequencyOverride o;
            o.f_low = *low_frequency;
            o.combination =
                redlab::combination_from_string(low_frequency_combination);
            o.at_least_k = low_frequency_k;
            cfg.low_frequency_override = o;
        }
        cfg.theta_ld = theta_ld;
        cfg.theta_a = theta_a;
        cfg.trim = trim;
        cfg.group_transitively = group;
        cfg.strict_na = strict_na;
        if (!cf_weights.empty()) {
            if (cf_weights.size() != 4)
                throw ConfigError("--cf-weights needs exactly 4 values");
            cfg.control_flow_weights = {cf_weights[0], cf_weights[1],
                                        cf_weights[2], cf_weights[3]};
        }
        for (const auto& entry : attributes) {
            const auto eq = entry.find('=');
            if (eq == std::string::npos || eq == 0)
                throw ConfigError(
                    "--attributes: expected label=attribute, got '" + entry +
                    "'");
            cfg.attribute_overrides[entry.substr(0, eq)] =
                entry.substr(eq + 1);
        }
        return cfg;
    }

    std::unique_ptr<redlab::SemanticProvider> make_provider() const {
        if (!theta_s) return nullptr;
        if (semantic_provider == "edit")
            return std::make_unique<redlab::EditProvider>();
        if (vectors_path.empty())
            throw ConfigError(
                "--vectors is required with --semantic-provider vectors");
        return std::make_unique<redlab::VectorProvider>(
            redlab::VectorTable::load(vectors_path));
    }
};

// ---------------------------------------------------------------------
// Small output helpers.

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ParseError("write failed: '" + path + "'");
}

std::string basename_stem(const std::string& path) {
    const auto slash = path.find_last_of('/');
    std::string name =
        slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = name.rfind('.');
    if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
    return name;
}

std::string number_tag(double v) { return redlab::detail::format_double(v); }

// ---------------------------------------------------------------------
// Commands.

struct DetectCommand {
    InputOptions input;
    DetectorOptions detector;
    std::string out_json;
    std::string out_csv;
    CLI::Option* out_json_opt = nullptr;
    CLI::Option* out_csv_opt = nullptr;

    void add_to(CLI::App* cmd) {
        input.add_to(cmd);
        detector.add_to(cmd);
        out_json_opt = cmd->add_option("--out", out_json,
                                       "write the JSON report here");
        out_csv_opt = cmd->add_option("--csv", out_csv,
                                      "write the pair-rows CSV here");
    }

    void run(GlobalOptions& global, const FlatConfig& cfg) {
        global.apply(cfg);
        input.apply(cfg);
        detector.apply(cfg);
        cfg.fill(out_json_opt, "out", out_json);
        cfg.fill(out_csv_opt, "csv", out_csv);

        const auto detector_cfg = detector.build();
        detector_cfg.validate(); // before touching the input
        const auto provider = detector.make_provider();
        const auto log = input.load();
        const auto report = redlab::detect(log, detector_cfg, provider.get(),
                                           global.threads);
        const auto json = redlab::report_to_json(report);

        if (!out_json.empty()) write_text(out_json, json.dump(2) + "\n");
        if (!out_csv.empty()) {
            write_text(out_csv, redlab::report_to_csv(report));
            nlohmann::ordered_json meta;
            meta["version"] = json.at("version");
            meta["config"] = json.at("config");
            meta["log_fingerprint"] = json.at("log_fingerprint");
            write_text(out_csv + ".meta.json", meta.dump(2) + "\n");
        }

        if (global.format == "json")
            std::cout << json.dump(2) << '\n';
        else if (global.format == "csv")
            std::cout << redlab::report_to_csv(report);
        else
            std::cout << "redlab " << redlab::kVersion << " detect\n"
                      << redlab::report_to_table(report);
    }
};

struct PerturbCommand {
    InputOptions input;
    double select_pct = 0.0;
    double rename_pct = 0.0;
    std::string out_log;
    std::string out_truth;
    CLI::Option* select_opt = nullptr;
    CLI::Option* rename_opt = nullptr;
    CLI::Option* out_log_opt = nullptr;
    CLI::Option* out_truth_opt = nullptr;

    void add_to(CLI::App* cmd) {
        input.add_to(cmd);
        select_opt = cmd->add_option("--select-pct", select_pct,
                                     "percentage of labels to perturb (x)");
        rename_opt = cmd->add_option(
            "--rename-pct", rename_pct,
            "percentage of each label's events to rename (y)");
        out_log_opt = cmd->add_option("--out-log", out_log,
                                      "perturbed log path (default: derived "
                                      "from the input name and seed)");
        out_truth_opt = cmd->add_option("--out-truth", out_truth,
                                        "ground-truth CSV path");
    }

    void run(GlobalOptions& global, const FlatConfig& cfg) {
        global.apply(cfg);
        input.apply(cfg);
        cfg.fill(select_opt, "select-pct", select_pct);
        cfg.fill(rename_opt, "rename-pct", rename_pct);
        cfg.fill(out_log_opt, "out-log", out_log);
        cfg.fill(out_truth_opt, "out-truth", out_truth);

        redlab::PerturbationSetting setting;
        setting.select_pct = select_pct;
        setting.rename_pct = rename_pct;
        setting.validate(); // before generating a seed or reading anything
        setting.seed = global.seed_or_generate();

        const auto log = input.load();
        const auto result = redlab::perturb(log, setting);

        const std::string fmt = input.resolved_format();
        const std::string tag = "_x" + number_tag(select_pct) + "_y" +
                                number_tag(rename_pct) + "_seed" +
                                std::to_string(setting.seed);
        const std::string stem = basename_stem(input.path);
        if (out_log.empty())
            out_log = stem + "_perturbed" + tag + (fmt == "xes" ? ".xes"
                                                                : ".csv");
        if (out_truth.empty()) out_truth = stem + "_truth" + tag + ".csv";

        if (fmt == "xes") {
            std::ostringstream buffer;
            redlab::write_xes(result.log, buffer);
            write_text(out_log, buffer.str());
        } else {
            std::ostringstream buffer;
            redlab::write_canonical_csv(result.log, buffer);
            write_text(out_log, buffer.str());
        }
        write_text(out_truth, result.truth.to_csv());

        nlohmann::ordered_json meta;
        meta["version"] = std::string(redlab::kVersion);
        meta["command"] = "perturb";
        meta["input"] = input.path;
        meta["select_pct"] = select_pct;
        meta["rename_pct"] = rename_pct;
        meta["seed"] = setting.seed;
        meta["planted_pairs"] =
            static_cast<std::uint64_t>(result.truth.synthetic().size());
        meta["outputs"] = {{"log", out_log}, {"truth", out_truth}};
        write_text(out_log + ".meta.json", meta.dump(2) + "\n");

        if (global.format == "json") {
            std::cout << meta.dump(2) << '\n';
        } else {
            std::cout << "seed: " << setting.seed << '\n'
                      << "perturbed log: " << out_log << '\n'
                      << "ground truth: " << out_truth << '\n'
                      << "planted pairs: " << result.truth.synthetic().size()
                      << '\n';
        }
    }
};

struct EvaluateCommand {
    InputOptions input;
    DetectorOptions detector;
    std::vector<double> xs{20, 40, 60, 80, 100};
    std::vector<double> ys{1, 5, 10, 15, 20, 25, 30};
    unsigned replicates = 5;
    std::string known_path;
    std::string out_raw = "evaluation_raw.csv";
    std::string out_summary = "evaluation_summary.csv";
    CLI::Option* xs_opt = nullptr;
    CLI::Option* ys_opt = nullptr;
    CLI::Option* replicates_opt = nullptr;
    CLI::Option* known_opt = nullptr;
    CLI::Option* out_raw_opt = nullptr;
    CLI::Option* out_summary_opt = nullptr;

    void add_to(CLI::App* cmd) {
        input.add_to(cmd);
        detector.add_to(cmd);
        xs_opt = cmd->add_option("--x", xs,
                                 "select percentages (default 20..100)")
                     ->delimiter(',');
        ys_opt = cmd->add_option("--y", ys,
                                 "rename percentages (default 1..30)")
                     ->delimiter(',');
        replicates_opt = cmd->add_option("--replicates", replicates,
                                         "perturbations per grid cell");
        known_opt = cmd->add_option(
            "--known", known_path,
            "CSV of known-redundant pairs folded into the ground truth");
        out_raw_opt =
            cmd->add_option("--out-raw", out_raw, "per-run rows CSV path");
        out_summary_opt = cmd->add_option("--out-summary", out_summary,
                                          "per-cell means CSV path");
    }

    void run(GlobalOptions& global, const FlatConfig& cfg) {
        global.apply(cfg);
        input.apply(cfg);
        detector.apply(cfg);
        cfg.fill(xs_opt, "x", xs);
        cfg.fill(ys_opt, "y", ys);
        cfg.fill(replicates_opt, "replicates", replicates);
        cfg.fill(known_opt, "known", known_path);
        cfg.fill(out_raw_opt, "out-raw", out_raw);
        cfg.fill(out_summary_opt, "out-summary", out_summary);

        const auto detector_cfg = detector.build();
        detector_cfg.validate();
        const auto provider = detector.make_provider();
        const std::uint64_t master_seed = global.seed_or_generate();

        redlab::GroundTruth known;
        if (!known_path.empty())
            known = redlab::GroundTruth::from_csv(known_path);

        const auto log = input.load();
        const auto grid =
            redlab::run_grid(log, xs, ys, replicates, detector_cfg,
                             provider.get(), master_seed, known,
                             global.threads);

        write_text(out_raw, redlab::grid_rows_to_csv(grid.rows));
        write_text(out_summary, redlab::grid_summary_to_csv(grid.summary));

        double overall = 0.0;
        for (const auto& s : grid.summary) overall += s.mean_f_score;
        overall /= static_cast<double>(grid.summary.size());

        nlohmann::ordered_json meta;
        meta["version"] = std::string(redlab::kVersion);
        meta["command"] = "evaluate";
        meta["input"] = input.path;
        meta["master_seed"] = master_seed;
        meta["x"] = xs;
        meta["y"] = ys;
        meta["replicates"] = replicates;
        meta["known_pairs"] =
            static_cast<std::uint64_t>(known.all().size());
        meta["config"] = redlab::config_to_json(
            detector_cfg, provider ? provider->name() : "");
        meta["log_fingerprint"] = {
            {"traces", log.trace_count()},
            {"events", log.event_count()},
            {"activities", log.activities().size()},
            {"hash", log.fingerprint()}};
        meta["runs"] = static_cast<std::uint64_t>(grid.rows.size());
        meta["mean_f_score"] = overall;
        meta["outputs"] = {{"raw", out_raw}, {"summary", out_summary}};
        write_text(out_raw + ".meta.json", meta.dump(2) + "\n");

        if (global.format == "json") {
            std::cout << meta.dump(2) << '\n';
        } else if (global.format == "csv") {
            std::cout << redlab::grid_summary_to_csv(grid.summary);
        } else {
            std::cout << "master seed: " << master_seed << '\n'
                      << "runs: " << grid.rows.size() << '\n';
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6f", overall);
            std::cout << "mean f-score over all cells: " << buf << '\n'
                      << "raw rows: " << out_raw << '\n'
                      << "summary: " << out_summary << '\n';
        }
    }
};

struct ExportDfgCommand {
    InputOptions input;
    std::string kind = "direct";
    double theta_ld = 0.9;
    std::string out;
    CLI::Option* kind_opt = nullptr;
    CLI::Option* theta_ld_opt = nullptr;
    CLI::Option* out_opt = nullptr;

    void add_to(CLI::App* cmd) {
        input.add_to(cmd);
        kind_opt = cmd->add_option("--kind", kind,
                                   "direct (DFG) or indirect (IFG)")
                       ->check(CLI::IsMember({"direct", "indirect"}));
        theta_ld_opt = cmd->add_option(
            "--theta-ld", theta_ld,
            "long-distance threshold for --kind indirect (default 0.9)");
        out_opt = cmd->add_option("--out", out,
                                  "DOT output path (default: stdout)");
    }

    void run(GlobalOptions& global, const FlatConfig& cfg) {
        global.apply(cfg);
        input.apply(cfg);
        cfg.fill(kind_opt, "kind", kind);
        cfg.fill(theta_ld_opt, "theta-ld", theta_ld);
        cfg.fill(out_opt, "out", out);

        const auto log = input.load();
        const auto graph = kind == "indirect"
                               ? redlab::build_ifg(log, theta_ld)
                               : redlab::build_dfg(log);

        std::ostringstream dot;
        dot << "// redlab " << redlab::kVersion << " export-dfg kind=" << kind;
        if (kind == "indirect") dot << " theta-ld=" << theta_ld;
        dot << "\n// input=" << input.path << " hash=" << log.fingerprint()
            << "\n"
            << redlab::to_dot(graph);

        if (out.empty())
            std::cout << dot.str();
        else
            write_text(out, dot.str());
    }
};

void print_error_json(const std::string& type, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = {{"type", type}, {"message", message}};
    std::cerr << j.dump() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"redundant activity label detection for event logs"};
    app.set_version_flag("--version", std::string(redlab::kVersion));
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_path,
                   "flat key=value settings file; command-line flags win");
    global.threads_opt =
        app.add_option("--threads", global.threads,
                       "worker threads (default: core count)");
    global.seed_opt = app.add_option("--seed", global.seed,
                                     "master seed for perturb/evaluate");
    global.format_opt =
        app.add_option("--format", global.format,
                       "stdout rendering: json, csv or table")
            ->check(CLI::IsMember({"json", "csv", "table"}));

    DetectCommand detect_cmd;
    PerturbCommand perturb_cmd;
    EvaluateCommand evaluate_cmd;
    ExportDfgCommand export_cmd;

    const auto wire = [&](CLI::App* sub, auto& command) {
        sub->fallthrough();
        command.add_to(sub);
        sub->callback([&] {
            FlatConfig cfg;
            if (!global.config_path.empty()) cfg.load(global.config_path);
            command.run(global, cfg);
        });
    };
    wire(app.add_subcommand("detect",
                            "find redundant activity label pairs"),
         detect_cmd);
    wire(app.add_subcommand("perturb",
                            "rename a seeded slice of events to synthetic "
                            "duplicate labels"),
         perturb_cmd);
    wire(app.add_subcommand("evaluate",
                            "score detection on a grid of perturbations"),
         evaluate_cmd);
    wire(app.add_subcommand("export-dfg",
                            "write the directly- or indirectly-follows "
                            "graph as DOT"),
         export_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error_json("config", e.what());
        return 1;
    } catch (const redlab::ParseError& e) {
        print_error_json("io", e.what());
        return 2;
    } catch (const redlab::Error& e) {
        print_error_json("config", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error_json("internal", e.what());
        return 1;
    }
    return 0;
}
