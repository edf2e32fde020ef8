// rolefocus: operator entry points over the reward library.
//
//   rolefocus parse CORPUS.jsonl [--strict]
//   rolefocus score CORPUS.jsonl --groups MODEL.json [--stats-in S] [--stats-out S] [--update] [--out F]
//   rolefocus fit-groups PROFILES.jsonl [--G 7] [--seed 0] [--out MODEL.json] [--sweep 2..10]
//   rolefocus train-toy [TASK.json] [--steps 300] [--seed 7] [--out curves.csv]
//   rolefocus serve [--config CONFIG.json]
//
// Exit status: 0 success, 1 validation failures under --strict, 2 usage/config errors.

#include "rolefocus/codec.hpp"
#include "rolefocus/config.hpp"
#include "rolefocus/pipeline.hpp"
#include "rolefocus/service.hpp"
#include "rolefocus/toy_trainer.hpp"
#include "rolefocus/trajectory.hpp"
#include "rolefocus/utf8.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace rf = rolefocus;
using rf::codec::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t") == std::string::npos;
}

int cmd_parse(const std::string& path, bool strict) {
    const auto lines = read_lines(path);
    std::size_t records = 0, invalid = 0, bad_lines = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const std::size_t lineno = i + 1;
        std::string raw;
        try {
            const json j = json::parse(lines[i]);
            raw = rf::codec::require_string(j, "raw_output", "line " + std::to_string(lineno));
        } catch (const std::exception& e) {
            std::cerr << path << ":" << lineno << ": bad record: " << e.what() << "\n";
            ++bad_lines;
            continue;
        }
        ++records;
        rf::ParsedTrajectory t;
        try {
            t = rf::parse_trajectory(raw);
        } catch (const rf::InvalidUtf8& e) {
            std::cout << "line " << lineno << ": format_valid=false InvalidUtf8 " << e.what() << "\n";
            ++invalid;
            continue;
        }
        std::cout << "line " << lineno << ": format_valid=" << (t.format_valid ? "true" : "false") << " foci="
                  << t.foci.size();
        for (const auto& d : t.diagnostics) {
            std::cout << " " << rf::to_string(d.severity) << ":" << rf::to_string(d.code);
            if (!d.detail.empty()) std::cout << "(" << d.detail << ")";
        }
        std::cout << "\n";
        if (!t.format_valid) ++invalid;
    }
    std::cout << records << " records, " << invalid << " format-invalid, " << bad_lines << " unreadable\n";
    return strict && (invalid > 0 || bad_lines > 0) ? kExitValidation : kExitOk;
}

int cmd_score(const std::string& path, const std::string& groups_path, const std::string& stats_in,
              const std::string& stats_out, bool update, const std::string& out_path, const std::string& config_path) {
    const rf::ServiceConfig cfg =
        rf::load_config(config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path));
    const rf::GroupModel model = rf::codec::group_model_from_json(json::parse(rf::codec::read_file(groups_path)));
    rf::NormalizerState state = stats_in.empty()
                                    ? rf::NormalizerState(cfg.decay, cfg.epsilon_norm, model.cluster_count)
                                    : rf::restore(rf::codec::read_file(stats_in), model.cluster_count);

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw UsageError("cannot write " + out_path);
    }
    std::ostream& out = out_path.empty() ? std::cout : file;

    const auto lines = read_lines(path);
    const rf::PipelineConfig pipeline = cfg.pipeline();
    std::size_t scored = 0, skipped = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const std::string lineno = std::to_string(i + 1);
        rf::ScoreItem item;
        try {
            item = rf::score_item_from_json(json::parse(lines[i]), "line " + lineno, lineno);
        } catch (const std::exception& e) {
            std::cerr << path << ":" << lineno << ": skipped: " << e.what() << "\n";
            ++skipped;
            continue;
        }
        try {
            out << rf::to_json(rf::score_item(item, model, state, pipeline, update)).dump() << "\n";
            ++scored;
        } catch (const rf::InvalidUtf8& e) {
            std::cerr << path << ":" << lineno << ": skipped: " << e.what() << "\n";
            ++skipped;
        }
    }
    if (update && !stats_out.empty()) rf::codec::write_file(stats_out, rf::snapshot(state));
    std::cerr << scored << " scored, " << skipped << " skipped\n";
    return kExitOk;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) throw UsageError("--sweep expects A..B");
    try {
        const long a = std::stol(text.substr(0, dots));
        const long b = std::stol(text.substr(dots + 2));
        if (a < 1 || b < a) throw UsageError("--sweep needs 1 <= A <= B");
        return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
    } catch (const std::logic_error&) {
        throw UsageError("--sweep expects A..B");
    }
}

int cmd_fit_groups(const std::string& path, std::size_t clusters, std::uint64_t seed, const std::string& sweep,
                   const std::string& out_path, int seeds) {
    const auto profiles = rf::codec::read_profiles_jsonl(path);
    if (!sweep.empty()) {
        const auto [lo, hi] = parse_range(sweep);
        std::vector<std::size_t> counts;
        for (std::size_t g = lo; g <= hi; ++g) counts.push_back(g);
        std::vector<std::uint64_t> seed_list;
        for (int s = 0; s < seeds; ++s) seed_list.push_back(seed + static_cast<std::uint64_t>(s));
        std::cout << "G,inertia,silhouette\n";
        for (const auto& row : rf::sweep_cluster_counts(profiles, counts, seed_list)) {
            std::cout << row.cluster_count << "," << json(row.inertia).dump() << ","
                      << (row.silhouette ? json(*row.silhouette).dump() : "") << "\n";
        }
        return kExitOk;
    }
    const rf::GroupModel model = rf::fit_kmeans(profiles, clusters, seed);
    const std::string doc = rf::codec::to_json(model).dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << doc;
    } else {
        rf::codec::write_file(out_path, doc);
    }
    std::cerr << "G=" << clusters << " inertia=" << rf::inertia(model, profiles) << " iterations=" << model.iterations;
    if (clusters >= 2 && clusters < profiles.size()) std::cerr << " silhouette=" << rf::silhouette(model, profiles);
    std::cerr << "\n";
    return kExitOk;
}

int cmd_train_toy(const std::string& task_path, int steps, std::optional<std::uint64_t> seed,
                  const std::string& out_path) {
    rf::ToyTask task = task_path.empty() ? rf::default_toy_task()
                                         : rf::toy_task_from_json(json::parse(rf::codec::read_file(task_path)));
    if (seed) task.seed = *seed;
    rf::ToyTrainingOptions opts;
    opts.steps = steps;
    const auto result = rf::run_training(task, opts, rf::NormalizerState());
    if (!out_path.empty()) rf::emit_curves(result.log, out_path);

    const rf::TrainingRecord& last = result.log.empty() ? result.initial : result.log.back();
    std::printf("steps=%d r_focus=%.4f r_attr=%.4f r_ref=%.4f r_scalar=%.4f\n", steps, last.r_focus, last.r_attr,
                last.r_ref, last.r_scalar + 0.0);  // + 0.0 folds -0 into 0
    return kExitOk;
}

int cmd_serve(const std::string& config_path) {
    const rf::ServiceConfig cfg =
        rf::load_config(config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path));

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGINT);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    rf::ScoringService service(cfg);
    rf::HttpFrontend http(service);
    const int port = http.bind(cfg.host, cfg.port);
    std::cerr << "listening on " << cfg.host << ":" << port << std::endl;
    std::thread server([&] { http.run(); });

    int sig = 0;
    sigwait(&signals, &sig);
    http.stop();
    server.join();
    if (cfg.snapshot_path) {
        rf::codec::write_file(*cfg.snapshot_path, service.stats_snapshot());
        std::cerr << "stats written to " << cfg.snapshot_path->string() << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Role-aware reasoning reward engine"};
    app.require_subcommand(1);

    std::string input, groups, stats_in, stats_out, out, sweep, config;
    bool strict = false, update = false;
    std::size_t clusters = rf::kDefaultClusterCount;
    std::uint64_t seed = 0;
    int seeds = 5;
    int steps = 300;

    auto* parse = app.add_subcommand("parse", "Lint a JSONL corpus of trajectories");
    parse->add_option("input", input, "Corpus (one JSON record per line)")->required();
    parse->add_flag("--strict", strict, "Exit 1 if any record is format-invalid");

    auto* score = app.add_subcommand("score", "Score a JSONL corpus");
    score->add_option("input", input, "Corpus (one JSON record per line)")->required();
    score->add_option("--groups", groups, "Group model JSON")->required();
    score->add_option("--stats-in", stats_in, "Stats snapshot to start from");
    score->add_option("--stats-out", stats_out, "Where to write the updated snapshot (with --update)");
    score->add_flag("--update", update, "Update statistics item by item");
    score->add_option("--out", out, "Output JSONL (default stdout)");
    score->add_option("--config", config, "Service config supplying weights, decay and metrics");

    auto* fit = app.add_subcommand("fit-groups", "Fit k-means role groups over character profiles");
    fit->add_option("input", input, "Profiles JSONL")->required();
    fit->add_option("--G", clusters, "Number of groups")->check(CLI::PositiveNumber);
    fit->add_option("--seed", seed, "k-means++ seed");
    fit->add_option("--sweep", sweep, "Print an inertia/silhouette table for G in A..B");
    fit->add_option("--seeds", seeds, "Seeds tried per G in a sweep")->check(CLI::PositiveNumber);
    fit->add_option("--out", out, "Model file (default stdout)");

    std::optional<std::uint64_t> toy_seed;
    auto* train = app.add_subcommand("train-toy", "Run the toy GRPO trainer");
    train->add_option("task", input, "Task fixture JSON (default: built-in)");
    train->add_option("--steps", steps, "Training steps")->check(CLI::NonNegativeNumber);
    train->add_option("--seed", toy_seed, "Sampling seed (overrides the task's)");
    train->add_option("--out", out, "Curves CSV");

    auto* serve = app.add_subcommand("serve", "Run the scoring service");
    serve->add_option("--config", config, "Config JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*parse) return cmd_parse(input, strict);
        if (*score) return cmd_score(input, groups, stats_in, stats_out, update, out, config);
        if (*fit) return cmd_fit_groups(input, clusters, seed, sweep, out, seeds);
        if (*train) return cmd_train_toy(input, steps, toy_seed, out);
        if (*serve) return cmd_serve(config);
    } catch (const rf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
