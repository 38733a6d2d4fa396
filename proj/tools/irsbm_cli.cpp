// Command-line front end: dataset generation, classifier training, overhead
// sweeps, tracking runs and scenario validation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "irsbm/classifier.hpp"
#include "irsbm/config.hpp"
#include "irsbm/engine.hpp"
#include "irsbm/error.hpp"
#include "irsbm/fingerprint.hpp"
#include "irsbm/report.hpp"

namespace fs = std::filesystem;
using namespace irsbm;

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool needs_out) {
    cmd->add_option("--config", opt.config, "JSON configuration (study-case defaults when omitted)");
    cmd->add_option("--seed", opt.seed, "Master seed, overrides the configuration");
    cmd->add_option("--threads", opt.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    auto* out = cmd->add_option("--out", opt.out, "Output directory");
    if (needs_out) out->required();
}

SimConfig resolve_config(const CommonOptions& opt) {
    SimConfig cfg = opt.config.empty() ? default_config() : load_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("{}: {}", dir.string(), ec.message()));
}

void run_fingerprint(const CommonOptions& opt) {
    const SimConfig cfg = resolve_config(opt);
    const Scenario s = cfg.scenario();
    const auto data = build_fingerprint_dataset(s, cfg.link, cfg.grid(), opt.threads);
    ensure_dir(opt.out);
    write_fingerprint_csv(fs::path(opt.out) / "train.csv", data.train);
    write_fingerprint_csv(fs::path(opt.out) / "holdout.csv", data.holdout);
    fmt::print("train {}\nholdout {}\n", data.train.size(), data.holdout.size());
}

void run_train(const CommonOptions& opt, const std::string& data_dir) {
    const SimConfig cfg = resolve_config(opt);
    const Scenario s = cfg.scenario();
    FingerprintDataset data;
    if (data_dir.empty()) {
        data = build_fingerprint_dataset(s, cfg.link, cfg.grid(), opt.threads);
    } else {
        data.train = read_fingerprint_csv(fs::path(data_dir) / "train.csv");
        data.holdout = read_fingerprint_csv(fs::path(data_dir) / "holdout.csv");
    }
    const auto result = train_access_classifier(s, data, cfg.classifier.hidden, cfg.classifier_train_config());
    ensure_dir(opt.out);
    save_model(result.model, fs::path(opt.out) / "model.json");
    const nlohmann::json summary = {{"seed", cfg.seed},
                                    {"train_size", data.train.size()},
                                    {"holdout_size", data.holdout.size()},
                                    {"train_accuracy", result.train_accuracy},
                                    {"holdout_accuracy", result.holdout_accuracy},
                                    {"loss_trace", result.loss_trace}};
    write_text(fs::path(opt.out) / "training.json", summary.dump(1) + "\n");
    fmt::print("holdout_accuracy {:.6f}\n", result.holdout_accuracy);
}

std::optional<MlpAccessClassifier> load_classifier(const std::string& path, const Scenario& s) {
    if (path.empty()) return std::nullopt;
    MLPModel m = load_model(path);
    check_classifier_matches(m, s);
    return MlpAccessClassifier(std::move(m));
}

void run_overhead(const CommonOptions& opt, const std::string& model_path, std::vector<std::string> protocols,
                  std::vector<int> users) {
    SimConfig cfg = resolve_config(opt);
    if (!protocols.empty()) cfg.overhead.protocols = protocols;
    if (!users.empty()) cfg.overhead.users = users;
    cfg.validate();
    const auto classifier = load_classifier(model_path, cfg.scenario());
    const SimReport r = overhead_sweep(cfg, cfg.overhead.protocols, cfg.overhead.users,
                                       classifier ? &*classifier : nullptr, opt.threads);
    emit_report(r, opt.out);
    for (const auto& row : r.overhead)
        fmt::print("{} users={} slots={} seconds={:.6f}\n", row.protocol, row.users, row.slots, row.total_seconds);
}

void run_track(const CommonOptions& opt, const std::string& model_path, std::vector<std::string> schemes,
               const std::string& replay_path) {
    SimConfig cfg = resolve_config(opt);
    if (!schemes.empty()) cfg.tracking.schemes = schemes;
    cfg.validate();
    const Scenario s = cfg.scenario();
    std::optional<MlpAccessClassifier> classifier;
    if (cfg.tracking.classifier == "model") classifier = load_classifier(model_path, s);

    std::optional<std::vector<Vec3>> replay;
    if (!replay_path.empty())
        replay = replay_positions(read_trajectory_csv(replay_path), cfg.tracking.motion_step_slots);

    const SimReport r = tracking_sim(cfg, cfg.tracking.schemes, classifier ? &*classifier : nullptr, opt.threads,
                                     replay ? &*replay : nullptr);
    emit_report(r, opt.out);

    std::vector<std::string> warnings;
    const auto positions = replay ? *replay : trajectory_positions(cfg, r.total_slots, warnings);
    const long steps = (r.total_slots + cfg.tracking.motion_step_slots - 1) / cfg.tracking.motion_step_slots;
    std::vector<Vec3> used(positions.begin(), positions.begin() + std::min<long>(steps, static_cast<long>(positions.size())));
    write_trajectory_csv(fs::path(opt.out) / "trajectory.csv", trajectory_points(used, cfg.tracking.motion_step_slots));

    for (const auto& w : r.warnings) fmt::print(stderr, "warning: {}\n", w);
    for (const auto& t : r.schemes)
        fmt::print("{} effective_se={:.6f} handovers={} training_slots={} handover_slots={}\n", t.scheme,
                   t.effective_se, t.handovers.size(), t.training_slots, t.handover_slots);
}

void run_validate(const CommonOptions& opt) {
    const SimConfig cfg = resolve_config(opt);
    cfg.validate();
    const Scenario s = cfg.scenario();
    const ZoneCensus census = zone_census(s, cfg.link, cfg.grid_resolution, opt.threads);
    for (const auto& [access, n] : census.counts) fmt::print("{} {}\n", access.to_string(), n);
    check_zone_structure(census, s);
    fmt::print("ok\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Beam management simulator for IRS-assisted mmWave networks", "irsbm"};
    app.require_subcommand(1);

    CommonOptions fp_opt, train_opt, oh_opt, track_opt, val_opt;
    std::string data_dir, oh_model, track_model, replay_path;
    std::vector<std::string> protocols, schemes;
    std::vector<int> users;

    auto* fp = app.add_subcommand("fingerprint", "Label the grid and write train/holdout CSVs");
    add_common(fp, fp_opt, true);

    auto* tr = app.add_subcommand("train", "Train the access-point classifier");
    add_common(tr, train_opt, true);
    tr->add_option("--data", data_dir, "Directory with train.csv and holdout.csv (generated when omitted)");

    auto* oh = app.add_subcommand("overhead-sweep", "Initial-access overhead versus user count");
    add_common(oh, oh_opt, true);
    oh->add_option("--model", oh_model, "Trained classifier for the ml protocol");
    oh->add_option("--protocols", protocols, "exhaustive, hierarchical, ml")->delimiter(',');
    oh->add_option("--users", users, "User counts")->delimiter(',');

    auto* tk = app.add_subcommand("track", "Tracking comparison along a trajectory");
    add_common(tk, track_opt, true);
    tk->add_option("--model", track_model, "Trained classifier for the mobility-aware scheme");
    tk->add_option("--schemes", schemes, "genie, mobility_aware, conventional")->delimiter(',');
    tk->add_option("--trajectory", replay_path, "Replay positions from a slot,x,y,z CSV");

    auto* val = app.add_subcommand("validate", "Check scenario invariants and the zone structure");
    add_common(val, val_opt, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        fmt::print(stderr, "error: usage: {}\n", e.what());
        return 2;
    }

    try {
        if (fp->parsed()) run_fingerprint(fp_opt);
        else if (tr->parsed()) run_train(train_opt, data_dir);
        else if (oh->parsed()) run_overhead(oh_opt, oh_model, protocols, users);
        else if (tk->parsed()) run_track(track_opt, track_model, schemes, replay_path);
        else if (val->parsed()) run_validate(val_opt);
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}: {}\n", e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: internal: {}\n", e.what());
        return 1;
    }
    return 0;
}
