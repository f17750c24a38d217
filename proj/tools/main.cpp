// Command line front end. Ties dataset ingestion, training, evaluation and
// the enumeration oracle into reproducible runs: defaults, then config file,
// then flags; everything resolved is echoed into a manifest next to the
// artifacts, so a run can be re-executed from its manifest alone.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lcrbm/checkpoint.hpp"
#include "lcrbm/dataset.hpp"
#include "lcrbm/errors.hpp"
#include "lcrbm/eval.hpp"
#include "lcrbm/model.hpp"
#include "lcrbm/oracle.hpp"
#include "lcrbm/predict.hpp"
#include "lcrbm/train.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string checksum_hex(uint64_t checksum) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checksum));
    return buf;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw lcrbm::ParseError(path.string() + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw lcrbm::ParseError(path.string() + ": cannot write");
}

// ---- shared option groups ---------------------------------------------------

struct DataOpts {
    std::string dir;
    std::string kind = "ml100k";
};

void add_data_opts(CLI::App* cmd, DataOpts& o) {
    cmd->add_option("--data", o.dir, "dataset directory")->required();
    cmd->add_option("--dataset", o.kind, "directory layout: ml100k or ml1m")
        ->check(CLI::IsMember({"ml100k", "ml1m"}));
}

struct ConfigOpts {
    std::string config_path;
    std::string variant = "plain";
    bool sparse = false;
    uint64_t seed = 1;
    int threads = 1;
};

void add_config_opts(CLI::App* cmd, ConfigOpts& o) {
    cmd->add_option("--config", o.config_path, "training config file, one key = value per line");
    cmd->add_option("--variant", o.variant, "label variant: plain, item or user")
        ->check(CLI::IsMember({"plain", "item", "user"}));
    cmd->add_flag("--sparse", o.sparse, "enable the sparsity penalty");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--threads", o.threads, "worker threads; 1 is bit-reproducible");
}

/// Defaults, overridden by the config file, overridden by explicit flags.
lcrbm::TrainConfig resolve_config(const CLI::App& cmd, const ConfigOpts& o) {
    lcrbm::TrainConfig cfg;
    if (!o.config_path.empty())
        cfg = lcrbm::config_from_kv(slurp(o.config_path), o.config_path);
    if (cmd.count("--variant")) cfg.variant = lcrbm::variant_from_name(o.variant);
    if (cmd.count("--sparse")) cfg.sparse = o.sparse;
    if (cmd.count("--seed")) cfg.seed = o.seed;
    if (cmd.count("--threads")) cfg.threads = o.threads;
    lcrbm::validate_config(cfg);
    return cfg;
}

ordered_json config_json(const lcrbm::TrainConfig& cfg) {
    ordered_json j;
    j["learning_rate"] = cfg.learning_rate;
    j["epochs"] = cfg.epochs;
    j["hidden_units"] = cfg.hidden_units;
    j["cd_steps"] = cfg.cd_steps;
    j["minibatch_size"] = cfg.minibatch_size;
    j["weight_decay"] = cfg.weight_decay;
    j["momentum"] = cfg.momentum;
    j["momentum_late"] = cfg.momentum_late;
    j["momentum_switch_epoch"] = cfg.momentum_switch_epoch;
    j["sparsity_weight"] = cfg.sparsity_weight;
    j["sparsity_target"] = cfg.sparsity_target;
    j["variant"] = lcrbm::variant_name(cfg.variant);
    j["sparse"] = cfg.sparse;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j;
}

// ---- dataset plumbing -------------------------------------------------------

/// Missing-file pre-scan so an empty directory reports every absent file at
/// once instead of failing on the first open.
void require_files(const DataOpts& data) {
    static const std::vector<std::string> needed_100k = {"u.data", "u.item", "u.user",
                                                         "u.occupation"};
    static const std::vector<std::string> needed_1m = {"ratings.dat", "movies.dat",
                                                       "users.dat"};
    if (!fs::is_directory(data.dir))
        throw lcrbm::ParseError(data.dir + ": not a directory");
    std::string missing;
    for (const auto& name : data.kind == "ml1m" ? needed_1m : needed_100k)
        if (!fs::exists(fs::path(data.dir) / name)) missing += (missing.empty() ? "" : ", ") + name;
    if (!missing.empty())
        throw lcrbm::ParseError(data.dir + ": missing required files: " + missing);
}

lcrbm::RatingDataset load_dataset(const DataOpts& data) {
    require_files(data);
    return data.kind == "ml1m" ? lcrbm::parse_1m(data.dir) : lcrbm::parse_100k(data.dir);
}

/// 100K uses the shipped u1..u5 splits; 1M gets a seeded generated partition.
std::vector<lcrbm::FoldSplit> resolve_folds(const DataOpts& data,
                                            const lcrbm::RatingDataset& ds, int n_folds,
                                            uint64_t seed) {
    if (data.kind == "ml100k") return lcrbm::load_standard_folds_100k(data.dir);
    return lcrbm::make_folds(ds, n_folds, seed);
}

lcrbm::CaseSet build_cases(const lcrbm::RatingDataset& train, lcrbm::LabelVariant variant,
                           int hidden_units) {
    return variant == lcrbm::LabelVariant::item_genre
               ? lcrbm::build_item_cases(train, hidden_units)
               : lcrbm::build_user_cases(train, variant, hidden_units);
}

// ---- manifest ---------------------------------------------------------------

void write_manifest(const fs::path& out_dir, const char* command,
                    const std::string& config_path, ordered_json resolved,
                    const DataOpts* data, const lcrbm::RatingDataset* ds, uint64_t seed,
                    const std::vector<std::string>& artifact_names) {
    ordered_json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["resolved"] = std::move(resolved);
    if (data != nullptr && ds != nullptr) {
        ordered_json d;
        d["kind"] = data->kind;
        d["dir"] = fs::absolute(data->dir).string();
        d["checksum"] = checksum_hex(lcrbm::dataset_checksum(*ds));
        j["dataset"] = d;
    } else {
        j["dataset"] = nullptr;
    }
    j["seed"] = seed;
    ordered_json arts = ordered_json::array();
    for (const auto& name : artifact_names) arts.push_back((out_dir / name).string());
    j["artifacts"] = arts;
    j["created_utc"] = utc_timestamp();
    spill(out_dir / "manifest.json", j.dump(2) + "\n");
}

ordered_json epoch_json(const lcrbm::EpochRecord& rec) {
    ordered_json line;
    line["epoch"] = rec.epoch;
    line["recon_error"] = rec.recon_error;
    line["mean_hidden_activation"] = rec.mean_hidden_activation;
    line["wall_seconds"] = rec.wall_seconds;
    return line;
}

// ---- commands ---------------------------------------------------------------

int cmd_prepare(const DataOpts& data, const fs::path& out_dir) {
    const lcrbm::RatingDataset ds = load_dataset(data);
    fs::create_directories(out_dir);

    std::printf("users        %d\n", ds.num_users);
    std::printf("items        %d\n", ds.num_items);
    std::printf("ratings      %zu\n", ds.triples.size());
    std::printf("genres       %d\n", ds.genre_count());
    std::printf("occupations  %d\n", ds.occupation_count());
    std::printf("checksum     %s\n", checksum_hex(lcrbm::dataset_checksum(ds)).c_str());

    ordered_json sidecar;
    sidecar["dataset"] = data.kind;
    sidecar["checksum"] = checksum_hex(lcrbm::dataset_checksum(ds));
    sidecar["users"] = ds.user_raw_ids;  // dense index -> raw id
    sidecar["items"] = ds.item_raw_ids;
    sidecar["genres"] = ds.genre_names;
    sidecar["occupations"] = ds.occupation_vocab;
    spill(out_dir / "sidecar.json", sidecar.dump(2) + "\n");

    write_manifest(out_dir, "prepare", "", ordered_json::object(), &data, &ds, 0,
                   {"sidecar.json"});
    return lcrbm::exit_code::ok;
}

int cmd_train(const CLI::App& cmd, const DataOpts& data, const ConfigOpts& co, int fold,
              int n_folds, const fs::path& out_dir) {
    const lcrbm::TrainConfig cfg = resolve_config(cmd, co);
    const lcrbm::RatingDataset ds = load_dataset(data);

    std::vector<lcrbm::FoldSplit> folds;
    const lcrbm::RatingDataset* train_set = &ds;
    if (fold > 0) {
        folds = resolve_folds(data, ds, n_folds, cfg.seed);
        if (fold > static_cast<int>(folds.size()))
            throw lcrbm::ValidationError("fold " + std::to_string(fold) + " outside 1.." +
                                         std::to_string(folds.size()));
        train_set = &folds[fold - 1].train;
    }

    const lcrbm::CaseSet cases = build_cases(*train_set, cfg.variant, cfg.hidden_units);
    fs::create_directories(out_dir);
    std::ofstream log_out(out_dir / "train_log.jsonl", std::ios::binary);

    lcrbm::TrainResult result = lcrbm::train(cases, cfg, [&](const lcrbm::EpochRecord& rec) {
        log_out << epoch_json(rec).dump() << "\n";
        std::printf("epoch %4d  recon %.4f  activation %.4f  (%.1fs)\n", rec.epoch,
                    rec.recon_error, rec.mean_hidden_activation, rec.wall_seconds);
    });
    log_out.flush();
    if (!log_out) throw lcrbm::ParseError((out_dir / "train_log.jsonl").string() + ": cannot write");

    lcrbm::Checkpoint ckpt;
    ckpt.params = std::move(result.params);
    ckpt.seed = cfg.seed;
    ckpt.item_oriented = cases.item_oriented;
    ckpt.genre_names = ds.genre_names;
    ckpt.occupation_vocab = ds.occupation_vocab;
    lcrbm::save_checkpoint(out_dir / "model.ckpt", ckpt);
    std::printf("%s: %zu parameters from %zu cases\n", (out_dir / "model.ckpt").c_str(),
                ckpt.params.parameter_count(), cases.cases.size());

    ordered_json resolved = config_json(cfg);
    resolved["fold"] = fold;
    resolved["folds"] = n_folds;
    write_manifest(out_dir, "train", co.config_path, std::move(resolved), &data, &ds,
                   cfg.seed, {"model.ckpt", "train_log.jsonl"});
    return lcrbm::exit_code::ok;
}

int cmd_evaluate(const DataOpts& data, const std::string& model_path, int fold,
                 int n_folds, uint64_t seed, const fs::path& out_dir) {
    const lcrbm::Checkpoint ckpt = lcrbm::load_checkpoint(model_path);
    const lcrbm::RatingDataset ds = load_dataset(data);
    const auto folds = resolve_folds(data, ds, n_folds, seed);
    if (fold < 1 || fold > static_cast<int>(folds.size()))
        throw lcrbm::ValidationError("fold " + std::to_string(fold) + " outside 1.." +
                                     std::to_string(folds.size()));
    const lcrbm::FoldSplit& split = folds[fold - 1];

    const lcrbm::ModelDims& dims = ckpt.params.dims;
    const lcrbm::CaseSet cases = build_cases(split.train, dims.variant, dims.hidden_units);
    if (cases.dims.visible_units != dims.visible_units)
        throw lcrbm::ValidationError(
            "checkpoint was trained on " + std::to_string(dims.visible_units) +
            " visible units, this dataset builds " + std::to_string(cases.dims.visible_units));
    if (ckpt.genre_names != ds.genre_names || ckpt.occupation_vocab != ds.occupation_vocab)
        throw lcrbm::ValidationError("checkpoint vocabularies disagree with the dataset");

    const lcrbm::PairMetrics pairs = lcrbm::evaluate_pairs(ckpt.params, cases, split.train, split.test);
    const lcrbm::PairMetrics base = lcrbm::baseline_item_mean(split.train, split.test);

    std::printf("%s (%s, %d hidden units) on %s fold %d\n", model_path.c_str(),
                lcrbm::variant_name(dims.variant), dims.hidden_units, data.kind.c_str(), fold);
    std::printf("MAE %.4f  RMSE %.4f  over %zu pairs (%zu bias-only, %zu global-fallback)\n",
                pairs.mae(), pairs.rmse(), pairs.count, pairs.bias_only, pairs.global_fallback);
    std::printf("baseline MAE %.4f  RMSE %.4f\n", base.mae(), base.rmse());

    fs::create_directories(out_dir);
    // No config echo here: a checkpoint records parameters, not the optimizer
    // settings that produced them, and the manifest never fabricates values.
    ordered_json rep;
    rep["dataset"] = data.kind;
    rep["dataset_checksum"] = checksum_hex(lcrbm::dataset_checksum(ds));
    rep["model_file"] = model_path;
    rep["variant"] = lcrbm::variant_name(dims.variant);
    rep["hidden_units"] = dims.hidden_units;
    rep["train_seed"] = ckpt.seed;
    rep["fold"] = fold;
    ordered_json metrics;
    metrics["mae"] = pairs.mae();
    metrics["rmse"] = pairs.rmse();
    metrics["test_count"] = pairs.count;
    metrics["bias_only"] = pairs.bias_only;
    metrics["global_fallback"] = pairs.global_fallback;
    rep["metrics"] = metrics;
    ordered_json baseline;
    baseline["mae"] = base.mae();
    baseline["rmse"] = base.rmse();
    rep["baseline"] = baseline;
    spill(out_dir / "report.json", rep.dump(2) + "\n");

    ordered_json resolved;
    resolved["model"] = model_path;
    resolved["fold"] = fold;
    resolved["folds"] = n_folds;
    resolved["variant"] = lcrbm::variant_name(dims.variant);
    resolved["hidden_units"] = dims.hidden_units;
    write_manifest(out_dir, "evaluate", "", std::move(resolved), &data, &ds, seed,
                   {"report.json"});
    return lcrbm::exit_code::ok;
}

int cmd_cross_validate(const CLI::App& cmd, const DataOpts& data, const ConfigOpts& co,
                       int n_folds, const fs::path& out_dir) {
    const lcrbm::TrainConfig cfg = resolve_config(cmd, co);
    const lcrbm::RatingDataset ds = load_dataset(data);
    const auto folds = resolve_folds(data, ds, n_folds, cfg.seed);

    fs::create_directories(out_dir);
    std::ofstream log_out(out_dir / "train_log.jsonl", std::ios::binary);

    lcrbm::CvCallbacks cb;
    cb.on_epoch = [&](int fold, const lcrbm::EpochRecord& rec) {
        ordered_json line = epoch_json(rec);
        line["fold"] = fold;
        log_out << line.dump() << "\n";
    };
    cb.on_fold = [&](const lcrbm::FoldMetrics& fm) {
        std::printf("fold %d: MAE %.4f  RMSE %.4f  (baseline %.4f / %.4f)\n", fm.fold_index,
                    fm.mae, fm.rmse, fm.baseline_mae, fm.baseline_rmse);
    };

    const lcrbm::EvalReport rep =
        lcrbm::run_cv(folds, cfg, data.kind, lcrbm::dataset_checksum(ds), cb);
    log_out.flush();

    spill(out_dir / "report.json", lcrbm::report_payload_json(rep));
    spill(out_dir / "report.txt", lcrbm::report_table(rep));
    std::printf("\n%s", lcrbm::report_table(rep).c_str());

    ordered_json resolved = config_json(cfg);
    resolved["folds"] = n_folds;
    write_manifest(out_dir, "cross-validate", co.config_path, std::move(resolved), &data,
                   &ds, cfg.seed, {"report.json", "report.txt", "train_log.jsonl"});
    return lcrbm::exit_code::ok;
}

// ---- oracle check -----------------------------------------------------------

struct OracleOpts {
    int rounds = 100;
    int max_units = 3;
    int max_levels = 3;
    int max_hidden = 3;
    int chains = 100000;
    int cd_steps = 50;
    uint64_t seed = 1;
};

struct OracleCheck {
    const char* name;
    double limit;
    double residual = 0.0;

    void feed(double r) { residual = std::max(residual, r); }
    bool pass() const { return residual <= limit; }
};

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

lcrbm::ModelDims random_dims(lcrbm::LabelVariant variant, const OracleOpts& o,
                             lcrbm::Rng& rng) {
    lcrbm::ModelDims d;
    d.visible_units = 1 + static_cast<int>(rng.uniform_int(o.max_units));
    d.rating_levels = 2 + static_cast<int>(rng.uniform_int(o.max_levels - 1));
    d.hidden_units = 1 + static_cast<int>(rng.uniform_int(o.max_hidden));
    d.variant = variant;
    if (variant == lcrbm::LabelVariant::item_genre) d.genre_count = 2;
    if (variant == lcrbm::LabelVariant::user_demographic) {
        d.occupation_count = 2;
        d.age_groups = 2;
        d.gender_count = 2;
    }
    return d;
}

lcrbm::ModelParams random_params(const lcrbm::ModelDims& d, lcrbm::Rng& rng, double scale) {
    lcrbm::ModelParams p;
    p.dims = d;
    auto fill = [&](std::vector<double>& v, size_t n) {
        v.resize(n);
        for (auto& x : v) x = rng.normal() * scale;
    };
    const size_t m = d.visible_units, K = d.rating_levels, F = d.hidden_units;
    fill(p.weights, m * K * F);
    fill(p.vis_bias, m * K);
    fill(p.hid_bias, F);
    if (d.variant == lcrbm::LabelVariant::item_genre) {
        fill(p.labels.genre_w, static_cast<size_t>(d.genre_count) * F);
        fill(p.labels.genre_bias, d.genre_count);
    } else if (d.variant == lcrbm::LabelVariant::user_demographic) {
        fill(p.labels.occupation_w, static_cast<size_t>(d.occupation_count) * F);
        fill(p.labels.occupation_bias, d.occupation_count);
        fill(p.labels.age_w, static_cast<size_t>(d.age_groups) * F);
        fill(p.labels.age_bias, d.age_groups);
        fill(p.labels.gender_w, static_cast<size_t>(d.gender_count) * F);
        fill(p.labels.gender_bias, d.gender_count);
    }
    return p;
}

/// Random case over the first `active_count` units, labels drawn one-hot.
lcrbm::TrainingCase random_case(const lcrbm::ModelDims& d, int active_count,
                                lcrbm::Rng& rng) {
    lcrbm::TrainingCase c;
    for (int u = 0; u < active_count; ++u)
        c.active.push_back({u, static_cast<int32_t>(rng.uniform_int(d.rating_levels))});
    if (d.variant == lcrbm::LabelVariant::item_genre) {
        c.genre.assign(d.genre_count, 0);
        c.genre[rng.uniform_int(d.genre_count)] = 1;
    } else if (d.variant == lcrbm::LabelVariant::user_demographic) {
        c.occupation = static_cast<int>(rng.uniform_int(d.occupation_count));
        c.age_group = static_cast<int>(rng.uniform_int(d.age_groups));
        c.gender = static_cast<int>(rng.uniform_int(d.gender_count));
    }
    return c;
}

int cmd_oracle_check(const OracleOpts& o, const fs::path& out_dir) {
    constexpr lcrbm::LabelVariant kVariants[] = {lcrbm::LabelVariant::none,
                                                 lcrbm::LabelVariant::item_genre,
                                                 lcrbm::LabelVariant::user_demographic};
    OracleCheck zero_uniform{"zero-params-uniform", 1e-12};
    OracleCheck partition{"partition-routes", 1e-9};
    OracleCheck hidden{"hidden-conditional", 1e-9};
    OracleCheck visible{"visible-conditional", 1e-9};
    OracleCheck label{"label-conditional", 1e-9};
    OracleCheck query{"query-conditional", 1e-9};
    OracleCheck normalization{"loglik-normalization", 1e-9};
    OracleCheck cd{"cd-gradient", 2e-2};

    // a model with all-zero tensors must be uniform everywhere
    for (auto variant : kVariants) {
        lcrbm::Rng rng(lcrbm::Rng::mix(o.seed, 0xd1e5));
        const lcrbm::ModelDims d = random_dims(variant, o, rng);
        const lcrbm::ModelParams p = random_params(d, rng, 0.0);
        const lcrbm::TrainingCase c = random_case(d, d.visible_units, rng);

        std::vector<double> probs(d.hidden_units);
        lcrbm::hidden_given_visible(p, c, probs);
        for (double v : probs) zero_uniform.feed(std::abs(v - 0.5));

        const std::vector<uint8_t> h(d.hidden_units, 1);
        std::vector<double> vis(d.rating_levels);
        lcrbm::visible_given_hidden(p, h, 0, vis);
        for (double v : vis) zero_uniform.feed(std::abs(v - 1.0 / d.rating_levels));

        if (variant == lcrbm::LabelVariant::item_genre) {
            std::vector<double> g(d.genre_count);
            lcrbm::genre_given_hidden(p, h, g);
            for (double v : g) zero_uniform.feed(std::abs(v - 1.0 / d.genre_count));
        }
        if (variant == lcrbm::LabelVariant::user_demographic) {
            std::vector<double> occ(d.occupation_count);
            lcrbm::occupation_given_hidden(p, h, occ);
            for (double v : occ) zero_uniform.feed(std::abs(v - 1.0 / d.occupation_count));
        }
    }

    for (auto variant : kVariants) {
        for (int round = 0; round < o.rounds; ++round) {
            lcrbm::Rng rng(lcrbm::Rng::mix(o.seed, static_cast<uint64_t>(round),
                                           static_cast<uint64_t>(variant)));
            const lcrbm::ModelDims d = random_dims(variant, o, rng);
            const lcrbm::ModelParams p = random_params(d, rng, 1.0);
            const int active =
                d.visible_units == 1
                    ? 1
                    : 1 + static_cast<int>(rng.uniform_int(d.visible_units - 1));
            const lcrbm::TrainingCase c = random_case(d, active, rng);

            partition.feed(std::abs(lcrbm::oracle::exact_log_partition_direct(p, c) -
                                    lcrbm::oracle::exact_log_partition(p, c)));

            std::vector<double> probs(d.hidden_units);
            lcrbm::hidden_given_visible(p, c, probs);
            hidden.feed(max_abs_diff(probs, lcrbm::oracle::exact_hidden_conditional(p, c)));

            std::vector<uint8_t> h(d.hidden_units);
            uint32_t bits = 0;
            for (int j = 0; j < d.hidden_units; ++j) {
                h[j] = rng.bernoulli(0.5) ? 1 : 0;
                bits |= static_cast<uint32_t>(h[j]) << j;
            }
            std::vector<double> vis(d.rating_levels);
            for (const auto& au : c.active) {
                lcrbm::visible_given_hidden(p, h, au.unit, vis);
                visible.feed(max_abs_diff(
                    vis, lcrbm::oracle::exact_visible_conditional(p, c, bits, au.unit)));
            }

            if (variant == lcrbm::LabelVariant::item_genre) {
                std::vector<double> g(d.genre_count);
                lcrbm::genre_given_hidden(p, h, g);
                label.feed(max_abs_diff(g, lcrbm::oracle::exact_genre_conditional(p, bits)));
            }
            if (variant == lcrbm::LabelVariant::user_demographic) {
                std::vector<double> occ(d.occupation_count);
                lcrbm::occupation_given_hidden(p, h, occ);
                label.feed(
                    max_abs_diff(occ, lcrbm::oracle::exact_occupation_conditional(p, bits)));
                std::vector<double> age(d.age_groups);
                lcrbm::age_given_hidden(p, h, age);
                label.feed(max_abs_diff(age, lcrbm::oracle::exact_age_conditional(p, bits)));
                std::vector<double> gen(d.gender_count);
                lcrbm::gender_given_hidden(p, h, gen);
                label.feed(
                    max_abs_diff(gen, lcrbm::oracle::exact_gender_conditional(p, bits)));
            }

            if (active < d.visible_units) {
                const int query_unit = active; // random_case fills units 0..active-1
                const lcrbm::Prediction pred = lcrbm::predict(p, c, query_unit);
                query.feed(max_abs_diff(
                    pred.distribution, lcrbm::oracle::exact_query_conditional(p, c, query_unit)));
            }

            // full enumeration is quadratic in the config count, so cap it
            if (round < 5) {
                double total = 0.0;
                std::vector<int> levels(c.active.size(), 0);
                const auto label_configs = lcrbm::oracle::enumerate_label_configs(d);
                for (;;) {
                    lcrbm::TrainingCase data_case;
                    data_case.active = c.active;
                    for (size_t t = 0; t < levels.size(); ++t)
                        data_case.active[t].level = levels[t];
                    for (const auto& lc : label_configs) {
                        if (d.variant == lcrbm::LabelVariant::item_genre) {
                            data_case.genre.assign(d.genre_count, 0);
                            data_case.genre[lc.genre] = 1;
                        }
                        data_case.occupation = lc.occupation;
                        data_case.age_group = lc.age_group;
                        data_case.gender = lc.gender;
                        total += std::exp(lcrbm::oracle::exact_case_loglik(p, data_case));
                    }
                    size_t t = 0;
                    while (t < levels.size() && ++levels[t] == d.rating_levels)
                        levels[t++] = 0;
                    if (t == levels.size()) break;
                }
                normalization.feed(std::abs(total - 1.0));
            }
        }
    }

    // Monte-Carlo mean of the chain statistic against the exact gradient
    {
        lcrbm::Rng rng(lcrbm::Rng::mix(o.seed, 0xcdcd));
        lcrbm::ModelDims d;
        d.visible_units = 2;
        d.rating_levels = 2;
        d.hidden_units = 2;
        const lcrbm::ModelParams p = random_params(d, rng, 0.7);
        const lcrbm::TrainingCase c = random_case(d, 2, rng);

        lcrbm::GradientAccumulator acc = lcrbm::make_accumulator(p);
        lcrbm::ChainState state;
        for (int t = 0; t < o.chains; ++t)
            lcrbm::cd_gradient(p, c, o.cd_steps, rng, acc, state);
        const lcrbm::ModelParams exact = lcrbm::oracle::exact_loglik_gradient(p, c);
        const double n = static_cast<double>(o.chains);
        for (size_t i = 0; i < exact.weights.size(); ++i)
            cd.feed(std::abs(acc.g.weights[i] / n - exact.weights[i]));
        for (size_t i = 0; i < exact.vis_bias.size(); ++i)
            cd.feed(std::abs(acc.g.vis_bias[i] / n - exact.vis_bias[i]));
        for (size_t i = 0; i < exact.hid_bias.size(); ++i)
            cd.feed(std::abs(acc.g.hid_bias[i] / n - exact.hid_bias[i]));
    }

    const OracleCheck* checks[] = {&zero_uniform, &partition, &hidden,  &visible,
                                   &label,        &query,     &normalization, &cd};
    bool all_pass = true;
    ordered_json rows = ordered_json::array();
    for (const OracleCheck* chk : checks) {
        std::printf("check %-22s residual %.3e  limit %.0e  %s\n", chk->name, chk->residual,
                    chk->limit, chk->pass() ? "pass" : "FAIL");
        ordered_json row;
        row["name"] = chk->name;
        row["residual"] = chk->residual;
        row["limit"] = chk->limit;
        row["pass"] = chk->pass();
        rows.push_back(row);
        all_pass = all_pass && chk->pass();
    }

    fs::create_directories(out_dir);
    ordered_json rep;
    rep["checks"] = rows;
    rep["pass"] = all_pass;
    spill(out_dir / "oracle_report.json", rep.dump(2) + "\n");

    ordered_json resolved;
    resolved["rounds"] = o.rounds;
    resolved["max_units"] = o.max_units;
    resolved["max_levels"] = o.max_levels;
    resolved["max_hidden"] = o.max_hidden;
    resolved["chains"] = o.chains;
    resolved["cd_steps"] = o.cd_steps;
    resolved["seed"] = o.seed;
    write_manifest(out_dir, "oracle-check", "", std::move(resolved), nullptr, nullptr,
                   o.seed, {"oracle_report.json"});
    return all_pass ? lcrbm::exit_code::ok : lcrbm::exit_code::oracle_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional RBM recommender workbench"};
    app.require_subcommand(1);

    DataOpts prep_data;
    std::string prep_out = "out-prepare";
    CLI::App* prepare = app.add_subcommand(
        "prepare", "parse and validate a dataset directory, write the id-map sidecar");
    add_data_opts(prepare, prep_data);
    prepare->add_option("--out", prep_out, "artifact directory");

    DataOpts train_data;
    ConfigOpts train_cfg;
    std::string train_out = "out-train";
    int train_fold = 0;
    int train_folds_n = 5;
    CLI::App* train = app.add_subcommand(
        "train", "train one model, write checkpoint, epoch log and manifest");
    add_data_opts(train, train_data);
    add_config_opts(train, train_cfg);
    train->add_option("--fold", train_fold,
                      "train on this fold's train split; 0 trains on every rating")
        ->check(CLI::Range(0, 20));
    train->add_option("--folds", train_folds_n, "generated fold count (ml1m only)")
        ->check(CLI::Range(2, 20));
    train->add_option("--out", train_out, "artifact directory");

    DataOpts ev_data;
    std::string ev_model;
    std::string ev_out = "out-evaluate";
    int ev_fold = 1;
    int ev_folds_n = 5;
    uint64_t ev_seed = 1;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "score a saved checkpoint against one held-out fold");
    add_data_opts(evaluate, ev_data);
    evaluate->add_option("--model", ev_model, "checkpoint file")->required();
    evaluate->add_option("--fold", ev_fold, "held-out fold index")->check(CLI::Range(1, 20));
    evaluate->add_option("--folds", ev_folds_n, "generated fold count (ml1m only)")
        ->check(CLI::Range(2, 20));
    evaluate->add_option("--seed", ev_seed, "fold-generation seed (ml1m only)");
    evaluate->add_option("--out", ev_out, "artifact directory");

    DataOpts cv_data;
    ConfigOpts cv_cfg;
    std::string cv_out = "out-cross-validate";
    int cv_folds_n = 5;
    CLI::App* cv = app.add_subcommand(
        "cross-validate", "train and score every fold, write the aggregate report");
    add_data_opts(cv, cv_data);
    add_config_opts(cv, cv_cfg);
    cv->add_option("--folds", cv_folds_n, "generated fold count (ml1m only)")
        ->check(CLI::Range(2, 20));
    cv->add_option("--out", cv_out, "artifact directory");

    OracleOpts oc;
    std::string oc_out = "out-oracle-check";
    CLI::App* oracle = app.add_subcommand(
        "oracle-check", "verify the closed forms against brute-force enumeration");
    oracle->add_option("--rounds", oc.rounds, "random models per variant")
        ->check(CLI::Range(1, 1000000));
    oracle->add_option("--max-units", oc.max_units, "visible unit cap")->check(CLI::Range(1, 6));
    oracle->add_option("--max-levels", oc.max_levels, "rating level cap")->check(CLI::Range(2, 6));
    oracle->add_option("--max-hidden", oc.max_hidden, "hidden unit cap")->check(CLI::Range(1, 12));
    oracle->add_option("--chains", oc.chains, "chains for the gradient comparison")
        ->check(CLI::Range(1000, 10000000));
    oracle->add_option("--cd-steps", oc.cd_steps, "Gibbs sweeps per chain")
        ->check(CLI::Range(1, 1000));
    oracle->add_option("--seed", oc.seed, "master seed");
    oracle->add_option("--out", oc_out, "artifact directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? lcrbm::exit_code::ok : lcrbm::exit_code::parse_error;
    }

    try {
        if (prepare->parsed()) return cmd_prepare(prep_data, prep_out);
        if (train->parsed())
            return cmd_train(*train, train_data, train_cfg, train_fold, train_folds_n, train_out);
        if (evaluate->parsed())
            return cmd_evaluate(ev_data, ev_model, ev_fold, ev_folds_n, ev_seed, ev_out);
        if (cv->parsed()) return cmd_cross_validate(*cv, cv_data, cv_cfg, cv_folds_n, cv_out);
        if (oracle->parsed()) return cmd_oracle_check(oc, oc_out);
    } catch (const lcrbm::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lcrbm::exit_code::parse_error;
    } catch (const lcrbm::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lcrbm::exit_code::parse_error;
    } catch (const lcrbm::NumericAbort& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return lcrbm::exit_code::numeric_abort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lcrbm::exit_code::failure;
    }
    return lcrbm::exit_code::failure;
}
