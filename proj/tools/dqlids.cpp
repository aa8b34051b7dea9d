#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dqlids/agent.hpp"
#include "dqlids/config.hpp"
#include "dqlids/dataset.hpp"
#include "dqlids/error.hpp"
#include "dqlids/metrics.hpp"
#include "dqlids/network.hpp"

namespace fs = std::filesystem;
using namespace dqlids;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool is_snapshot_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    return in && std::string(magic, 8) == "DQLSNAP1";
}

Taxonomy load_taxonomy(const RunConfig& cfg) {
    return cfg.taxonomy_file.empty() ? Taxonomy::builtin() : Taxonomy::load(cfg.taxonomy_file);
}

// raw CSV or encoded snapshot, decided by the file's magic bytes
EncodedDataset load_train_dataset(const RunConfig& cfg) {
    if (cfg.train_file.empty())
        throw Error("--train-file is required");
    if (is_snapshot_file(cfg.train_file))
        return load_snapshot(cfg.train_file);
    const Taxonomy taxonomy = load_taxonomy(cfg);
    std::vector<RawRecord> records = parse_records_file(cfg.train_file);
    NormalizationStats stats = fit_stats(records);
    return encode(records, stats, taxonomy, cfg.encoding, UnknownCategoryPolicy::Strict,
                  &std::cerr);
}

EncodedDataset load_test_snapshot(const std::string& path) {
    if (path.empty())
        throw Error("--test-file is required");
    if (!is_snapshot_file(path))
        throw Error("expected an encoded snapshot (run the preprocess command first): " + path);
    return load_snapshot(path);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write: " + path);
    out << content;
    if (!out)
        throw Error("short write: " + path);
}

void write_run_config(const RunConfig& cfg, const std::string& dir) {
    write_file(dir + "/run_config.txt", format_resolved_config(cfg));
}

void print_tallies(const char* name, const std::vector<ClassLabel>& labels) {
    const auto tallies = class_tallies(labels);
    std::cout << name << ": " << labels.size() << " records";
    for (std::size_t c = 0; c < kNumClasses; ++c)
        std::cout << "  " << class_name(static_cast<ClassLabel>(c)) << "=" << tallies[c];
    std::cout << "\n";
}

std::string stats_text(const NormalizationStats& stats) {
    std::ostringstream out;
    out << "feature,min,max\n";
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
        if (is_symbolic_feature(f)) {
            const auto& vocab = stats.vocab(f);
            out << "F" << (f + 1) << "/" << feature_name(f) << ",categorical(" << vocab.size()
                << "):";
            for (std::size_t i = 0; i < vocab.size(); ++i)
                out << (i ? " " : "") << vocab[i];
            out << ",\n";
        } else {
            out << "F" << (f + 1) << "/" << feature_name(f) << "," << fmt(stats.min[f]) << ","
                << fmt(stats.max[f]) << "\n";
        }
    }
    return out.str();
}

int run_preprocess(const RunConfig& cfg) {
    if (cfg.train_file.empty())
        throw Error("--train-file is required");
    const Taxonomy taxonomy = load_taxonomy(cfg);

    std::vector<RawRecord> train_records = parse_records_file(cfg.train_file);
    NormalizationStats stats = fit_stats(train_records);
    EncodedDataset train_ds = encode(train_records, stats, taxonomy, cfg.encoding,
                                     UnknownCategoryPolicy::Strict, &std::cerr);

    EncodedDataset test_ds;
    bool have_test = !cfg.test_file.empty();
    if (have_test) {
        std::vector<RawRecord> test_records = parse_records_file(cfg.test_file);
        test_ds = encode(test_records, stats, taxonomy, cfg.encoding, cfg.unknown_policy,
                         &std::cerr);
    }

    fs::create_directories(cfg.out_dir);
    save_snapshot(train_ds, cfg.out_dir + "/train.snapshot");
    if (have_test)
        save_snapshot(test_ds, cfg.out_dir + "/test.snapshot");
    write_file(cfg.out_dir + "/stats.txt", stats_text(stats));
    write_run_config(cfg, cfg.out_dir);

    print_tallies("train", train_ds.labels);
    if (have_test)
        print_tallies("test", test_ds.labels);
    std::cout << "encoded width: " << train_ds.width() << " (" << encoding_name(cfg.encoding)
              << ")\n";
    std::cout << "wrote " << cfg.out_dir << "/train.snapshot"
              << (have_test ? " and test.snapshot" : "") << "\n";
    return 0;
}

void write_history(const TrainingHistory& history, const HyperParams& hp,
                   const std::string& dir) {
    std::ostringstream loss_csv;
    loss_csv << "episode,iteration,loss,epsilon\n";
    for (std::size_t k = 0; k < history.losses.size(); ++k)
        loss_csv << (k / hp.num_iterations) << ',' << (k % hp.num_iterations) << ','
                 << fmt(history.losses[k]) << ',' << fmt(history.epsilons[k]) << '\n';
    write_file(dir + "/history_loss.csv", loss_csv.str());

    std::ostringstream reward_csv;
    reward_csv << "episode,cumulative_reward,wall_clock_seconds\n";
    for (std::size_t e = 0; e < history.episode_rewards.size(); ++e)
        reward_csv << e << ',' << fmt(history.episode_rewards[e]) << ','
                   << fmt(history.episode_seconds[e]) << '\n';
    write_file(dir + "/history_reward.csv", reward_csv.str());

    double total_seconds = 0.0;
    for (double s : history.episode_seconds)
        total_seconds += s;
    std::ostringstream summary;
    summary << "episodes=" << history.episode_rewards.size() << '\n'
            << "iterations_per_episode=" << hp.num_iterations << '\n'
            << "total_train_seconds=" << fmt(total_seconds) << '\n'
            << "mean_episode_seconds="
            << fmt(history.episode_rewards.empty()
                       ? 0.0
                       : total_seconds / static_cast<double>(history.episode_rewards.size()))
            << '\n';
    write_file(dir + "/summary.txt", summary.str());
}

TrainResult run_train(const RunConfig& cfg, const EncodedDataset& ds, const std::string& dir,
                      bool verbose) {
    fs::create_directories(dir);
    write_run_config(cfg, dir);
    const std::string ckpt_path = dir + "/checkpoint.bin";

    auto on_episode = [&](const TrainResult& state) {
        save_checkpoint({state.net, state.opt, state.rng_state}, ckpt_path);
        if (verbose) {
            const std::size_t e = state.history.episode_rewards.size();
            std::printf("episode %zu/%zu  reward %.1f  loss %.6f  eps %.4f  (%.2fs)\n", e,
                        cfg.hp.num_episodes, state.history.episode_rewards.back(),
                        state.history.losses.back(), state.history.epsilons.back(),
                        state.history.episode_seconds.back());
            std::fflush(stdout);
        }
    };

    TrainResult result = train(ds, cfg.hp, on_episode);
    save_checkpoint({result.net, result.opt, result.rng_state}, ckpt_path);
    write_history(result.history, cfg.hp, dir);
    return result;
}

int cmd_train(const RunConfig& cfg) {
    EncodedDataset ds = load_train_dataset(cfg);
    if (cfg.shuffle)
        shuffle_dataset(ds, cfg.hp.seed + 2);
    std::cout << "training on " << ds.size() << " records (width " << ds.width() << ", seed "
              << cfg.hp.seed << ", gamma " << cfg.hp.gamma << ")\n";
    run_train(cfg, ds, cfg.out_dir, /*verbose=*/true);
    std::cout << "wrote " << cfg.out_dir << "/checkpoint.bin, history_loss.csv, "
              << "history_reward.csv, summary.txt\n";
    return 0;
}

MetricsReport run_evaluate(const QNetwork& net, const EncodedDataset& test_ds,
                           const std::string& dir) {
    if (test_ds.width() != net.input_width())
        throw Error("checkpoint expects input width " + std::to_string(net.input_width()) +
                    " but the snapshot is " + std::to_string(test_ds.width()) +
                    " wide (encoding mismatch?)");
    std::vector<int> predictions = predict(net, test_ds);
    ConfusionMatrix cm = build_confusion(predictions, test_ds.labels);
    MetricsReport report = compute_metrics(cm);

    fs::create_directories(dir);
    write_file(dir + "/metrics.json", metrics_to_json(report));
    std::ostringstream csv;
    write_confusion_csv(cm, csv);
    write_file(dir + "/confusion.csv", csv.str());
    return report;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path) {
    const std::string ckpt_file =
        checkpoint_path.empty() ? cfg.out_dir + "/checkpoint.bin" : checkpoint_path;
    Checkpoint ckpt = load_checkpoint(ckpt_file);
    EncodedDataset test_ds = load_test_snapshot(cfg.test_file);
    write_run_config(cfg, cfg.out_dir);
    MetricsReport report = run_evaluate(ckpt.net, test_ds, cfg.out_dir);
    print_metrics(report, std::cout);
    std::cout << "wrote " << cfg.out_dir << "/metrics.json and confusion.csv\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::vector<double>& gammas,
              const std::vector<std::uint64_t>& episode_counts) {
    if (gammas.empty() || episode_counts.empty())
        throw Error("sweep: --gammas and --episodes-list must be non-empty");
    EncodedDataset train_ds = load_train_dataset(cfg);
    if (cfg.shuffle)
        shuffle_dataset(train_ds, cfg.hp.seed + 2);
    EncodedDataset test_ds = load_test_snapshot(cfg.test_file);

    fs::create_directories(cfg.out_dir);
    write_run_config(cfg, cfg.out_dir);
    std::ostringstream csv;
    csv << "gamma,episodes,accuracy,macro_f1,wall_clock_seconds,status\n";

    for (double gamma : gammas) {
        for (std::uint64_t episodes : episode_counts) {
            RunConfig run_cfg = cfg;
            run_cfg.hp.gamma = gamma;
            run_cfg.hp.num_episodes = episodes;
            char sub[64];
            std::snprintf(sub, sizeof(sub), "/sweep_g%g_e%llu", gamma,
                          static_cast<unsigned long long>(episodes));
            const std::string dir = cfg.out_dir + sub;
            std::cout << "sweep: gamma=" << gamma << " episodes=" << episodes << "\n";
            try {
                TrainResult result = run_train(run_cfg, train_ds, dir, /*verbose=*/false);
                double seconds = 0.0;
                for (double s : result.history.episode_seconds)
                    seconds += s;
                MetricsReport report = run_evaluate(result.net, test_ds, dir);
                csv << fmt(gamma) << ',' << episodes << ',' << fmt(report.overall_accuracy) << ','
                    << fmt(report.macro_f1) << ',' << fmt(seconds) << ",ok\n";
            } catch (const std::exception& e) {
                std::string reason = e.what();
                for (char& c : reason)
                    if (c == ',' || c == '\n')
                        c = ' ';
                csv << fmt(gamma) << ',' << episodes << ",,,," << "error: " << reason << '\n';
                std::cerr << "sweep run failed (gamma=" << gamma << ", episodes=" << episodes
                          << "): " << e.what() << "\n";
            }
        }
    }
    write_file(cfg.out_dir + "/sweep.csv", csv.str());
    std::cout << "wrote " << cfg.out_dir << "/sweep.csv\n";
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const std::string metrics_path = cfg.out_dir + "/metrics.json";
    std::ifstream in(metrics_path);
    if (!in)
        throw Error("no metrics report at " + metrics_path + " (run the evaluate command first)");
    nlohmann::json doc = nlohmann::json::parse(in);

    MetricsReport report;
    report.total = doc.at("total").get<std::int64_t>();
    report.overall_accuracy = doc.at("overall_accuracy").get<double>();
    report.macro_precision = doc.at("macro").at("precision").get<double>();
    report.macro_recall = doc.at("macro").at("recall").get<double>();
    report.macro_f1 = doc.at("macro").at("f1").get<double>();
    report.macro_accuracy = doc.at("macro").at("accuracy").get<double>();
    for (const auto& entry : doc.at("per_class")) {
        auto label = class_from_name(entry.at("class").get<std::string>());
        if (!label)
            throw Error("corrupt metrics report: bad class name");
        ClassMetrics& m = report.per_class[static_cast<std::size_t>(*label)];
        m.support = entry.at("support").get<std::int64_t>();
        m.precision = entry.at("precision").get<double>();
        m.recall = entry.at("recall").get<double>();
        m.f1 = entry.at("f1").get<double>();
        m.accuracy = entry.at("accuracy").get<double>();
        m.precision_defined = entry.at("precision_defined").get<bool>();
        m.recall_defined = entry.at("recall_defined").get<bool>();
    }
    print_metrics(report, std::cout);

    std::ifstream confusion(cfg.out_dir + "/confusion.csv");
    if (confusion) {
        std::cout << "\nconfusion matrix (rows predicted, columns true):\n";
        std::string line;
        while (std::getline(confusion, line)) {
            for (char& c : line)
                if (c == ',')
                    c = '\t';
            std::cout << "  " << line << "\n";
        }
    }
    return 0;
}

// --config is applied before regular flag parsing so flags win
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc)
            return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0)
            return arg.substr(9);
    }
    return {};
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    std::string config_file;
    std::string checkpoint_path;
    std::vector<double> gammas;
    std::vector<std::uint64_t> episode_counts;
    std::string encoding = "ordinal";
    std::string optimizer = "adam";
    std::string unknown_policy = "lenient";

    try {
        const std::string pre = find_config_arg(argc, argv);
        if (!pre.empty())
            apply_config_file(cfg, pre);
        encoding = encoding_name(cfg.encoding);
        optimizer = optimizer_name(cfg.hp.optimizer);
        unknown_policy = policy_name(cfg.unknown_policy);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"Deep Q-learning intrusion detection on NSL-KDD-format data"};
    app.require_subcommand(1);

    auto add_io = [&](CLI::App* sub) {
        sub->add_option("--config", config_file, "key=value config file (flags override)");
        sub->add_option("--out", cfg.out_dir, "output directory");
    };
    auto add_input = [&](CLI::App* sub) {
        sub->add_option("--train-file", cfg.train_file, "raw NSL-KDD CSV or encoded snapshot");
        sub->add_option("--taxonomy", cfg.taxonomy_file, "attack taxonomy file");
        sub->add_option("--encoding", encoding, "ordinal|one-hot");
    };
    auto add_hyper = [&](CLI::App* sub) {
        sub->add_option("--episodes", cfg.hp.num_episodes, "training episodes");
        sub->add_option("--iterations", cfg.hp.num_iterations, "iterations per episode");
        sub->add_option("--batch-size", cfg.hp.batch_size, "records per state");
        sub->add_option("--gamma", cfg.hp.gamma, "discount factor");
        sub->add_option("--epsilon", cfg.hp.epsilon_initial, "initial exploration rate");
        sub->add_option("--epsilon-decay", cfg.hp.epsilon_decay, "per-iteration decay");
        sub->add_option("--epsilon-floor", cfg.hp.epsilon_floor, "exploration floor");
        sub->add_option("--lr", cfg.hp.learning_rate, "learning rate");
        sub->add_option("--seed", cfg.hp.seed, "RNG seed");
        sub->add_option("--optimizer", optimizer, "adam|sgd");
        sub->add_option("--reward-correct", cfg.hp.reward_correct, "reward for a correct action");
        sub->add_option("--reward-incorrect", cfg.hp.reward_incorrect,
                        "reward for an incorrect action");
        sub->add_flag("--shuffle", cfg.shuffle, "shuffle records before training");
    };

    CLI::App* preprocess = app.add_subcommand("preprocess", "encode raw CSVs into snapshots");
    add_io(preprocess);
    add_input(preprocess);
    preprocess->add_option("--test-file", cfg.test_file, "raw NSL-KDD test CSV");
    preprocess->add_option("--unknown-category", unknown_policy,
                           "strict|lenient handling of unseen categories in test data");

    CLI::App* train_cmd = app.add_subcommand("train", "train the Q-network");
    add_io(train_cmd);
    add_input(train_cmd);
    add_hyper(train_cmd);

    CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on a snapshot");
    add_io(evaluate);
    evaluate->add_option("--test-file", cfg.test_file, "encoded test snapshot");
    evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint file (default <out>/checkpoint.bin)");

    CLI::App* sweep = app.add_subcommand("sweep", "train+evaluate over gamma/episode grids");
    add_io(sweep);
    add_input(sweep);
    add_hyper(sweep);
    sweep->add_option("--test-file", cfg.test_file, "encoded test snapshot");
    sweep->add_option("--gammas", gammas, "discount factors to sweep")->delimiter(',');
    sweep->add_option("--episodes-list", episode_counts, "episode counts to sweep")->delimiter(',');

    CLI::App* report = app.add_subcommand("report", "print metrics from an output directory");
    add_io(report);

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.encoding = encoding_from_name(encoding);
        cfg.hp.optimizer = optimizer_from_name(optimizer);
        cfg.unknown_policy = policy_from_name(unknown_policy);

        if (preprocess->parsed())
            return run_preprocess(cfg);
        if (train_cmd->parsed())
            return cmd_train(cfg);
        if (evaluate->parsed())
            return cmd_evaluate(cfg, checkpoint_path);
        if (sweep->parsed())
            return cmd_sweep(cfg, gammas, episode_counts);
        if (report->parsed())
            return cmd_report(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
