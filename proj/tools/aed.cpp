// Command-line front end for the acoustic event detection pipeline:
// synthesize a corpus, train a classifier, evaluate it, score new audio,
// cross-validate hyperparameter grids, and plot the learned class spectra.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aed/config.hpp"
#include "aed/errors.hpp"
#include "aed/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    bool seed_set = false;
    std::uint64_t seed = 0;
    std::string out_dir;

    aed::PipelineConfig resolve() const {
        aed::PipelineConfig cfg;
        if (!config_path.empty()) cfg = aed::load_config(config_path);
        for (const auto& o : overrides) aed::apply_override(cfg, o);
        if (seed_set) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.validate();
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file (key = value with [sections])");
    cmd->add_option("--set", args.overrides, "override a config key: section.key=value")->take_all();
    cmd->add_option("--seed", args.seed, "root random seed")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--out", args.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acoustic event detection pipeline"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string model_path;
    std::string input_wav;

    auto* synth = app.add_subcommand("synth", "generate the synthetic labelled corpus");
    add_common(synth, args);
    auto* train = app.add_subcommand("train", "train the configured classifier");
    add_common(train, args);
    auto* eval = app.add_subcommand("eval", "evaluate a trained model on the test split");
    add_common(eval, args);
    eval->add_option("--model", model_path, "model file (default <out>/models/model.bin)");
    auto* predict = app.add_subcommand("predict", "score a WAV file with a trained model");
    add_common(predict, args);
    predict->add_option("--model", model_path, "model file (default <out>/models/model.bin)");
    predict->add_option("--input", input_wav, "input WAV file")->required();
    auto* crossval = app.add_subcommand("crossval", "cross-validate the hyperparameter grid");
    add_common(crossval, args);
    auto* visualize = app.add_subcommand("visualize", "export the learned class spectra");
    add_common(visualize, args);
    visualize->add_option("--model", model_path, "model file (default <out>/models/model.bin)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        auto cfg = args.resolve();
        const auto default_model = aed::RunPaths::make(cfg).model_file();
        if (model_path.empty()) model_path = default_model.string();

        if (synth->parsed()) {
            auto dir = aed::run_synth(cfg);
            std::cout << "corpus written to " << dir.string() << " (" << cfg.synth.n_recordings
                      << " recordings)\n";
        } else if (train->parsed()) {
            auto outcome = aed::run_train(cfg);
            std::cout << outcome.summary << "\nmodel written to " << outcome.model_path.string() << "\n";
        } else if (eval->parsed()) {
            auto outcome = aed::run_eval(cfg, model_path);
            std::cout << outcome.summary << "\nreports under " << (cfg.out_dir + "/reports") << "\n";
        } else if (predict->parsed()) {
            auto csv = aed::run_predict(cfg, model_path, input_wav);
            std::cout << "predictions written to " << csv.string() << "\n";
        } else if (crossval->parsed()) {
            auto result = aed::run_crossval(cfg);
            std::cout << "grid of " << result.rows.size() << " points; best: "
                      << result.rows[result.best_index].name << " (mean PR area "
                      << aed::fmt_g(result.rows[result.best_index].mean_score, 6) << ")\n";
        } else if (visualize->parsed()) {
            auto outcome = aed::run_visualize(cfg, model_path);
            std::cout << "class spectra written to " << outcome.csv_path.string() << "\n";
        }
    } catch (const aed::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const aed::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
