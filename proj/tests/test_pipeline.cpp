#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "aed/config.hpp"
#include "aed/interpret.hpp"
#include "aed/model_io.hpp"
#include "aed/pipeline.hpp"

using namespace aed;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

PipelineConfig small_config(const fs::path& out) {
    PipelineConfig cfg;
    cfg.out_dir = out.string();
    cfg.seed = 5;
    cfg.synth.n_recordings = 8;
    cfg.synth.duration_s = 4.0;
    cfg.synth.snr_db = 15.0;
    cfg.n_train = 5;
    cfg.n_test = 3;
    cfg.h1 = 64;
    cfg.w1 = 5;
    cfg.f_max = 3900.0;
    cfg.cnn_k = 3;
    cfg.cnn_n_k = 4;
    cfg.cnn_n_d = 8;
    cfg.train.batch_size = 64;
    cfg.train.max_epochs = 2;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config serialization round trips", "[config]") {
    PipelineConfig cfg;
    cfg.seed = 99;
    cfg.family = "rf";
    cfg.synth.snr_db = -3.5;
    cfg.out_dir = "runs/exp1";
    auto text = serialize_config(cfg);
    auto back = parse_config(text);
    REQUIRE(back == cfg);
    REQUIRE(config_hash(back) == config_hash(cfg));
}

TEST_CASE("config parsing accepts comments and rejects junk", "[config]") {
    auto cfg = parse_config("# a comment\n[run]\nseed = 7 # trailing\n\n[model]\nfamily = svm\n");
    REQUIRE(cfg.seed == 7);
    REQUIRE(cfg.family == "svm");
    REQUIRE_THROWS_AS(parse_config("[run]\nbogus = 1\n"), config_error);
    REQUIRE_THROWS_AS(parse_config("[run]\nseed == 1\n"), config_error);
    REQUIRE_THROWS_AS(parse_config("[run\nseed = 1\n"), config_error);
    REQUIRE_THROWS_AS(parse_config("[run]\nseed = notanumber\n"), config_error);
}

TEST_CASE("config overrides and validation", "[config]") {
    PipelineConfig cfg;
    apply_override(cfg, "model.family=mlp");
    REQUIRE(cfg.family == "mlp");
    apply_override(cfg, "train.learning_rate=0.01");
    REQUIRE(cfg.train.learning_rate == 0.01);
    REQUIRE_THROWS_AS(apply_override(cfg, "nosection.key=1"), config_error);
    REQUIRE_THROWS_AS(apply_override(cfg, "model.family"), config_error);

    cfg.family = "banana";
    REQUIRE_THROWS_AS(cfg.validate(), config_error);
    cfg.family = "cnn";
    cfg.f_max = 9000.0;
    REQUIRE_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("synth command writes a deterministic corpus", "[pipeline]") {
    auto out = fresh_dir("aed_pipe_synth");
    auto cfg = small_config(out);
    cfg.synth.n_recordings = 1;
    cfg.n_train = 1;
    cfg.n_test = 0;
    auto dir = run_synth(cfg);
    REQUIRE(fs::exists(dir / "rec000.wav"));
    REQUIRE(fs::exists(dir / "labels.csv"));
    REQUIRE(fs::exists(dir / "manifest.txt"));
    REQUIRE(fs::exists(out / "run_manifest.txt"));
    auto labels = slurp(dir / "labels.csv");
    REQUIRE(labels.find("rec000") != std::string::npos);

    auto wav1 = slurp(dir / "rec000.wav");
    run_synth(cfg);
    REQUIRE(slurp(dir / "rec000.wav") == wav1);
}

TEST_CASE("cnn pipeline: train, eval, visualize, predict", "[pipeline]") {
    auto out = fresh_dir("aed_pipe_cnn");
    auto cfg = small_config(out);
    run_synth(cfg);
    auto train_out = run_train(cfg);
    REQUIRE(fs::exists(train_out.model_path));
    REQUIRE(fs::exists(out / "models/model_history.csv"));

    auto bundle = load_model(train_out.model_path);
    REQUIRE(bundle.family == ModelFamily::cnn);
    REQUIRE(bundle.tf_kind == TfKind::cwt);
    REQUIRE(bundle.h1 == 64);
    REQUIRE(bundle.nn.has_value());

    auto eval_out = run_eval(cfg, train_out.model_path);
    REQUIRE(fs::exists(out / "reports/report_unfiltered.csv"));
    REQUIRE(fs::exists(out / "reports/report_filtered.csv"));
    REQUIRE(fs::exists(out / "curves/roc_unfiltered.csv"));
    REQUIRE(fs::exists(out / "curves/pr_filtered.csv"));
    REQUIRE(fs::exists(out / "curves/roc.svg"));
    REQUIRE(fs::exists(out / "curves/pr.svg"));
    REQUIRE(fs::exists(out / "curves/scores.svg"));
    REQUIRE(eval_out.unfiltered.pr >= 0.0);
    REQUIRE(eval_out.unfiltered.pr <= 1.0);

    auto vis = run_visualize(cfg, train_out.model_path);
    REQUIRE(fs::exists(out / "spectra/class_spectra.csv"));
    REQUIRE(fs::exists(out / "spectra/class_spectra.svg"));
    for (int cls = 0; cls < 2; ++cls) {
        REQUIRE(vis.spectra.test_spectrum[cls].size() == 64);
        if (!vis.spectra.test_constant[cls]) {
            double mean = 0.0;
            for (double v : vis.spectra.test_spectrum[cls]) mean += v;
            REQUIRE(std::abs(mean / 64.0) < 1e-6);
        }
    }

    auto pred_csv = run_predict(cfg, train_out.model_path, cfg.corpus_path() / "rec000.wav");
    REQUIRE(fs::exists(pred_csv));
    std::ifstream is(pred_csv);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    // 4 s at 8 kHz, h1=64 -> 500 cwt columns, w1=5 -> 100 patches (+ header)
    REQUIRE(rows == 101);
}

TEST_CASE("transform mismatch between model and config is rejected", "[pipeline]") {
    auto out = fresh_dir("aed_pipe_mismatch");
    auto cfg = small_config(out);
    run_synth(cfg);
    auto train_out = run_train(cfg);
    auto cfg2 = cfg;
    cfg2.transform_kind = "stft";
    REQUIRE_THROWS_AS(run_eval(cfg2, train_out.model_path), config_error);
}

TEST_CASE("mlp with w1 = 1 has input dimension h1", "[pipeline]") {
    auto out = fresh_dir("aed_pipe_mlp");
    auto cfg = small_config(out);
    cfg.family = "mlp";
    cfg.transform_kind = "stft";
    cfg.w1 = 1;
    cfg.mlp_l = 8;
    cfg.mlp_m = 4;
    run_synth(cfg);
    auto train_out = run_train(cfg);
    auto bundle = load_model(train_out.model_path);
    REQUIRE(bundle.family == ModelFamily::mlp);
    const auto& net = std::get<MlpNet<float>>(bundle.nn->net);
    REQUIRE(net.spec.input_dim == 64);
    run_eval(cfg, train_out.model_path);
}

TEST_CASE("baseline with RFE records the selected indices", "[pipeline]") {
    auto out = fresh_dir("aed_pipe_nb_rfe");
    auto cfg = small_config(out);
    cfg.family = "nb";
    cfg.baseline_features = "f10";
    cfg.reduction = "rfe";
    cfg.reduction_dim = 88;
    cfg.synth.duration_s = 2.0;
    cfg.synth.n_recordings = 6;
    cfg.n_train = 4;
    cfg.n_test = 2;
    cfg.h1 = 256;  // features are defined on the 512-sample frame
    run_synth(cfg);
    auto train_out = run_train(cfg);
    auto bundle = load_model(train_out.model_path);
    REQUIRE(bundle.reduction == ModelReduction::rfe);
    REQUIRE(bundle.rfe.has_value());
    REQUIRE(bundle.rfe->selected.size() == 88);
    REQUIRE(bundle.nb.has_value());
    REQUIRE(bundle.nb->dim == 88);

    auto eval_out = run_eval(cfg, train_out.model_path);
    REQUIRE(eval_out.unfiltered.pr >= 0.0);
}

TEST_CASE("rf baseline on the stft slice end to end", "[pipeline]") {
    auto out = fresh_dir("aed_pipe_rf");
    auto cfg = small_config(out);
    cfg.family = "rf";
    cfg.rf_trees = 10;
    cfg.synth.duration_s = 2.0;
    cfg.synth.n_recordings = 6;
    cfg.n_train = 4;
    cfg.n_test = 2;
    cfg.h1 = 256;
    run_synth(cfg);
    auto train_out = run_train(cfg);
    auto eval_out = run_eval(cfg, train_out.model_path);
    REQUIRE(eval_out.unfiltered.pr > 0.3);  // tonal task, should be easy
}

TEST_CASE("model files round trip through the binary container", "[model_io]") {
    auto out = fresh_dir("aed_pipe_roundtrip");
    auto cfg = small_config(out);
    run_synth(cfg);
    auto train_out = run_train(cfg);

    auto a = load_model(train_out.model_path);
    const auto copy_path = out / "copy.bin";
    save_model(copy_path, a);
    REQUIRE(slurp(train_out.model_path) == slurp(copy_path));
}

TEST_CASE("identical config and seed reproduce byte-identical outputs", "[pipeline][determinism]") {
    auto out1 = fresh_dir("aed_pipe_det1");
    auto out2 = fresh_dir("aed_pipe_det2");
    for (const auto& out : {out1, out2}) {
        auto cfg = small_config(out);
        run_synth(cfg);
        auto t = run_train(cfg);
        run_eval(cfg, t.model_path);
        run_visualize(cfg, t.model_path);
    }
    for (const char* rel :
         {"models/model.bin", "models/model_history.csv", "reports/report_unfiltered.csv",
          "reports/report_filtered.csv", "curves/roc_unfiltered.csv", "spectra/class_spectra.csv"}) {
        INFO(rel);
        REQUIRE(slurp(out1 / rel) == slurp(out2 / rel));
    }
}

TEST_CASE("output directory lock excludes concurrent runs", "[pipeline]") {
    auto out = fresh_dir("aed_pipe_lock");
    RunLock lock(out);
    REQUIRE_THROWS_AS(RunLock(out), data_error);
}

#ifdef AED_CLI_PATH
TEST_CASE("cli exit codes", "[cli]") {
    const std::string cli = AED_CLI_PATH;
    auto out = fresh_dir("aed_cli_test");
    auto run = [&](const std::string& args) {
        const auto code = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(code);
    };
    REQUIRE(run("--help") == 0);
    REQUIRE(run("synth --set corpus.n_recordings=2 --set corpus.duration_s=1 --set corpus.n_train=1 "
                "--set corpus.n_test=1 --out " +
                (out / "run").string()) == 0);
    REQUIRE(fs::exists(out / "run/corpus/rec001.wav"));
    // unknown config key -> 2
    REQUIRE(run("synth --set bogus.key=1 --out " + (out / "run2").string()) == 2);
    // missing model file -> 3
    REQUIRE(run("eval --model " + (out / "missing.bin").string() + " --out " + (out / "run3").string()) == 3);
}
#endif
