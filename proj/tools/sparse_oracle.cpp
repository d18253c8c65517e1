#include <cstdlib>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "sparseoracle/pipeline.hpp"

namespace so = sparseoracle;

namespace {

std::string default_model_path() {
    const char* env = std::getenv("SPARSE_ORACLE_MODEL");
    return env ? env : "";
}

int run(int argc, char** argv) {
    CLI::App app{"Sparse format auto-tuning toolkit: profile SpMV across six "
                 "storage formats, train format-selection forests, and apply "
                 "them at runtime"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    int threads = 1;
    so::index_t reps = 1000;
    std::uint64_t seed = 0;
    double true_diag_ratio = 0.2;
    double max_padding_factor = 10.0;
    app.add_option("--threads", threads, "SpMV threads")->capture_default_str();
    app.add_option("--reps", reps, "timed repetitions per format")
        ->capture_default_str();
    app.add_option("--seed", seed, "seed for splits and training")
        ->capture_default_str();
    app.add_option("--true-diag-ratio", true_diag_ratio,
                   "diagonal qualifies as true at ceil(ratio * min(M, N)) entries")
        ->capture_default_str();
    app.add_option("--max-padding-factor", max_padding_factor,
                   "DIA/ELL dense allocation cap as a multiple of nnz")
        ->capture_default_str();

    auto conversion = [&] {
        so::ConversionConfig cfg;
        cfg.true_diag_ratio = true_diag_ratio;
        cfg.max_padding_factor = max_padding_factor;
        return cfg;
    };

    // fetch
    auto* fetch = app.add_subcommand("fetch", "download matrices from a manifest");
    std::string manifest, dest_dir;
    so::CorpusFilters filters;
    int workers = 4;
    fetch->add_option("manifest", manifest, "manifest CSV")->required();
    fetch->add_option("dest", dest_dir, "destination directory")->required();
    fetch->add_option("--min-rows", filters.min_rows, "");
    fetch->add_option("--max-rows", filters.max_rows, "");
    fetch->add_option("--min-nnz", filters.min_nnz, "");
    fetch->add_option("--max-nnz", filters.max_nnz, "");
    fetch->add_flag("--square-only", filters.square_only, "");
    fetch->add_option("--workers", workers, "concurrent downloads")
        ->capture_default_str();

    // profile
    auto* profile = app.add_subcommand("profile", "time SpMV in every format");
    std::string corpus_dir, out_csv;
    profile->add_option("corpus", corpus_dir, "directory of .mtx files")
        ->required();
    profile->add_option("out", out_csv, "profile CSV to write")->required();

    // features
    auto* features = app.add_subcommand("features", "extract feature CSV");
    int corpus_workers = 1;
    features->add_option("corpus", corpus_dir, "directory of .mtx files")
        ->required();
    features->add_option("out", out_csv, "feature CSV to write")->required();
    features->add_option("--parallel-corpus", corpus_workers,
                         "matrices processed concurrently")
        ->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "grid-search and train a forest");
    std::string features_csv, profiles_csv, grid_file, model_out, backend;
    int folds = 5;
    train->add_option("features", features_csv,
                      "training CSV (or feature CSV with --profiles)")
        ->required();
    train->add_option("model", model_out, "model file to write")->required();
    train->add_option("--profiles", profiles_csv,
                      "profile CSV to join for labels");
    train->add_option("--grid", grid_file, "hyperparameter grid file");
    train->add_option("--folds", folds, "CV folds")->capture_default_str();
    train->add_option("--backend-label", backend, "label stored in metadata");

    // predict
    auto* predict = app.add_subcommand("predict", "predict the format for one matrix");
    std::string matrix_path, model_path = default_model_path();
    predict->add_option("matrix", matrix_path, "Matrix Market file")->required();
    predict->add_option("--model", model_path,
                        "model file (default: $SPARSE_ORACLE_MODEL)");

    // bench
    auto* bench = app.add_subcommand("bench", "measure tuned-SpMV speedup");
    bench->add_option("corpus", corpus_dir, "directory of .mtx files")
        ->required();
    bench->add_option("out", out_csv, "bench CSV to write")->required();
    bench->add_option("--model", model_path,
                      "model file (default: $SPARSE_ORACLE_MODEL)");

    CLI11_PARSE(app, argc, argv);

    if (fetch->parsed()) {
        so::FetchOptions options;
        options.filters = filters;
        options.workers = workers;
        so::FetchReport report = so::fetch_corpus(manifest, dest_dir, options);
        std::cout << report.entries.size() << " matrices present ("
                  << report.downloads << " downloaded, "
                  << report.failures.size() << " failed)\n";
        for (const so::FetchFailure& f : report.failures) {
            std::cerr << "fetch failed: " << f.matrix_id << ": " << f.error
                      << "\n";
        }
        if (!report.failures.empty()) {
            std::vector<so::PipelineFailure> failures;
            for (const so::FetchFailure& f : report.failures) {
                failures.push_back({f.matrix_id, "fetch", f.error});
            }
            so::write_failure_manifest(
                std::filesystem::path(dest_dir) / "fetch.failures.csv",
                failures);
            return 1;
        }
        return 0;
    }

    if (profile->parsed()) {
        so::ProfileOptions options;
        options.corpus_dir = corpus_dir;
        options.reps = reps;
        options.nthreads = threads;
        options.out_csv = out_csv;
        options.conversion = conversion();
        so::ProfileResult result = so::cmd_profile(options);
        std::cout << "profiled " << result.records.size() << " records\n";
        std::cout << "optimal format distribution:\n";
        for (so::FormatId f : so::all_formats()) {
            std::cout << "  " << so::format_name(f) << " "
                      << result.winner_counts[static_cast<std::size_t>(f)]
                      << "\n";
        }
        return result.failures.empty() ? 0 : 1;
    }

    if (features->parsed()) {
        so::FeaturesResult result = so::cmd_features(
            corpus_dir, true_diag_ratio, out_csv, corpus_workers);
        std::cout << "wrote " << result.rows << " feature rows\n";
        return result.failures.empty() ? 0 : 1;
    }

    if (train->parsed()) {
        so::TrainOptions options;
        options.features_csv = features_csv;
        if (!profiles_csv.empty()) options.profiles_csv = profiles_csv;
        if (!grid_file.empty()) options.grid_file = grid_file;
        options.split_seed = seed;
        options.model_out = model_out;
        options.folds = folds;
        if (!backend.empty()) {
            options.backend_label = backend;
        } else {
            options.backend_label =
                threads > 1 ? "parallel-" + std::to_string(threads) : "serial";
        }
        so::TrainResult result = so::cmd_train(options);
        std::cout << so::describe(result.best) << "\n";
        std::cout << std::fixed << std::setprecision(2) << "accuracy (%): "
                  << 100.0 * result.heldout.accuracy
                  << "  balanced accuracy (%): "
                  << 100.0 * result.heldout.balanced_accuracy << "  (test n="
                  << result.n_test << ")\n";
        return 0;
    }

    if (predict->parsed()) {
        if (model_path.empty()) {
            std::cerr << "predict: no model (pass --model or set "
                         "SPARSE_ORACLE_MODEL)\n";
            return 2;
        }
        so::PredictResult result =
            so::cmd_predict(matrix_path, model_path, true_diag_ratio);
        std::cout << result.name << " " << static_cast<int>(result.format)
                  << "\n";
        return 0;
    }

    if (bench->parsed()) {
        if (model_path.empty()) {
            std::cerr << "bench: no model (pass --model or set "
                         "SPARSE_ORACLE_MODEL)\n";
            return 2;
        }
        so::BenchOptions options;
        options.corpus_dir = corpus_dir;
        options.model_path = model_path;
        options.reps = reps;
        options.nthreads = threads;
        options.out_csv = out_csv;
        options.tuner.nthreads = threads;
        options.tuner.true_diag_ratio = true_diag_ratio;
        options.tuner.conversion = conversion();
        so::BenchReport report = so::cmd_bench(options);
        std::cout << "benched " << report.rows.size() << " matrices, mean speedup "
                  << report.mean_speedup << "\n";
        std::cout << "tuning cost (CSR SpMV equivalents) min/Q1/Q2/Q3/max:";
        for (double q : report.tuning_cost_quartiles) std::cout << " " << q;
        std::cout << "\n";
        return report.failures.empty() ? 0 : 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}
