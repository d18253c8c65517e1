#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sparseoracle/ingest.hpp"
#include "sparseoracle/trainer.hpp"
#include "sparseoracle/tuners.hpp"

namespace sparseoracle {

struct PipelineFailure {
    std::string matrix_id;
    std::string stage;
    std::string error;
};

// matrix_id,stage,error; written next to a command's output when any
// per-matrix work failed.
void write_failure_manifest(const std::filesystem::path& path,
                            const std::vector<PipelineFailure>& failures);

// Sorted *.mtx files; the stem is the matrix_id.
std::vector<std::filesystem::path> list_corpus(
    const std::filesystem::path& corpus_dir);

struct ProfileOptions {
    std::filesystem::path corpus_dir;
    index_t reps = 1000;
    int nthreads = 1;
    std::filesystem::path out_csv;
    ConversionConfig conversion;
};

struct ProfileResult {
    std::vector<ProfileRecord> records;
    std::array<index_t, kNumFormats> winner_counts{};
    std::vector<PipelineFailure> failures;
};

// Times every matrix in every feasible format and writes the profile CSV
// plus a winner-distribution CSV (<out>.distribution.csv).
ProfileResult cmd_profile(const ProfileOptions& options);

struct FeaturesResult {
    std::size_t rows = 0;
    std::vector<PipelineFailure> failures;
};

// workers > 1 extracts matrices concurrently; rows keep corpus order.
FeaturesResult cmd_features(const std::filesystem::path& corpus_dir,
                            double true_diag_ratio,
                            const std::filesystem::path& out_csv,
                            int workers = 1);

struct TrainOptions {
    // Labeled training CSV, or an unlabeled feature CSV when profiles_csv is
    // set (the join is written to <model_out>.training.csv).
    std::filesystem::path features_csv;
    std::optional<std::filesystem::path> profiles_csv;
    std::optional<std::filesystem::path> grid_file;
    std::uint64_t split_seed = 0;
    std::filesystem::path model_out;
    int folds = 5;
    std::string backend_label = "serial";
};

struct TrainResult {
    EvalReport heldout;
    HyperParams best;
    CvResult best_cv;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

// Seeded 80/20 split, grid search with k-fold CV on the training side, final
// evaluation on the held-out side. Per-point CV scores land in
// <model_out>.gridscores.csv.
TrainResult cmd_train(const TrainOptions& options);

// Small lattice used when no grid file is supplied. The full tuning space is
// HyperGrid::paper_default() but is far too large to sweep by default.
HyperGrid default_cli_grid();

struct BenchRow {
    std::string matrix_id;
    FormatId chosen = FormatId::csr;
    FormatId optimal = FormatId::csr;
    index_t reps = 0;
    double t_csr_total = 0.0;
    double t_fe = 0.0;
    double t_pred = 0.0;
    double t_convert = 0.0;  // switching to the chosen format; reported but
                             // not part of the speedup denominator
    double t_opt_total = 0.0;
    double speedup = 0.0;               // t_csr / (t_fe + t_pred + t_opt)
    double tuning_cost_csr_spmv = 0.0;  // (t_fe + t_pred) / (t_csr / reps)
};

struct BenchOptions {
    std::filesystem::path corpus_dir;
    std::filesystem::path model_path;
    index_t reps = 1000;
    int nthreads = 1;
    std::filesystem::path out_csv;
    TunerConfig tuner;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    double mean_speedup = 0.0;
    // min, Q1, Q2, Q3, max of the per-matrix tuning cost
    std::array<double, 5> tuning_cost_quartiles{};
    std::vector<PipelineFailure> failures;
};

// Per matrix: profile all six formats, extract+predict from CSR, switch to
// the prediction, and time the tuned format. Writes per-matrix rows plus
// <out>.summary.csv with the aggregates.
BenchReport cmd_bench(const BenchOptions& options);

std::vector<BenchRow> read_bench_csv(const std::filesystem::path& path);

struct PredictResult {
    FormatId format = FormatId::csr;
    std::string name;
    double feature_seconds = 0.0;
    double predict_seconds = 0.0;
};

PredictResult cmd_predict(const std::filesystem::path& matrix_path,
                          const std::filesystem::path& model_path,
                          double true_diag_ratio);

}  // namespace sparseoracle
