#pragma once

#include <string>
#include <vector>

#include "sparseoracle/model.hpp"
#include "sparseoracle/spmv.hpp"

namespace sparseoracle {

enum class TunerKind { run_first, decision_tree, random_forest };

enum class RunFirstStatistic { min_total, median_per_rep };

struct TunerConfig {
    index_t repetitions = 10;  // run-first iterations per format
    int nthreads = 1;
    double true_diag_ratio = 0.2;  // shared by features and HDC conversion
    std::string model_path;        // ML tuners; may come from SPARSE_ORACLE_MODEL
    ConversionConfig conversion;
    RunFirstStatistic statistic = RunFirstStatistic::min_total;

    ConversionConfig effective_conversion() const {
        ConversionConfig c = conversion;
        c.true_diag_ratio = true_diag_ratio;
        return c;
    }
};

struct FormatTiming {
    FormatId format = FormatId::coo;
    bool feasible = false;
    TimingSample sample;
};

struct TuneOutcome {
    FormatId chosen = FormatId::csr;
    TunerKind source = TunerKind::run_first;
    double feature_time_seconds = 0.0;  // T_FE
    double predict_time_seconds = 0.0;  // T_PRED
    std::vector<FormatTiming> per_format_timings;  // run-first only
    bool switched = false;      // chosen != the format the matrix arrived in
    bool fallback_csr = false;  // predicted format was infeasible
};

// Times cfg.repetitions multiplies in every feasible format and leaves the
// matrix in the winner (minimum total, ties to the lowest FormatId).
TuneOutcome tune_run_first(DynamicMatrix& m, const DenseVector& x,
                           const TunerConfig& cfg);

// Extracts features from the active format and evaluates the model; never
// executes an SpMV. An infeasible prediction falls back to CSR. The matrix is
// not modified; tune_multiply applies the switch.
TuneOutcome tune_ml(const DynamicMatrix& m, const TunerConfig& cfg,
                    const ForestModel& model);

// Runs the selected tuner, switches the matrix to the chosen format, performs
// one SpMV.
std::pair<DenseVector, TuneOutcome> tune_multiply(DynamicMatrix& m,
                                                  const DenseVector& x,
                                                  TunerKind tuner,
                                                  const TunerConfig& cfg,
                                                  const ForestModel* model = nullptr);

// Cap check for a target format given the matrix's structural features.
// Mirrors from_coo exactly, so a true result guarantees conversion succeeds.
bool format_feasible(FormatId target, const FeatureVector& f,
                     const ConversionConfig& config);

}  // namespace sparseoracle
