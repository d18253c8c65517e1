#include "sparseoracle/tuners.hpp"

#include <algorithm>
#include <chrono>

namespace sparseoracle {

namespace {

using clock = std::chrono::steady_clock;

double seconds_since(clock::time_point t0) {
    return std::chrono::duration<double>(clock::now() - t0).count();
}

double run_first_score(const TimingSample& sample, RunFirstStatistic statistic) {
    if (statistic == RunFirstStatistic::min_total) return sample.total_seconds;
    std::vector<double> reps = sample.per_rep_seconds;
    std::sort(reps.begin(), reps.end());
    std::size_t n = reps.size();
    return n % 2 == 1 ? reps[n / 2] : (reps[n / 2 - 1] + reps[n / 2]) / 2.0;
}

}  // namespace

bool format_feasible(FormatId target, const FeatureVector& f,
                     const ConversionConfig& config) {
    index_t cap = config.padded_entry_cap(f.nnz);
    switch (target) {
        case FormatId::coo:
        case FormatId::csr:
            return true;
        case FormatId::dia:
            return f.ndiags * f.nrows <= cap;
        case FormatId::ell:
            return f.max_nnz_per_row * f.nrows <= cap;
        case FormatId::hyb: {
            index_t kh = config.effective_kh(f.nnz, f.nrows);
            return std::min(kh, f.max_nnz_per_row) * f.nrows <= cap;
        }
        case FormatId::hdc:
            return f.ntrue_diags * f.nrows <= cap;
    }
    return false;
}

TuneOutcome tune_run_first(DynamicMatrix& m, const DenseVector& x,
                           const TunerConfig& cfg) {
    if (cfg.repetitions < 1) {
        throw InvalidInput("tune_run_first: repetitions must be >= 1");
    }
    ConversionConfig conversion = cfg.effective_conversion();
    FormatId original = m.format();
    CooMatrix base = to_coo(m);

    TuneOutcome outcome;
    outcome.source = TunerKind::run_first;

    bool have_best = false;
    double best_score = 0.0;
    for (FormatId target : all_formats()) {
        FormatTiming timing;
        timing.format = target;
        try {
            DynamicMatrix candidate = from_coo(base, target, conversion);
            timing.sample = time_spmv(candidate, x, cfg.repetitions, cfg.nthreads);
            timing.feasible = true;
        } catch (const PaddingOverflow&) {
            timing.feasible = false;
        }
        if (timing.feasible) {
            double score = run_first_score(timing.sample, cfg.statistic);
            if (!have_best || score < best_score) {
                have_best = true;
                best_score = score;
                outcome.chosen = target;
            }
        }
        outcome.per_format_timings.push_back(std::move(timing));
    }
    if (!have_best) {
        // COO and CSR never overflow the cap, so this cannot trigger for
        // canonical input.
        throw AllFormatsInfeasible("tune_run_first: no feasible format");
    }

    m = from_coo(base, outcome.chosen, conversion);
    outcome.switched = outcome.chosen != original;
    return outcome;
}

TuneOutcome tune_ml(const DynamicMatrix& m, const TunerConfig& cfg,
                    const ForestModel& model) {
    TuneOutcome outcome;
    outcome.source = model.kind == ModelKind::tree ? TunerKind::decision_tree
                                                   : TunerKind::random_forest;

    auto t0 = clock::now();
    FeatureVector features = extract_features(m, cfg.true_diag_ratio);
    outcome.feature_time_seconds = seconds_since(t0);

    t0 = clock::now();
    outcome.chosen = model.kind == ModelKind::tree
                         ? predict_tree(model.trees.front(), features)
                         : predict_forest(model, features);
    outcome.predict_time_seconds = seconds_since(t0);

    if (!format_feasible(outcome.chosen, features, cfg.effective_conversion())) {
        outcome.chosen = FormatId::csr;
        outcome.fallback_csr = true;
    }
    outcome.switched = outcome.chosen != m.format();
    return outcome;
}

std::pair<DenseVector, TuneOutcome> tune_multiply(DynamicMatrix& m,
                                                  const DenseVector& x,
                                                  TunerKind tuner,
                                                  const TunerConfig& cfg,
                                                  const ForestModel* model) {
    TuneOutcome outcome;
    if (tuner == TunerKind::run_first) {
        outcome = tune_run_first(m, x, cfg);
    } else {
        ForestModel from_path;
        if (model == nullptr) {
            if (cfg.model_path.empty()) {
                throw InvalidInput(
                    "tune_multiply: ML tuner requires a model or model_path");
            }
            from_path = load_model(cfg.model_path);
            model = &from_path;
        }
        outcome = tune_ml(m, cfg, *model);
        switch_format(m, outcome.chosen, cfg.effective_conversion());
    }
    DenseVector y = cfg.nthreads > 1 ? spmv_parallel(m, x, cfg.nthreads)
                                     : spmv(m, x);
    return {std::move(y), std::move(outcome)};
}

}  // namespace sparseoracle
