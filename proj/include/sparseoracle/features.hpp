#pragma once

#include <array>

#include "sparseoracle/formats.hpp"

namespace sparseoracle {

// The ten structural features, in the fixed serialization order
// [M, N, NNZ, avg, density, max, min, spread, N_D, N_TD]. That order is part
// of the model file contract.
struct FeatureVector {
    index_t nrows = 0;            // M
    index_t ncols = 0;            // N
    index_t nnz = 0;              // NNZ
    double avg_nnz_per_row = 0;   // NNZ / M
    double density = 0;           // NNZ / (M * N)
    index_t max_nnz_per_row = 0;
    index_t min_nnz_per_row = 0;  // empty rows count as 0
    double nnz_row_spread = 0;    // sum of squared deviations / M
    index_t ndiags = 0;           // diagonals with >= 1 entry
    index_t ntrue_diags = 0;      // diagonals meeting the true-diag threshold
};

inline constexpr int kNumFeatures = 10;

// Entry visits cover stored logical entries; structure reads cover scanned
// padding/hole cells (DIA) and sentinel probes (ELL).
struct FeatureScanStats {
    index_t entry_visits = 0;
    index_t structure_reads = 0;
};

// Single pass over the stored entries of the active format, no conversion.
// A diagonal counts toward N_D with >= 1 entry and toward N_TD when its entry
// count reaches ceil(true_diag_ratio * min(M, N)).
FeatureVector extract_features(const DynamicMatrix& m,
                               double true_diag_ratio = 0.2,
                               FeatureScanStats* stats = nullptr);

std::array<double, kNumFeatures> features_to_row(const FeatureVector& f);
FeatureVector row_to_features(const std::array<double, kNumFeatures>& row);

}  // namespace sparseoracle
