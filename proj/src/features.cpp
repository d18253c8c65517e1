#include "sparseoracle/features.hpp"

#include <algorithm>
#include <cmath>

namespace sparseoracle {

namespace {

struct ScanAccumulator {
    std::vector<index_t> row_counts;
    std::vector<index_t> diag_counts;  // keyed by col - row + (nrows - 1)
    index_t nrows;
    FeatureScanStats* stats;

    ScanAccumulator(index_t nrows, index_t ncols, FeatureScanStats* stats)
        : row_counts(static_cast<std::size_t>(nrows), 0),
          diag_counts(static_cast<std::size_t>(nrows + ncols), 0),
          nrows(nrows),
          stats(stats) {}

    void visit(index_t row, index_t col) {
        row_counts[static_cast<std::size_t>(row)]++;
        diag_counts[static_cast<std::size_t>(col - row + nrows - 1)]++;
        if (stats) stats->entry_visits++;
    }

    void structure_read() {
        if (stats) stats->structure_reads++;
    }
};

void scan_coo(const CooMatrix& m, ScanAccumulator& acc) {
    for (index_t k = 0; k < m.nnz(); ++k) {
        acc.visit(m.row_idx[static_cast<std::size_t>(k)],
                  m.col_idx[static_cast<std::size_t>(k)]);
    }
}

void scan_csr(const CsrMatrix& m, ScanAccumulator& acc) {
    for (index_t i = 0; i < m.nrows; ++i) {
        for (index_t k = m.row_ptr[static_cast<std::size_t>(i)];
             k < m.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            acc.visit(i, m.col_idx[static_cast<std::size_t>(k)]);
        }
    }
}

// DIA cannot distinguish a stored zero from a hole; only nonzero in-range
// cells count as entries.
void scan_dia(const DiaMatrix& m, ScanAccumulator& acc) {
    for (index_t d = 0; d < m.ndiags(); ++d) {
        index_t off = m.offsets[static_cast<std::size_t>(d)];
        index_t lo = std::max<index_t>(0, -off);
        index_t hi = std::min(m.nrows, m.ncols - off);
        for (index_t i = lo; i < hi; ++i) {
            if (m.values[static_cast<std::size_t>(d * m.nrows + i)] != 0.0) {
                acc.visit(i, i + off);
            } else {
                acc.structure_read();
            }
        }
    }
}

void scan_ell(const EllMatrix& m, ScanAccumulator& acc) {
    for (index_t i = 0; i < m.nrows; ++i) {
        for (index_t k = 0; k < m.entries_per_row; ++k) {
            index_t c =
                m.col_idx[static_cast<std::size_t>(i * m.entries_per_row + k)];
            if (c == EllMatrix::kPaddingCol) {
                acc.structure_read();
                break;
            }
            acc.visit(i, c);
        }
    }
}

}  // namespace

FeatureVector extract_features(const DynamicMatrix& m, double true_diag_ratio,
                               FeatureScanStats* stats) {
    index_t nrows = m.nrows();
    index_t ncols = m.ncols();
    if (nrows < 1 || ncols < 1) {
        throw EmptyMatrix("extract_features: matrix has a zero dimension");
    }
    if (!(true_diag_ratio > 0.0) || true_diag_ratio > 1.0) {
        throw InvalidInput("extract_features: true_diag_ratio must be in (0, 1]");
    }

    ScanAccumulator acc(nrows, ncols, stats);
    switch (m.format()) {
        case FormatId::coo:
            scan_coo(m.as<CooMatrix>(), acc);
            break;
        case FormatId::csr:
            scan_csr(m.as<CsrMatrix>(), acc);
            break;
        case FormatId::dia:
            scan_dia(m.as<DiaMatrix>(), acc);
            break;
        case FormatId::ell:
            scan_ell(m.as<EllMatrix>(), acc);
            break;
        case FormatId::hyb: {
            const HybMatrix& h = m.as<HybMatrix>();
            scan_ell(h.ell_part, acc);
            scan_coo(h.coo_part, acc);
            break;
        }
        case FormatId::hdc: {
            const HdcMatrix& h = m.as<HdcMatrix>();
            scan_dia(h.dia_part, acc);
            scan_csr(h.csr_part, acc);
            break;
        }
    }

    FeatureVector f;
    f.nrows = nrows;
    f.ncols = ncols;

    index_t max_row = 0;
    index_t min_row = acc.row_counts.empty() ? 0 : acc.row_counts.front();
    for (index_t c : acc.row_counts) {
        f.nnz += c;
        max_row = std::max(max_row, c);
        min_row = std::min(min_row, c);
    }
    f.max_nnz_per_row = max_row;
    f.min_nnz_per_row = min_row;
    f.avg_nnz_per_row =
        static_cast<double>(f.nnz) / static_cast<double>(nrows);
    f.density = static_cast<double>(f.nnz) /
                (static_cast<double>(nrows) * static_cast<double>(ncols));

    double sq_dev = 0.0;
    for (index_t c : acc.row_counts) {
        double dev = static_cast<double>(c) - f.avg_nnz_per_row;
        sq_dev += dev * dev;
    }
    f.nnz_row_spread = sq_dev / static_cast<double>(nrows);

    index_t threshold = static_cast<index_t>(
        std::ceil(true_diag_ratio * static_cast<double>(std::min(nrows, ncols))));
    for (index_t c : acc.diag_counts) {
        if (c >= 1) f.ndiags++;
        if (c >= threshold) f.ntrue_diags++;
    }
    return f;
}

std::array<double, kNumFeatures> features_to_row(const FeatureVector& f) {
    return {static_cast<double>(f.nrows),
            static_cast<double>(f.ncols),
            static_cast<double>(f.nnz),
            f.avg_nnz_per_row,
            f.density,
            static_cast<double>(f.max_nnz_per_row),
            static_cast<double>(f.min_nnz_per_row),
            f.nnz_row_spread,
            static_cast<double>(f.ndiags),
            static_cast<double>(f.ntrue_diags)};
}

FeatureVector row_to_features(const std::array<double, kNumFeatures>& row) {
    FeatureVector f;
    f.nrows = static_cast<index_t>(row[0]);
    f.ncols = static_cast<index_t>(row[1]);
    f.nnz = static_cast<index_t>(row[2]);
    f.avg_nnz_per_row = row[3];
    f.density = row[4];
    f.max_nnz_per_row = static_cast<index_t>(row[5]);
    f.min_nnz_per_row = static_cast<index_t>(row[6]);
    f.nnz_row_spread = row[7];
    f.ndiags = static_cast<index_t>(row[8]);
    f.ntrue_diags = static_cast<index_t>(row[9]);
    return f;
}

}  // namespace sparseoracle
