#include "sparseoracle/formats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sparseoracle {

namespace {

const std::array<std::string_view, kNumFormats> kFormatNames = {
    "COO", "CSR", "DIA", "ELL", "HYB", "HDC"};

index_t checked_mul(index_t a, index_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > std::numeric_limits<index_t>::max() / b) {
        return std::numeric_limits<index_t>::max();
    }
    return a * b;
}

void require_canonical(const CooMatrix& src) {
    if (!src.is_canonical()) {
        throw InvalidInput("from_coo: source matrix is not canonical COO");
    }
}

std::vector<index_t> row_counts_of(const CooMatrix& src) {
    std::vector<index_t> counts(static_cast<std::size_t>(src.nrows), 0);
    for (index_t k = 0; k < src.nnz(); ++k) {
        counts[static_cast<std::size_t>(src.row_idx[k])]++;
    }
    return counts;
}

void check_dense_cap(index_t allocation, index_t cap, std::string_view what) {
    if (allocation > cap) {
        throw PaddingOverflow(std::string(what) + " allocation of " +
                              std::to_string(allocation) +
                              " entries exceeds padding cap " +
                              std::to_string(cap));
    }
}

CsrMatrix coo_to_csr(const CooMatrix& src) {
    CsrMatrix dst;
    dst.nrows = src.nrows;
    dst.ncols = src.ncols;
    dst.row_ptr.assign(static_cast<std::size_t>(src.nrows) + 1, 0);
    dst.col_idx = src.col_idx;
    dst.values = src.values;
    for (index_t k = 0; k < src.nnz(); ++k) {
        dst.row_ptr[static_cast<std::size_t>(src.row_idx[k]) + 1]++;
    }
    for (index_t i = 0; i < src.nrows; ++i) {
        dst.row_ptr[static_cast<std::size_t>(i) + 1] +=
            dst.row_ptr[static_cast<std::size_t>(i)];
    }
    return dst;
}

// Collects the distinct diagonal offsets of a triplet subset and lays each
// diagonal out densely over all nrows cells.
DiaMatrix build_dia(index_t nrows, index_t ncols,
                    const std::vector<Triplet>& entries, index_t cap) {
    DiaMatrix dst;
    dst.nrows = nrows;
    dst.ncols = ncols;

    std::vector<char> seen(static_cast<std::size_t>(nrows + ncols), 0);
    for (const Triplet& t : entries) {
        seen[static_cast<std::size_t>(t.col - t.row + nrows - 1)] = 1;
    }
    for (index_t key = 0; key < nrows + ncols - 1 && nrows > 0 && ncols > 0;
         ++key) {
        if (seen[static_cast<std::size_t>(key)]) {
            dst.offsets.push_back(key - (nrows - 1));
        }
    }

    index_t allocation = checked_mul(dst.ndiags(), nrows);
    check_dense_cap(allocation, cap, "DIA");

    dst.values.assign(static_cast<std::size_t>(allocation), 0.0);
    std::vector<index_t> slot(static_cast<std::size_t>(nrows + ncols), -1);
    for (index_t d = 0; d < dst.ndiags(); ++d) {
        slot[static_cast<std::size_t>(dst.offsets[static_cast<std::size_t>(d)] +
                                      nrows - 1)] = d;
    }
    for (const Triplet& t : entries) {
        index_t d = slot[static_cast<std::size_t>(t.col - t.row + nrows - 1)];
        dst.values[static_cast<std::size_t>(d * nrows + t.row)] = t.value;
        if (t.value != 0.0) dst.stored_nnz++;
    }
    return dst;
}

DiaMatrix coo_to_dia(const CooMatrix& src, index_t cap) {
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(src.nnz()));
    for (index_t k = 0; k < src.nnz(); ++k) {
        entries.push_back({src.row_idx[k], src.col_idx[k], src.values[k]});
    }
    return build_dia(src.nrows, src.ncols, entries, cap);
}

// Rows must arrive in canonical order; each row's entries fill slots
// left-to-right followed by sentinel padding.
EllMatrix build_ell(index_t nrows, index_t ncols, index_t width,
                    const CooMatrix& src, index_t cap) {
    index_t allocation = checked_mul(width, nrows);
    check_dense_cap(allocation, cap, "ELL");

    EllMatrix dst;
    dst.nrows = nrows;
    dst.ncols = ncols;
    dst.entries_per_row = width;
    dst.col_idx.assign(static_cast<std::size_t>(allocation),
                       EllMatrix::kPaddingCol);
    dst.values.assign(static_cast<std::size_t>(allocation), 0.0);
    std::vector<index_t> fill(static_cast<std::size_t>(nrows), 0);
    for (index_t k = 0; k < src.nnz(); ++k) {
        index_t i = src.row_idx[k];
        index_t slot = i * width + fill[static_cast<std::size_t>(i)]++;
        dst.col_idx[static_cast<std::size_t>(slot)] = src.col_idx[k];
        dst.values[static_cast<std::size_t>(slot)] = src.values[k];
    }
    dst.stored_nnz = src.nnz();
    return dst;
}

EllMatrix coo_to_ell(const CooMatrix& src, index_t cap) {
    std::vector<index_t> counts = row_counts_of(src);
    index_t width = counts.empty()
                        ? 0
                        : *std::max_element(counts.begin(), counts.end());
    return build_ell(src.nrows, src.ncols, width, src, cap);
}

HybMatrix coo_to_hyb(const CooMatrix& src, const ConversionConfig& config,
                     index_t cap) {
    index_t kh = config.effective_kh(src.nnz(), src.nrows);

    CooMatrix ell_src;
    ell_src.nrows = src.nrows;
    ell_src.ncols = src.ncols;
    CooMatrix coo_src;
    coo_src.nrows = src.nrows;
    coo_src.ncols = src.ncols;

    index_t ell_width = 0;
    index_t row_fill = 0;
    index_t prev_row = -1;
    for (index_t k = 0; k < src.nnz(); ++k) {
        if (src.row_idx[k] != prev_row) {
            prev_row = src.row_idx[k];
            row_fill = 0;
        }
        CooMatrix& part = row_fill < kh ? ell_src : coo_src;
        part.row_idx.push_back(src.row_idx[k]);
        part.col_idx.push_back(src.col_idx[k]);
        part.values.push_back(src.values[k]);
        ++row_fill;
        if (row_fill <= kh) ell_width = std::max(ell_width, row_fill);
    }

    HybMatrix dst;
    dst.kh = kh;
    dst.ell_part = build_ell(src.nrows, src.ncols, ell_width, ell_src, cap);
    dst.coo_part = std::move(coo_src);
    return dst;
}

HdcMatrix coo_to_hdc(const CooMatrix& src, const ConversionConfig& config,
                     index_t cap) {
    index_t threshold = config.true_diag_threshold(src.nrows, src.ncols);

    std::vector<index_t> diag_count(
        static_cast<std::size_t>(src.nrows + src.ncols), 0);
    for (index_t k = 0; k < src.nnz(); ++k) {
        diag_count[static_cast<std::size_t>(src.col_idx[k] - src.row_idx[k] +
                                            src.nrows - 1)]++;
    }

    std::vector<Triplet> dia_entries;
    CooMatrix csr_src;
    csr_src.nrows = src.nrows;
    csr_src.ncols = src.ncols;
    for (index_t k = 0; k < src.nnz(); ++k) {
        index_t key = src.col_idx[k] - src.row_idx[k] + src.nrows - 1;
        if (diag_count[static_cast<std::size_t>(key)] >= threshold) {
            dia_entries.push_back({src.row_idx[k], src.col_idx[k], src.values[k]});
        } else {
            csr_src.row_idx.push_back(src.row_idx[k]);
            csr_src.col_idx.push_back(src.col_idx[k]);
            csr_src.values.push_back(src.values[k]);
        }
    }

    HdcMatrix dst;
    dst.true_diag_threshold = threshold;
    dst.dia_part = build_dia(src.nrows, src.ncols, dia_entries, cap);
    dst.csr_part = coo_to_csr(csr_src);
    return dst;
}

void append_csr_triplets(const CsrMatrix& m, std::vector<Triplet>& out) {
    for (index_t i = 0; i < m.nrows; ++i) {
        for (index_t k = m.row_ptr[static_cast<std::size_t>(i)];
             k < m.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            out.push_back({i, m.col_idx[static_cast<std::size_t>(k)],
                           m.values[static_cast<std::size_t>(k)]});
        }
    }
}

// Padding and hole cells read back as exact zeros and are skipped.
void append_dia_triplets(const DiaMatrix& m, std::vector<Triplet>& out) {
    for (index_t d = 0; d < m.ndiags(); ++d) {
        index_t off = m.offsets[static_cast<std::size_t>(d)];
        index_t lo = std::max<index_t>(0, -off);
        index_t hi = std::min(m.nrows, m.ncols - off);
        for (index_t i = lo; i < hi; ++i) {
            double v = m.values[static_cast<std::size_t>(d * m.nrows + i)];
            if (v != 0.0) out.push_back({i, i + off, v});
        }
    }
}

void append_ell_triplets(const EllMatrix& m, std::vector<Triplet>& out) {
    for (index_t i = 0; i < m.nrows; ++i) {
        for (index_t k = 0; k < m.entries_per_row; ++k) {
            index_t c = m.col_idx[static_cast<std::size_t>(i * m.entries_per_row + k)];
            if (c == EllMatrix::kPaddingCol) break;
            out.push_back(
                {i, c, m.values[static_cast<std::size_t>(i * m.entries_per_row + k)]});
        }
    }
}

void append_coo_triplets(const CooMatrix& m, std::vector<Triplet>& out) {
    for (index_t k = 0; k < m.nnz(); ++k) {
        out.push_back({m.row_idx[k], m.col_idx[k], m.values[k]});
    }
}

CooMatrix triplets_to_canonical(index_t nrows, index_t ncols,
                                std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end(),
              [](const Triplet& a, const Triplet& b) {
                  return a.row != b.row ? a.row < b.row : a.col < b.col;
              });
    CooMatrix dst;
    dst.nrows = nrows;
    dst.ncols = ncols;
    dst.row_idx.reserve(triplets.size());
    dst.col_idx.reserve(triplets.size());
    dst.values.reserve(triplets.size());
    for (const Triplet& t : triplets) {
        dst.row_idx.push_back(t.row);
        dst.col_idx.push_back(t.col);
        dst.values.push_back(t.value);
    }
    return dst;
}

}  // namespace

std::string_view format_name(FormatId id) {
    return kFormatNames[static_cast<std::size_t>(id)];
}

std::optional<FormatId> format_from_name(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    for (int i = 0; i < kNumFormats; ++i) {
        if (upper == kFormatNames[static_cast<std::size_t>(i)]) {
            return static_cast<FormatId>(i);
        }
    }
    return std::nullopt;
}

FormatId format_from_id(int id) {
    if (id < 0 || id >= kNumFormats) {
        throw InvalidInput("format id " + std::to_string(id) +
                           " outside 0.." + std::to_string(kNumFormats - 1));
    }
    return static_cast<FormatId>(id);
}

CooMatrix CooMatrix::from_triplets(index_t nrows, index_t ncols,
                                   std::vector<Triplet> triplets) {
    for (const Triplet& t : triplets) {
        if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols) {
            throw IndexOutOfRange(
                "triplet (" + std::to_string(t.row) + ", " +
                std::to_string(t.col) + ") outside " + std::to_string(nrows) +
                "x" + std::to_string(ncols));
        }
    }
    std::sort(triplets.begin(), triplets.end(),
              [](const Triplet& a, const Triplet& b) {
                  return a.row != b.row ? a.row < b.row : a.col < b.col;
              });

    CooMatrix dst;
    dst.nrows = nrows;
    dst.ncols = ncols;
    for (const Triplet& t : triplets) {
        if (!dst.row_idx.empty() && dst.row_idx.back() == t.row &&
            dst.col_idx.back() == t.col) {
            dst.values.back() += t.value;
        } else {
            dst.row_idx.push_back(t.row);
            dst.col_idx.push_back(t.col);
            dst.values.push_back(t.value);
        }
    }
    return dst;
}

bool CooMatrix::is_canonical() const {
    if (nrows < 0 || ncols < 0) return false;
    if (row_idx.size() != values.size() || col_idx.size() != values.size()) {
        return false;
    }
    for (index_t k = 0; k < nnz(); ++k) {
        if (row_idx[k] < 0 || row_idx[k] >= nrows) return false;
        if (col_idx[k] < 0 || col_idx[k] >= ncols) return false;
        if (k > 0) {
            bool ordered = row_idx[k - 1] < row_idx[k] ||
                           (row_idx[k - 1] == row_idx[k] &&
                            col_idx[k - 1] < col_idx[k]);
            if (!ordered) return false;
        }
    }
    return true;
}

bool operator==(const CooMatrix& a, const CooMatrix& b) {
    return a.nrows == b.nrows && a.ncols == b.ncols &&
           a.row_idx == b.row_idx && a.col_idx == b.col_idx &&
           a.values == b.values;
}

index_t ConversionConfig::padded_entry_cap(index_t nnz) const {
    if (max_padded_entries > 0) return max_padded_entries;
    double cap = max_padding_factor * static_cast<double>(nnz);
    if (cap >= static_cast<double>(std::numeric_limits<index_t>::max())) {
        return std::numeric_limits<index_t>::max();
    }
    return static_cast<index_t>(cap);
}

index_t ConversionConfig::effective_kh(index_t nnz, index_t nrows) const {
    if (kh_override > 0) return kh_override;
    if (nrows <= 0 || nnz <= 0) return 0;
    return (nnz + nrows - 1) / nrows;  // ceil(nnz / nrows)
}

index_t ConversionConfig::true_diag_threshold(index_t nrows,
                                              index_t ncols) const {
    double len = static_cast<double>(std::min(nrows, ncols));
    return static_cast<index_t>(std::ceil(true_diag_ratio * len));
}

index_t DynamicMatrix::nrows() const {
    return std::visit(
        [](const auto& m) -> index_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, HybMatrix> ||
                          std::is_same_v<T, HdcMatrix>) {
                return m.nrows();
            } else {
                return m.nrows;
            }
        },
        payload_);
}

index_t DynamicMatrix::ncols() const {
    return std::visit(
        [](const auto& m) -> index_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, HybMatrix> ||
                          std::is_same_v<T, HdcMatrix>) {
                return m.ncols();
            } else {
                return m.ncols;
            }
        },
        payload_);
}

index_t DynamicMatrix::nnz() const {
    return std::visit(
        [](const auto& m) -> index_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DiaMatrix> ||
                          std::is_same_v<T, EllMatrix>) {
                return m.stored_nnz;
            } else {
                return m.nnz();
            }
        },
        payload_);
}

DynamicMatrix from_coo(const CooMatrix& src, FormatId target,
                       const ConversionConfig& config) {
    require_canonical(src);
    index_t cap = config.padded_entry_cap(src.nnz());
    switch (target) {
        case FormatId::coo:
            return DynamicMatrix(src);
        case FormatId::csr:
            return DynamicMatrix(coo_to_csr(src));
        case FormatId::dia:
            return DynamicMatrix(coo_to_dia(src, cap));
        case FormatId::ell:
            return DynamicMatrix(coo_to_ell(src, cap));
        case FormatId::hyb:
            return DynamicMatrix(coo_to_hyb(src, config, cap));
        case FormatId::hdc:
            return DynamicMatrix(coo_to_hdc(src, config, cap));
    }
    throw InvalidInput("unknown target format");
}

CooMatrix to_coo(const DynamicMatrix& m) {
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(m.nnz()));
    switch (m.format()) {
        case FormatId::coo:
            return m.as<CooMatrix>();
        case FormatId::csr:
            append_csr_triplets(m.as<CsrMatrix>(), triplets);
            break;
        case FormatId::dia:
            append_dia_triplets(m.as<DiaMatrix>(), triplets);
            break;
        case FormatId::ell:
            append_ell_triplets(m.as<EllMatrix>(), triplets);
            break;
        case FormatId::hyb: {
            const HybMatrix& h = m.as<HybMatrix>();
            append_ell_triplets(h.ell_part, triplets);
            append_coo_triplets(h.coo_part, triplets);
            break;
        }
        case FormatId::hdc: {
            const HdcMatrix& h = m.as<HdcMatrix>();
            append_dia_triplets(h.dia_part, triplets);
            append_csr_triplets(h.csr_part, triplets);
            break;
        }
    }
    return triplets_to_canonical(m.nrows(), m.ncols(), std::move(triplets));
}

void switch_format(DynamicMatrix& m, FormatId target,
                   const ConversionConfig& config) {
    if (m.format() == target) return;
    m = from_coo(to_coo(m), target, config);
}

}  // namespace sparseoracle
