#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "sparseoracle/errors.hpp"

namespace sparseoracle {

using index_t = std::int64_t;

// Integer IDs are stable: they appear in model files and training CSVs.
enum class FormatId : int {
    coo = 0,
    csr = 1,
    dia = 2,
    ell = 3,
    hyb = 4,
    hdc = 5,
};

inline constexpr int kNumFormats = 6;

inline constexpr std::array<FormatId, kNumFormats> all_formats() {
    return {FormatId::coo, FormatId::csr, FormatId::dia,
            FormatId::ell, FormatId::hyb, FormatId::hdc};
}

std::string_view format_name(FormatId id);
std::optional<FormatId> format_from_name(std::string_view name);
FormatId format_from_id(int id);  // throws InvalidInput for ids outside 0..5

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

// Canonical triplet storage: sorted lexicographically by (row, col), no
// duplicate coordinates. Source of truth for all conversions. Explicitly
// stored zeros are kept as structural entries.
struct CooMatrix {
    index_t nrows = 0;
    index_t ncols = 0;
    std::vector<index_t> row_idx;
    std::vector<index_t> col_idx;
    std::vector<double> values;

    index_t nnz() const { return static_cast<index_t>(values.size()); }

    // Sorts row-major and sums duplicate coordinates.
    static CooMatrix from_triplets(index_t nrows, index_t ncols,
                                   std::vector<Triplet> triplets);

    bool is_canonical() const;
};

bool operator==(const CooMatrix& a, const CooMatrix& b);

struct CsrMatrix {
    index_t nrows = 0;
    index_t ncols = 0;
    std::vector<index_t> row_ptr;  // len nrows + 1, non-decreasing
    std::vector<index_t> col_idx;  // strictly increasing within each row
    std::vector<double> values;

    index_t nnz() const { return static_cast<index_t>(values.size()); }
};

// Dense diagonal storage. values has shape (ndiags x nrows) row-major:
// values[d * nrows + i] holds A[i, i + offsets[d]], or exactly 0 where
// i + offsets[d] falls outside the column range or the diagonal has a hole.
struct DiaMatrix {
    index_t nrows = 0;
    index_t ncols = 0;
    std::vector<index_t> offsets;  // strictly increasing, in [-(nrows-1), ncols-1]
    std::vector<double> values;
    index_t stored_nnz = 0;  // nonzero in-range cells

    index_t ndiags() const { return static_cast<index_t>(offsets.size()); }
};

// Fixed-width rows padded to K = max row population. Padding slots carry
// column sentinel -1 and value 0; real entries precede padding within a row.
struct EllMatrix {
    index_t nrows = 0;
    index_t ncols = 0;
    index_t entries_per_row = 0;   // K
    std::vector<index_t> col_idx;  // nrows x K row-major
    std::vector<double> values;    // nrows x K row-major
    index_t stored_nnz = 0;

    static constexpr index_t kPaddingCol = -1;
};

// ELL portion of width min(K_H, max row nnz) plus a canonical COO portion
// holding each row's surplus beyond K_H.
struct HybMatrix {
    EllMatrix ell_part;
    CooMatrix coo_part;
    index_t kh = 0;  // configured K_H

    index_t nrows() const { return ell_part.nrows; }
    index_t ncols() const { return ell_part.ncols; }
    index_t nnz() const { return ell_part.stored_nnz + coo_part.nnz(); }
};

// Diagonals whose entry count reaches true_diag_threshold are stored in the
// DIA part; every remaining entry lands in the CSR part.
struct HdcMatrix {
    DiaMatrix dia_part;
    CsrMatrix csr_part;
    index_t true_diag_threshold = 0;

    index_t nrows() const { return csr_part.nrows; }
    index_t ncols() const { return csr_part.ncols; }
    index_t nnz() const { return dia_part.stored_nnz + csr_part.nnz(); }
};

struct ConversionConfig {
    // K_H for HYB; 0 selects ceil(nnz / nrows).
    index_t kh_override = 0;
    // A diagonal qualifies as "true" when its entry count reaches
    // ceil(true_diag_ratio * min(nrows, ncols)). Shared with feature N_TD.
    double true_diag_ratio = 0.2;
    // Dense allocations (ndiags x nrows, nrows x K) above the cap raise
    // PaddingOverflow. Cap is max_padded_entries when positive, otherwise
    // max_padding_factor * nnz.
    double max_padding_factor = 10.0;
    index_t max_padded_entries = 0;

    index_t padded_entry_cap(index_t nnz) const;
    index_t effective_kh(index_t nnz, index_t nrows) const;
    index_t true_diag_threshold(index_t nrows, index_t ncols) const;
};

// Tagged union over the six formats; the variant index is the FormatId.
class DynamicMatrix {
public:
    using Payload = std::variant<CooMatrix, CsrMatrix, DiaMatrix, EllMatrix,
                                 HybMatrix, HdcMatrix>;

    DynamicMatrix() : payload_(CooMatrix{}) {}

    template <typename T,
              typename = std::enable_if_t<std::is_constructible_v<Payload, T&&>>>
    explicit DynamicMatrix(T&& payload) : payload_(std::forward<T>(payload)) {}

    FormatId format() const { return static_cast<FormatId>(payload_.index()); }

    index_t nrows() const;
    index_t ncols() const;
    index_t nnz() const;

    template <typename T>
    const T& as() const {
        return std::get<T>(payload_);
    }
    template <typename T>
    T& as() {
        return std::get<T>(payload_);
    }

    const Payload& payload() const { return payload_; }

private:
    Payload payload_;
};

// Conversions route through canonical COO. from_coo requires canonical input
// (InvalidInput otherwise) and raises PaddingOverflow when the target's dense
// allocation exceeds the configured cap.
DynamicMatrix from_coo(const CooMatrix& src, FormatId target,
                       const ConversionConfig& config = {});

// Drops padding (zero cells, sentinel columns); result is canonical.
CooMatrix to_coo(const DynamicMatrix& m);

// No-op when the active format already matches the target.
void switch_format(DynamicMatrix& m, FormatId target,
                   const ConversionConfig& config = {});

}  // namespace sparseoracle
