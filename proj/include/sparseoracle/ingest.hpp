#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sparseoracle/formats.hpp"
#include "sparseoracle/trainer.hpp"

namespace sparseoracle {

// Accepted subset: matrix coordinate {real, integer, pattern} with symmetry
// {general, symmetric}. Everything else raises UnsupportedFormat.
struct MatrixMarketHeader {
    enum class Field { real, integer, pattern };
    enum class Symmetry { general, symmetric };
    Field field = Field::real;
    Symmetry symmetry = Symmetry::general;
};

// 1-based indices become 0-based, symmetric off-diagonals are mirrored,
// pattern entries get value 1.0, and the result is canonicalized.
CooMatrix read_matrix_market(const std::filesystem::path& path);

// Header line '%%MatrixMarket matrix coordinate real general', 1-based
// indices, shortest round-trip decimals.
void write_matrix_market(const CooMatrix& m, const std::filesystem::path& path);

struct CorpusEntry {
    std::string matrix_id;
    std::string group;
    std::string download_url;
    std::filesystem::path local_path;
    index_t nrows = 0;
    index_t ncols = 0;
    index_t nnz = 0;
    std::string checksum;  // optional sha256 hex of the stored file
};

// CSV: matrix_id,group,download_url,nrows,ncols,nnz,checksum
std::vector<CorpusEntry> read_manifest(const std::filesystem::path& path);

struct CorpusFilters {
    index_t min_rows = 0;
    index_t max_rows = 0;  // 0 disables the bound
    index_t min_nnz = 0;
    index_t max_nnz = 0;
    bool square_only = false;

    bool admits(const CorpusEntry& entry) const;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Injected so tests can stub the network entirely.
using Transport = std::function<HttpResponse(const std::string& url)>;

Transport default_transport();

struct FetchOptions {
    CorpusFilters filters;
    Transport transport;  // default HTTP(S) client when empty
    int workers = 4;
    int retries = 3;  // on transport errors and 5xx
    double backoff_base_seconds = 0.5;
};

struct FetchFailure {
    std::string matrix_id;
    std::string error;
};

struct FetchReport {
    std::vector<CorpusEntry> entries;  // present on disk, manifest order
    std::vector<FetchFailure> failures;
    int downloads = 0;  // transport calls that stored a file
};

// Downloads missing files, verifies checksums when present, inflates
// single-file gzip payloads, and skips files already on disk. Failures are
// recorded per entry; partial success is returned, not raised.
FetchReport fetch_corpus(const std::filesystem::path& manifest_path,
                         const std::filesystem::path& dest_dir,
                         const FetchOptions& options = {});

std::string sha256_hex(const std::string& bytes);

// -- pipeline records ------------------------------------------------------

struct ProfileRecord {
    std::string matrix_id;
    FormatId format = FormatId::coo;
    index_t repetitions = 0;
    double total_seconds = 0.0;
    bool feasible = false;
    std::string backend_label;  // e.g. "serial", "parallel-16"
};

// CSV: matrix_id,format_id,repetitions,total_seconds,feasible
void write_profile_csv(const std::filesystem::path& path,
                       const std::vector<ProfileRecord>& records);
std::vector<ProfileRecord> read_profile_csv(const std::filesystem::path& path);

struct FeatureCsvRow {
    std::string matrix_id;
    FeatureVector features;
};

// CSV: matrix_id,M,N,NNZ,avg_nnz,density,max_nnz,min_nnz,nnz_spread,
//      ndiags,ntrue_diags[,label]
void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<FeatureCsvRow>& rows);
std::vector<FeatureCsvRow> read_feature_csv(const std::filesystem::path& path);

void write_training_csv(const std::filesystem::path& path, const Dataset& d);
Dataset read_training_csv(const std::filesystem::path& path);

struct TrainingCsvResult {
    std::size_t rows_written = 0;
    std::vector<std::string> skipped;  // missing features or no feasible timing
};

// Joins features with profiling results; the label is the format with the
// minimum total time among feasible records, ties to the lowest FormatId.
// When corpus_ids is given, profiles outside it raise JoinError.
TrainingCsvResult build_training_csv(
    const std::vector<FeatureCsvRow>& features,
    const std::vector<ProfileRecord>& profiles,
    const std::filesystem::path& out_path,
    const std::optional<std::vector<std::string>>& corpus_ids = std::nullopt);

}  // namespace sparseoracle
