#include "sparseoracle/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>
#include <zlib.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "sparseoracle/model.hpp"  // format_double

namespace sparseoracle {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line,
                             const std::string& what) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

index_t parse_index(const std::string& tok, const std::filesystem::path& path,
                    int line) {
    index_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
        parse_fail(path, line, "expected integer, got '" + tok + "'");
    }
    return v;
}

double parse_real(const std::string& tok, const std::filesystem::path& path,
                  int line) {
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
        parse_fail(path, line, "expected number, got '" + tok + "'");
    }
    return v;
}

MatrixMarketHeader parse_mm_header(const std::string& line,
                                   const std::filesystem::path& path) {
    std::istringstream ss(line);
    std::string banner, object, format, field, symmetry;
    ss >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") {
        parse_fail(path, 1, "missing %%MatrixMarket banner");
    }
    if (lower(object) != "matrix") {
        throw UnsupportedFormat(path.string() + ": object '" + object +
                                "' not supported");
    }
    if (lower(format) != "coordinate") {
        throw UnsupportedFormat(path.string() + ": format '" + format +
                                "' not supported (coordinate only)");
    }
    MatrixMarketHeader header;
    std::string f = lower(field);
    if (f == "real") {
        header.field = MatrixMarketHeader::Field::real;
    } else if (f == "integer") {
        header.field = MatrixMarketHeader::Field::integer;
    } else if (f == "pattern") {
        header.field = MatrixMarketHeader::Field::pattern;
    } else {
        throw UnsupportedFormat(path.string() + ": field '" + field +
                                "' not supported");
    }
    std::string s = lower(symmetry);
    if (s == "general") {
        header.symmetry = MatrixMarketHeader::Symmetry::general;
    } else if (s == "symmetric") {
        header.symmetry = MatrixMarketHeader::Symmetry::symmetric;
    } else {
        throw UnsupportedFormat(path.string() + ": symmetry '" + symmetry +
                                "' not supported");
    }
    return header;
}

bool is_gzip(const std::string& bytes) {
    return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
           static_cast<unsigned char>(bytes[1]) == 0x8b;
}

std::string gunzip(const std::string& bytes) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
        throw Error("gunzip: inflateInit2 failed");
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());

    std::string out;
    char buf[1 << 15];
    int ret = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw Error("gunzip: corrupt stream");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (ret != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
}

}  // namespace

CooMatrix read_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
    ++line_no;
    MatrixMarketHeader header = parse_mm_header(line, path);

    index_t nrows = 0, ncols = 0, declared = 0;
    bool have_dims = false;
    std::vector<Triplet> triplets;
    index_t seen = 0;
    const bool pattern = header.field == MatrixMarketHeader::Field::pattern;
    const bool symmetric =
        header.symmetry == MatrixMarketHeader::Symmetry::symmetric;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        if (!have_dims) {
            std::string a, b, c, extra;
            if (!(ss >> a >> b >> c) || (ss >> extra)) {
                parse_fail(path, line_no, "expected 'rows cols nnz'");
            }
            nrows = parse_index(a, path, line_no);
            ncols = parse_index(b, path, line_no);
            declared = parse_index(c, path, line_no);
            if (nrows < 0 || ncols < 0 || declared < 0) {
                parse_fail(path, line_no, "negative dimension");
            }
            if (symmetric && nrows != ncols) {
                parse_fail(path, line_no, "symmetric matrix must be square");
            }
            have_dims = true;
            continue;
        }
        std::string a, b, c, extra;
        bool ok = pattern ? static_cast<bool>(ss >> a >> b)
                          : static_cast<bool>(ss >> a >> b >> c);
        if (!ok || (ss >> extra)) {
            parse_fail(path, line_no,
                       pattern ? "expected 'row col'" : "expected 'row col value'");
        }
        if (++seen > declared) {
            parse_fail(path, line_no,
                       "more than the declared " + std::to_string(declared) +
                           " entries");
        }
        index_t row = parse_index(a, path, line_no);
        index_t col = parse_index(b, path, line_no);
        if (row < 1 || row > nrows || col < 1 || col > ncols) {
            throw IndexOutOfRange(path.string() + ":" + std::to_string(line_no) +
                                  ": entry (" + a + ", " + b + ") outside " +
                                  std::to_string(nrows) + "x" +
                                  std::to_string(ncols));
        }
        double value = pattern ? 1.0 : parse_real(c, path, line_no);
        triplets.push_back({row - 1, col - 1, value});
        if (symmetric && row != col) {
            triplets.push_back({col - 1, row - 1, value});
        }
    }
    if (!have_dims) parse_fail(path, line_no, "missing dimension line");
    if (seen != declared) {
        parse_fail(path, line_no,
                   "declared " + std::to_string(declared) + " entries, found " +
                       std::to_string(seen));
    }
    return CooMatrix::from_triplets(nrows, ncols, std::move(triplets));
}

void write_matrix_market(const CooMatrix& m,
                         const std::filesystem::path& path) {
    if (!m.is_canonical()) {
        throw InvalidInput("write_matrix_market: matrix is not canonical");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.nrows << " " << m.ncols << " " << m.nnz() << "\n";
    for (index_t k = 0; k < m.nnz(); ++k) {
        out << m.row_idx[static_cast<std::size_t>(k)] + 1 << " "
            << m.col_idx[static_cast<std::size_t>(k)] + 1 << " "
            << format_double(m.values[static_cast<std::size_t>(k)]) << "\n";
    }
    if (!out) throw Error("write failed for " + path.string());
}

std::vector<CorpusEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open manifest " + path.string());
    std::string line;
    int line_no = 0;
    std::vector<CorpusEntry> entries;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("matrix_id,", 0) == 0) continue;
        std::vector<std::string> f = split_csv(line);
        if (f.size() != 7) {
            parse_fail(path, line_no, "manifest row needs 7 fields");
        }
        CorpusEntry e;
        e.matrix_id = f[0];
        e.group = f[1];
        e.download_url = f[2];
        e.nrows = parse_index(f[3], path, line_no);
        e.ncols = parse_index(f[4], path, line_no);
        e.nnz = parse_index(f[5], path, line_no);
        e.checksum = f[6];
        if (e.matrix_id.empty()) parse_fail(path, line_no, "empty matrix_id");
        if (!seen.emplace(e.matrix_id, line_no).second) {
            parse_fail(path, line_no, "duplicate matrix_id " + e.matrix_id);
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

bool CorpusFilters::admits(const CorpusEntry& e) const {
    if (min_rows > 0 && e.nrows < min_rows) return false;
    if (max_rows > 0 && e.nrows > max_rows) return false;
    if (min_nnz > 0 && e.nnz < min_nnz) return false;
    if (max_nnz > 0 && e.nnz > max_nnz) return false;
    if (square_only && e.nrows != e.ncols) return false;
    return true;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

Transport default_transport() {
    return [](const std::string& url) -> HttpResponse {
        std::size_t scheme_end = url.find("://");
        if (scheme_end == std::string::npos) {
            throw NetworkError("bad url: " + url);
        }
        std::size_t path_start = url.find('/', scheme_end + 3);
        std::string base = path_start == std::string::npos
                               ? url
                               : url.substr(0, path_start);
        std::string target =
            path_start == std::string::npos ? "/" : url.substr(path_start);
        httplib::Client client(base);
        client.set_follow_location(true);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Result res = client.Get(target);
        if (!res) {
            throw NetworkError("request failed: " + url + " (" +
                               httplib::to_string(res.error()) + ")");
        }
        return {res->status, res->body};
    };
}

FetchReport fetch_corpus(const std::filesystem::path& manifest_path,
                         const std::filesystem::path& dest_dir,
                         const FetchOptions& options) {
    std::vector<CorpusEntry> manifest = read_manifest(manifest_path);
    std::filesystem::create_directories(dest_dir);

    std::vector<CorpusEntry> tasks;
    for (const CorpusEntry& e : manifest) {
        if (!options.filters.admits(e)) continue;
        tasks.push_back(e);
        tasks.back().local_path = dest_dir / (e.matrix_id + ".mtx");
    }

    Transport transport =
        options.transport ? options.transport : default_transport();

    FetchReport report;
    std::vector<std::optional<FetchFailure>> failures(tasks.size());
    std::vector<char> fetched(tasks.size(), 0);  // not vector<bool>: workers
                                                 // write distinct elements
    std::mutex mu;
    std::size_t next_task = 0;
    int downloads = 0;

    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next_task == tasks.size()) return;
                i = next_task++;
            }
            CorpusEntry& entry = tasks[i];
            try {
                if (std::filesystem::exists(entry.local_path)) {
                    fetched[i] = 1;
                    continue;
                }
                std::string body;
                int attempt = 0;
                for (;;) {
                    try {
                        HttpResponse res = transport(entry.download_url);
                        if (res.status >= 500) {
                            throw NetworkError("HTTP " + std::to_string(res.status) +
                                               " for " + entry.download_url);
                        }
                        if (res.status != 200) {
                            // Definitive failure; retrying cannot help.
                            failures[i] = FetchFailure{
                                entry.matrix_id,
                                "HTTP " + std::to_string(res.status)};
                            break;
                        }
                        body = std::move(res.body);
                        break;
                    } catch (const NetworkError& err) {
                        if (++attempt > options.retries) {
                            failures[i] =
                                FetchFailure{entry.matrix_id, err.what()};
                            break;
                        }
                        std::this_thread::sleep_for(std::chrono::duration<double>(
                            options.backoff_base_seconds * (1 << (attempt - 1))));
                    }
                }
                if (failures[i]) continue;

                if (is_gzip(body)) body = gunzip(body);
                if (!entry.checksum.empty() &&
                    sha256_hex(body) != lower(entry.checksum)) {
                    throw ChecksumMismatch("checksum mismatch for " +
                                           entry.matrix_id);
                }

                std::filesystem::path tmp = entry.local_path;
                tmp += ".part";
                {
                    std::ofstream out(tmp, std::ios::binary);
                    out.write(body.data(),
                              static_cast<std::streamsize>(body.size()));
                    if (!out) throw Error("write failed: " + tmp.string());
                }
                std::filesystem::rename(tmp, entry.local_path);
                fetched[i] = 1;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    ++downloads;
                }
            } catch (const std::exception& err) {
                failures[i] = FetchFailure{entry.matrix_id, err.what()};
            }
        }
    };

    int workers = std::max(1, options.workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    report.downloads = downloads;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (failures[i]) {
            report.failures.push_back(*failures[i]);
        } else if (fetched[i]) {
            report.entries.push_back(tasks[i]);
        }
    }
    return report;
}

void write_profile_csv(const std::filesystem::path& path,
                       const std::vector<ProfileRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "matrix_id,format_id,repetitions,total_seconds,feasible\n";
    for (const ProfileRecord& r : records) {
        out << r.matrix_id << ',' << static_cast<int>(r.format) << ','
            << r.repetitions << ',' << format_double(r.total_seconds) << ','
            << (r.feasible ? 1 : 0) << "\n";
    }
}

std::vector<ProfileRecord> read_profile_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    int line_no = 0;
    std::vector<ProfileRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("matrix_id,", 0) == 0) continue;
        std::vector<std::string> f = split_csv(line);
        if (f.size() != 5) parse_fail(path, line_no, "profile row needs 5 fields");
        ProfileRecord r;
        r.matrix_id = f[0];
        r.format = format_from_id(
            static_cast<int>(parse_index(f[1], path, line_no)));
        r.repetitions = parse_index(f[2], path, line_no);
        r.total_seconds = parse_real(f[3], path, line_no);
        r.feasible = parse_index(f[4], path, line_no) != 0;
        records.push_back(std::move(r));
    }
    return records;
}

namespace {

constexpr const char* kFeatureHeader =
    "matrix_id,M,N,NNZ,avg_nnz,density,max_nnz,min_nnz,nnz_spread,ndiags,"
    "ntrue_diags";

void write_feature_fields(std::ostream& out, const FeatureVector& f) {
    const std::array<double, kNumFeatures> row = features_to_row(f);
    out << static_cast<index_t>(row[0]) << ',' << static_cast<index_t>(row[1])
        << ',' << static_cast<index_t>(row[2]) << ',' << format_double(row[3])
        << ',' << format_double(row[4]) << ',' << static_cast<index_t>(row[5])
        << ',' << static_cast<index_t>(row[6]) << ',' << format_double(row[7])
        << ',' << static_cast<index_t>(row[8]) << ','
        << static_cast<index_t>(row[9]);
}

FeatureVector parse_feature_fields(const std::vector<std::string>& f,
                                   std::size_t first,
                                   const std::filesystem::path& path,
                                   int line_no) {
    std::array<double, kNumFeatures> row{};
    for (int i = 0; i < kNumFeatures; ++i) {
        row[static_cast<std::size_t>(i)] =
            parse_real(f[first + static_cast<std::size_t>(i)], path, line_no);
    }
    return row_to_features(row);
}

}  // namespace

void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<FeatureCsvRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << kFeatureHeader << "\n";
    for (const FeatureCsvRow& r : rows) {
        out << r.matrix_id << ',';
        write_feature_fields(out, r.features);
        out << "\n";
    }
}

std::vector<FeatureCsvRow> read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    int line_no = 0;
    std::vector<FeatureCsvRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("matrix_id,", 0) == 0) continue;
        std::vector<std::string> f = split_csv(line);
        if (f.size() != 1 + kNumFeatures) {
            parse_fail(path, line_no, "feature row needs 11 fields");
        }
        rows.push_back({f[0], parse_feature_fields(f, 1, path, line_no)});
    }
    return rows;
}

void write_training_csv(const std::filesystem::path& path, const Dataset& d) {
    d.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << kFeatureHeader << ",label\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        out << (d.matrix_ids.empty() ? "m" + std::to_string(i)
                                     : d.matrix_ids[i])
            << ',';
        write_feature_fields(out, d.rows[i]);
        out << ',' << static_cast<int>(d.labels[i]) << "\n";
    }
}

Dataset read_training_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    int line_no = 0;
    Dataset d;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("matrix_id,", 0) == 0) continue;
        std::vector<std::string> f = split_csv(line);
        if (f.size() != 2 + kNumFeatures) {
            parse_fail(path, line_no, "training row needs 12 fields");
        }
        d.matrix_ids.push_back(f[0]);
        d.rows.push_back(parse_feature_fields(f, 1, path, line_no));
        d.labels.push_back(format_from_id(
            static_cast<int>(parse_index(f.back(), path, line_no))));
    }
    if (d.rows.empty()) throw EmptyDataset("no rows in " + path.string());
    return d;
}

TrainingCsvResult build_training_csv(
    const std::vector<FeatureCsvRow>& features,
    const std::vector<ProfileRecord>& profiles,
    const std::filesystem::path& out_path,
    const std::optional<std::vector<std::string>>& corpus_ids) {
    if (corpus_ids) {
        std::vector<std::string> orphans;
        for (const ProfileRecord& r : profiles) {
            if (std::find(corpus_ids->begin(), corpus_ids->end(), r.matrix_id) ==
                corpus_ids->end()) {
                orphans.push_back(r.matrix_id);
            }
        }
        if (!orphans.empty()) {
            std::string msg = "profile records without corpus entries:";
            for (const std::string& id : orphans) msg += " " + id;
            throw JoinError(msg);
        }
    }

    std::map<std::string, const FeatureVector*> feature_of;
    for (const FeatureCsvRow& r : features) {
        feature_of.emplace(r.matrix_id, &r.features);
    }

    // Group profiles by matrix, preserving first-seen order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<const ProfileRecord*>> grouped;
    for (const ProfileRecord& r : profiles) {
        auto [it, inserted] = grouped.try_emplace(r.matrix_id);
        if (inserted) order.push_back(r.matrix_id);
        it->second.push_back(&r);
    }

    TrainingCsvResult result;
    Dataset d;
    for (const std::string& id : order) {
        auto feat = feature_of.find(id);
        if (feat == feature_of.end()) {
            result.skipped.push_back(id);
            continue;
        }
        const ProfileRecord* best = nullptr;
        for (const ProfileRecord* r : grouped[id]) {
            if (!r->feasible) continue;
            if (best == nullptr || r->total_seconds < best->total_seconds ||
                (r->total_seconds == best->total_seconds &&
                 r->format < best->format)) {
                best = r;
            }
        }
        if (best == nullptr) {
            result.skipped.push_back(id);
            continue;
        }
        d.matrix_ids.push_back(id);
        d.rows.push_back(*feat->second);
        d.labels.push_back(best->format);
    }
    result.rows_written = d.size();
    if (d.size() > 0) {
        write_training_csv(out_path, d);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        out << kFeatureHeader << ",label\n";
    }
    return result;
}

}  // namespace sparseoracle
