#include "sparseoracle/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "sparseoracle/rng.hpp"
#include "sparseoracle/spmv.hpp"

namespace sparseoracle {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& base,
                                  const std::string& suffix) {
    std::filesystem::path out = base;
    out += suffix;
    return out;
}

DenseVector ones(index_t n) {
    return DenseVector(static_cast<std::size_t>(n), 1.0);
}

double quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    double h = p * static_cast<double>(sorted.size() - 1);
    std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= sorted.size()) return sorted.back();
    return sorted[i] + (h - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

std::string file_sha256(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

}  // namespace

void write_failure_manifest(const std::filesystem::path& path,
                            const std::vector<PipelineFailure>& failures) {
    std::ofstream out(path, std::ios::binary);
    out << "matrix_id,stage,error\n";
    for (const PipelineFailure& f : failures) {
        std::string error = f.error;
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        out << f.matrix_id << ',' << f.stage << ',' << error << "\n";
    }
}

std::vector<std::filesystem::path> list_corpus(
    const std::filesystem::path& corpus_dir) {
    if (!std::filesystem::is_directory(corpus_dir)) {
        throw InvalidInput("corpus dir does not exist: " + corpus_dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(corpus_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".mtx") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

ProfileResult cmd_profile(const ProfileOptions& options) {
    ProfileResult result;
    std::string backend = options.nthreads > 1
                              ? "parallel-" + std::to_string(options.nthreads)
                              : "serial";
    for (const std::filesystem::path& file : list_corpus(options.corpus_dir)) {
        std::string id = file.stem().string();
        try {
            CooMatrix coo = read_matrix_market(file);
            DenseVector x = ones(coo.ncols);
            bool have_best = false;
            FormatId best_format = FormatId::coo;
            double best_total = 0.0;
            for (FormatId target : all_formats()) {
                ProfileRecord record;
                record.matrix_id = id;
                record.format = target;
                record.repetitions = options.reps;
                record.backend_label = backend;
                try {
                    DynamicMatrix m = from_coo(coo, target, options.conversion);
                    TimingSample sample =
                        time_spmv(m, x, options.reps, options.nthreads);
                    record.total_seconds = sample.total_seconds;
                    record.feasible = true;
                } catch (const PaddingOverflow&) {
                    record.feasible = false;
                }
                if (record.feasible &&
                    (!have_best || record.total_seconds < best_total)) {
                    have_best = true;
                    best_format = target;
                    best_total = record.total_seconds;
                }
                result.records.push_back(std::move(record));
            }
            if (have_best) {
                result.winner_counts[static_cast<std::size_t>(best_format)]++;
            }
        } catch (const std::exception& err) {
            result.failures.push_back({id, "profile", err.what()});
        }
    }

    write_profile_csv(options.out_csv, result.records);
    {
        std::ofstream out(with_suffix(options.out_csv, ".distribution.csv"),
                          std::ios::binary);
        out << "format_id,format_name,count\n";
        for (FormatId f : all_formats()) {
            out << static_cast<int>(f) << ',' << format_name(f) << ','
                << result.winner_counts[static_cast<std::size_t>(f)] << "\n";
        }
    }
    if (!result.failures.empty()) {
        write_failure_manifest(with_suffix(options.out_csv, ".failures.csv"),
                               result.failures);
    }
    return result;
}

FeaturesResult cmd_features(const std::filesystem::path& corpus_dir,
                            double true_diag_ratio,
                            const std::filesystem::path& out_csv,
                            int workers) {
    std::vector<std::filesystem::path> files = list_corpus(corpus_dir);
    std::vector<std::optional<FeatureCsvRow>> slots(files.size());
    std::vector<std::optional<PipelineFailure>> errors(files.size());

    std::mutex mu;
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next == files.size()) return;
                i = next++;
            }
            std::string id = files[i].stem().string();
            try {
                DynamicMatrix m(read_matrix_market(files[i]));
                slots[i] = FeatureCsvRow{id, extract_features(m, true_diag_ratio)};
            } catch (const std::exception& err) {
                errors[i] = PipelineFailure{id, "features", err.what()};
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::max(1, workers); ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    FeaturesResult result;
    std::vector<FeatureCsvRow> rows;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (slots[i]) rows.push_back(std::move(*slots[i]));
        if (errors[i]) result.failures.push_back(std::move(*errors[i]));
    }
    write_feature_csv(out_csv, rows);
    if (!result.failures.empty()) {
        write_failure_manifest(with_suffix(out_csv, ".failures.csv"),
                               result.failures);
    }
    result.rows = rows.size();
    return result;
}

HyperGrid default_cli_grid() {
    HyperGrid grid;
    grid.n_estimators = {25, 50};
    grid.max_depth = {8, 16};
    grid.min_samples_leaf = {1};
    grid.min_samples_split = {2};
    grid.max_features = {kNumFeatures};
    grid.criterion = {Criterion::gini, Criterion::entropy};
    grid.bootstrap = {false, true};
    return grid;
}

TrainResult cmd_train(const TrainOptions& options) {
    std::filesystem::path training_csv = options.features_csv;
    if (options.profiles_csv) {
        training_csv = with_suffix(options.model_out, ".training.csv");
        TrainingCsvResult join = build_training_csv(
            read_feature_csv(options.features_csv),
            read_profile_csv(*options.profiles_csv), training_csv);
        for (const std::string& id : join.skipped) {
            std::cerr << "train: skipped " << id << " (incomplete data)\n";
        }
    }
    Dataset all = read_training_csv(training_csv);

    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) order[i] = i;
    Rng rng(options.split_seed);
    rng.shuffle(order);
    std::size_t n_train = all.size() * 8 / 10;
    if (n_train == 0 || n_train == all.size()) {
        throw TooFewSamples("cmd_train: dataset too small for an 80/20 split");
    }
    Dataset train = all.subset({order.begin(), order.begin() + n_train});
    Dataset heldout = all.subset({order.begin() + n_train, order.end()});

    HyperGrid grid = options.grid_file ? parse_grid_file(*options.grid_file)
                                       : default_cli_grid();
    grid.seed = options.split_seed;
    GridSearchResult search = grid_search(train, grid, options.folds);

    {
        std::ofstream out(with_suffix(options.model_out, ".gridscores.csv"),
                          std::ios::binary);
        out << "n_estimators,bootstrap,max_depth,min_samples_leaf,"
               "min_samples_split,max_features,criterion,cv_accuracy,"
               "cv_balanced_accuracy\n";
        for (const GridPointScore& score : search.scores) {
            const HyperParams& h = score.params;
            out << h.n_estimators << ',' << (h.bootstrap ? "T" : "F") << ','
                << h.max_depth << ',' << h.min_samples_leaf << ','
                << h.min_samples_split << ',' << h.max_features << ','
                << (h.criterion == Criterion::gini ? "gini" : "entropy") << ','
                << format_double(score.cv.mean_accuracy) << ','
                << format_double(score.cv.mean_balanced_accuracy) << "\n";
        }
    }

    ForestModel model = std::move(search.model);
    model.metadata.emplace_back("backend", options.backend_label);
    model.metadata.emplace_back("hyperparameters", describe(search.best));
    model.metadata.emplace_back("dataset_sha256", file_sha256(training_csv));
    model.metadata.emplace_back("split_seed",
                                std::to_string(options.split_seed));
    model.metadata.emplace_back("n_train", std::to_string(train.size()));
    save_model(model, options.model_out);

    TrainResult result;
    result.heldout = evaluate(model, heldout);
    result.best = search.best;
    result.best_cv = std::move(search.best_cv);
    result.n_train = train.size();
    result.n_test = heldout.size();
    return result;
}

BenchReport cmd_bench(const BenchOptions& options) {
    ForestModel model = load_model(options.model_path);
    ConversionConfig conversion = options.tuner.effective_conversion();

    BenchReport report;
    for (const std::filesystem::path& file : list_corpus(options.corpus_dir)) {
        std::string id = file.stem().string();
        try {
            CooMatrix coo = read_matrix_market(file);
            DenseVector x = ones(coo.ncols);

            std::array<double, kNumFormats> totals{};
            std::array<bool, kNumFormats> feasible{};
            for (FormatId target : all_formats()) {
                try {
                    DynamicMatrix candidate = from_coo(coo, target, conversion);
                    totals[static_cast<std::size_t>(target)] =
                        time_spmv(candidate, x, options.reps, options.nthreads)
                            .total_seconds;
                    feasible[static_cast<std::size_t>(target)] = true;
                } catch (const PaddingOverflow&) {
                }
            }

            DynamicMatrix m = from_coo(coo, FormatId::csr, conversion);
            TuneOutcome outcome = tune_ml(m, options.tuner, model);
            auto convert_start = std::chrono::steady_clock::now();
            switch_format(m, outcome.chosen, conversion);
            double t_convert = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() -
                                   convert_start)
                                   .count();
            double t_opt =
                time_spmv(m, x, options.reps, options.nthreads).total_seconds;

            BenchRow row;
            row.matrix_id = id;
            row.chosen = outcome.chosen;
            row.reps = options.reps;
            row.t_csr_total = totals[static_cast<std::size_t>(FormatId::csr)];
            row.t_fe = outcome.feature_time_seconds;
            row.t_pred = outcome.predict_time_seconds;
            row.t_convert = t_convert;
            row.t_opt_total = t_opt;
            row.speedup = row.t_csr_total /
                          (row.t_fe + row.t_pred + row.t_opt_total);
            row.tuning_cost_csr_spmv =
                (row.t_fe + row.t_pred) /
                (row.t_csr_total / static_cast<double>(options.reps));
            bool have_optimal = false;
            for (FormatId f : all_formats()) {
                const std::size_t fi = static_cast<std::size_t>(f);
                if (!feasible[fi]) continue;
                if (!have_optimal ||
                    totals[fi] < totals[static_cast<std::size_t>(row.optimal)]) {
                    row.optimal = f;
                    have_optimal = true;
                }
            }
            report.rows.push_back(std::move(row));
        } catch (const std::exception& err) {
            report.failures.push_back({id, "bench", err.what()});
        }
    }

    std::vector<double> costs;
    for (const BenchRow& row : report.rows) {
        report.mean_speedup += row.speedup;
        costs.push_back(row.tuning_cost_csr_spmv);
    }
    if (!report.rows.empty()) {
        report.mean_speedup /= static_cast<double>(report.rows.size());
    }
    std::sort(costs.begin(), costs.end());
    report.tuning_cost_quartiles = {quantile(costs, 0.0), quantile(costs, 0.25),
                                    quantile(costs, 0.5), quantile(costs, 0.75),
                                    quantile(costs, 1.0)};

    {
        std::ofstream out(options.out_csv, std::ios::binary);
        out << "matrix_id,chosen,optimal,reps,t_csr_total,t_fe,t_pred,"
               "t_convert,t_opt_total,speedup,tuning_cost_csr_spmv\n";
        for (const BenchRow& r : report.rows) {
            out << r.matrix_id << ',' << static_cast<int>(r.chosen) << ','
                << static_cast<int>(r.optimal) << ',' << r.reps << ','
                << format_double(r.t_csr_total) << ',' << format_double(r.t_fe)
                << ',' << format_double(r.t_pred) << ','
                << format_double(r.t_convert) << ','
                << format_double(r.t_opt_total) << ','
                << format_double(r.speedup) << ','
                << format_double(r.tuning_cost_csr_spmv) << "\n";
        }
    }
    {
        std::ofstream out(with_suffix(options.out_csv, ".summary.csv"),
                          std::ios::binary);
        out << "mean_speedup,cost_min,cost_q1,cost_q2,cost_q3,cost_max\n";
        out << format_double(report.mean_speedup);
        for (double q : report.tuning_cost_quartiles) {
            out << ',' << format_double(q);
        }
        out << "\n";
    }
    if (!report.failures.empty()) {
        write_failure_manifest(with_suffix(options.out_csv, ".failures.csv"),
                               report.failures);
    }
    return report;
}

std::vector<BenchRow> read_bench_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::vector<BenchRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line_no == 1 && line.rfind("matrix_id,", 0) == 0)) {
            continue;
        }
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 11) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": bench row needs 11 fields");
        }
        BenchRow row;
        row.matrix_id = f[0];
        row.chosen = format_from_id(std::stoi(f[1]));
        row.optimal = format_from_id(std::stoi(f[2]));
        row.reps = std::stoll(f[3]);
        row.t_csr_total = std::stod(f[4]);
        row.t_fe = std::stod(f[5]);
        row.t_pred = std::stod(f[6]);
        row.t_convert = std::stod(f[7]);
        row.t_opt_total = std::stod(f[8]);
        row.speedup = std::stod(f[9]);
        row.tuning_cost_csr_spmv = std::stod(f[10]);
        rows.push_back(std::move(row));
    }
    return rows;
}

PredictResult cmd_predict(const std::filesystem::path& matrix_path,
                          const std::filesystem::path& model_path,
                          double true_diag_ratio) {
    ForestModel model = load_model(model_path);
    DynamicMatrix m(read_matrix_market(matrix_path));
    TunerConfig cfg;
    cfg.true_diag_ratio = true_diag_ratio;
    TuneOutcome outcome = tune_ml(m, cfg, model);
    PredictResult result;
    result.format = outcome.chosen;
    result.name = std::string(format_name(outcome.chosen));
    result.feature_seconds = outcome.feature_time_seconds;
    result.predict_seconds = outcome.predict_time_seconds;
    return result;
}

}  // namespace sparseoracle
