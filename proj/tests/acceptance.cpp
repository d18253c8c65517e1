// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "sparseoracle/pipeline.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace sparseoracle;
using namespace sparseoracle::testing;

namespace {

int g_failures = 0;

struct Gate {
    int number;
    std::string name;
    double time_limit_seconds;  // 0 = unlimited
    std::chrono::steady_clock::time_point started;
    bool ok = true;
    std::string detail;

    Gate(int number, std::string name, double limit = 0.0)
        : number(number),
          name(std::move(name)),
          time_limit_seconds(limit),
          started(std::chrono::steady_clock::now()) {}

    void expect(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }

    void finish() {
        double elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - started)
                             .count();
        if (time_limit_seconds > 0 && elapsed > time_limit_seconds) {
            expect(false, "exceeded " + std::to_string(time_limit_seconds) +
                              "s time limit");
        }
        std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n",
                    ok ? "PASS" : "FAIL", number, name.c_str(), elapsed,
                    detail.empty() ? "" : " -- ", detail.c_str());
        if (!ok) ++g_failures;
    }
};

std::vector<CooMatrix> seeded_matrices(std::uint64_t seed, int count) {
    Rng rng(seed);
    std::vector<CooMatrix> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(random_coo(rng));
    return out;
}

std::filesystem::path fresh_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_1_spmv_oracle() {
    Gate c(1, "cross-format SpMV matches the dense oracle", 30.0);
    Rng vec_rng(1001);
    for (const CooMatrix& coo : seeded_matrices(1000, 200)) {
        DenseMatrix dense = dense_from_coo(coo);
        DenseVector x = random_vector(vec_rng, coo.ncols);
        DenseVector want = dense_matvec(dense, x);
        for (FormatId target : all_formats()) {
            DynamicMatrix m;
            try {
                m = from_coo(coo, target);
            } catch (const PaddingOverflow&) {
                continue;
            }
            c.expect(max_rel_error(spmv(m, x), want) <= 1e-12,
                     std::string("serial ") + std::string(format_name(target)));
            c.expect(max_rel_error(spmv_parallel(m, x, 4), want) <= 1e-12,
                     std::string("4-thread ") + std::string(format_name(target)));
        }
    }
    c.finish();
}

void criterion_2_round_trips() {
    Gate c(2, "conversion round-trips and partition invariants", 10.0);
    for (const CooMatrix& coo : seeded_matrices(1000, 200)) {
        for (FormatId target : all_formats()) {
            DynamicMatrix m;
            try {
                m = from_coo(coo, target);
            } catch (const PaddingOverflow&) {
                continue;
            }
            c.expect(to_coo(m) == coo,
                     "round trip " + std::string(format_name(target)));

            if (target == FormatId::hyb) {
                const HybMatrix& hyb = m.as<HybMatrix>();
                std::map<index_t, index_t> total, in_ell, in_coo;
                for (index_t k = 0; k < coo.nnz(); ++k) {
                    total[coo.row_idx[static_cast<std::size_t>(k)]]++;
                }
                const EllMatrix& ell = hyb.ell_part;
                for (index_t i = 0; i < ell.nrows; ++i) {
                    for (index_t k = 0; k < ell.entries_per_row; ++k) {
                        if (ell.col_idx[static_cast<std::size_t>(
                                i * ell.entries_per_row + k)] !=
                            EllMatrix::kPaddingCol) {
                            in_ell[i]++;
                        }
                    }
                }
                for (index_t k = 0; k < hyb.coo_part.nnz(); ++k) {
                    in_coo[hyb.coo_part.row_idx[static_cast<std::size_t>(k)]]++;
                }
                for (index_t i = 0; i < coo.nrows; ++i) {
                    c.expect(in_ell[i] == std::min(total[i], hyb.kh),
                             "HYB ell rows");
                    c.expect(in_coo[i] == std::max<index_t>(0, total[i] - hyb.kh),
                             "HYB coo surplus");
                }
            }
            if (target == FormatId::hdc) {
                const HdcMatrix& hdc = m.as<HdcMatrix>();
                std::map<index_t, index_t> diag_count;
                for (index_t k = 0; k < coo.nnz(); ++k) {
                    diag_count[coo.col_idx[static_cast<std::size_t>(k)] -
                               coo.row_idx[static_cast<std::size_t>(k)]]++;
                }
                std::set<index_t> dia_offsets(hdc.dia_part.offsets.begin(),
                                              hdc.dia_part.offsets.end());
                for (index_t off : dia_offsets) {
                    c.expect(diag_count[off] >= hdc.true_diag_threshold,
                             "HDC dia part holds a thin diagonal");
                }
                const CsrMatrix& rest = hdc.csr_part;
                for (index_t i = 0; i < rest.nrows; ++i) {
                    for (index_t k = rest.row_ptr[static_cast<std::size_t>(i)];
                         k < rest.row_ptr[static_cast<std::size_t>(i) + 1];
                         ++k) {
                        index_t off =
                            rest.col_idx[static_cast<std::size_t>(k)] - i;
                        c.expect(diag_count[off] < hdc.true_diag_threshold,
                                 "HDC csr part holds a true diagonal");
                        c.expect(dia_offsets.count(off) == 0,
                                 "HDC parts overlap");
                    }
                }
            }
        }
    }
    c.finish();
}

void criterion_3_feature_oracle() {
    Gate c(3, "feature extraction matches the dense-scan oracle");
    for (const CooMatrix& coo : seeded_matrices(1000, 200)) {
        FeatureVector want = dense_features(dense_from_coo(coo), 0.2);
        for (FormatId target : all_formats()) {
            DynamicMatrix m;
            try {
                m = from_coo(coo, target);
            } catch (const PaddingOverflow&) {
                continue;
            }
            FeatureVector got = extract_features(m, 0.2);
            c.expect(got.nrows == want.nrows && got.ncols == want.ncols &&
                         got.nnz == want.nnz &&
                         got.max_nnz_per_row == want.max_nnz_per_row &&
                         got.min_nnz_per_row == want.min_nnz_per_row &&
                         got.ndiags == want.ndiags &&
                         got.ntrue_diags == want.ntrue_diags,
                     "count fields " + std::string(format_name(target)));
            c.expect(close_rel(got.avg_nnz_per_row, want.avg_nnz_per_row,
                               1e-12) &&
                         close_rel(got.density, want.density, 1e-12) &&
                         close_rel(got.nnz_row_spread, want.nnz_row_spread,
                                   1e-12),
                     "real fields " + std::string(format_name(target)));
        }
    }

    DynamicMatrix a(worked_example_matrix());
    std::array<double, kNumFeatures> row =
        features_to_row(extract_features(a, 0.5));
    std::array<double, kNumFeatures> want = {
        3, 3, 5, 5.0 / 3.0, 5.0 / 9.0, 2, 1, 2.0 / 9.0, 3, 1};
    for (std::size_t i = 0; i < want.size(); ++i) {
        c.expect(close_rel(row[i], want[i], 1e-12),
                 "worked example element " + std::to_string(i));
    }
    c.finish();
}

// independent exhaustive split search, same tie rules as the trainer
double brute_impurity(const std::array<index_t, 6>& counts, Criterion crit) {
    index_t n = 0;
    for (index_t v : counts) n += v;
    double sum = 0.0;
    for (index_t v : counts) {
        if (v == 0) continue;
        double p = static_cast<double>(v) / static_cast<double>(n);
        sum += crit == Criterion::gini ? p * p : p * std::log2(p);
    }
    return crit == Criterion::gini ? 1.0 - sum : -sum;
}

struct BruteSplit {
    bool found = false;
    double score = 0.0;
    int feature = 0;
    double threshold = 0.0;
};

BruteSplit brute_best_split(const Dataset& d, Criterion crit) {
    BruteSplit best;
    for (int f = 0; f < kNumFeatures; ++f) {
        std::set<double> distinct;
        for (const FeatureVector& r : d.rows) {
            distinct.insert(features_to_row(r)[static_cast<std::size_t>(f)]);
        }
        std::vector<double> values(distinct.begin(), distinct.end());
        for (std::size_t v = 0; v + 1 < values.size(); ++v) {
            double thr = (values[v] + values[v + 1]) / 2.0;
            if (!(thr < values[v + 1])) thr = values[v];
            std::array<index_t, 6> left{};
            std::array<index_t, 6> right{};
            index_t nl = 0;
            for (std::size_t i = 0; i < d.size(); ++i) {
                double value =
                    features_to_row(d.rows[i])[static_cast<std::size_t>(f)];
                (value <= thr
                     ? left
                     : right)[static_cast<std::size_t>(d.labels[i])]++;
                if (value <= thr) ++nl;
            }
            index_t nr = static_cast<index_t>(d.size()) - nl;
            double score =
                (static_cast<double>(nl) * brute_impurity(left, crit) +
                 static_cast<double>(nr) * brute_impurity(right, crit)) /
                static_cast<double>(d.size());
            if (!best.found || score < best.score) {
                best = {true, score, f, thr};
            }
        }
    }
    return best;
}

void criterion_4_cart_splits() {
    Gate c(4, "CART root splits equal the brute-force minimizer");
    std::array<index_t, 6> half = {2, 2, 0, 0, 0, 0};
    c.expect(gini_impurity(half) == 0.5, "gini([2,2]) = 0.5");
    c.expect(entropy_impurity(half) == 1.0, "entropy([2,2]) = 1 bit");

    Rng rng(4000);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + rng.uniform_index(7);
        Dataset d;
        for (std::size_t i = 0; i < n; ++i) {
            std::array<double, kNumFeatures> row{};
            row[2] = static_cast<double>(rng.uniform_index(5));
            row[8] = static_cast<double>(rng.uniform_index(5));
            d.rows.push_back(row_to_features(row));
            d.labels.push_back(static_cast<FormatId>(rng.uniform_index(3)));
        }
        bool pure = true;
        for (FormatId label : d.labels) pure &= label == d.labels.front();

        for (Criterion crit : {Criterion::gini, Criterion::entropy}) {
            HyperParams h;
            h.criterion = crit;
            DecisionTreeModel tree = train_tree(d, h);
            BruteSplit want = brute_best_split(d, crit);
            if (pure || !want.found) {
                c.expect(tree.root().is_leaf(), "expected leaf root");
            } else {
                c.expect(!tree.root().is_leaf(), "expected split root");
                if (!tree.root().is_leaf()) {
                    c.expect(tree.root().feature_index == want.feature &&
                                 tree.root().threshold == want.threshold,
                             "trial " + std::to_string(trial));
                }
            }
        }
    }
    c.finish();
}

void criterion_5_trainer_end_to_end() {
    Gate c(5, "grid-searched forest separates the synthetic corpus", 60.0);
    Dataset all = synthetic_corpus(5001, 600);

    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(5002);
    rng.shuffle(order);
    Dataset train = all.subset({order.begin(), order.begin() + 480});
    Dataset heldout = all.subset({order.begin() + 480, order.end()});

    HyperGrid grid;  // 16 points
    grid.n_estimators = {10, 25};
    grid.max_depth = {3, 12};
    grid.criterion = {Criterion::gini, Criterion::entropy};
    grid.bootstrap = {false, true};
    grid.seed = 5003;
    c.expect(grid.points().size() == 16, "lattice size");

    GridSearchResult search = grid_search(train, grid, 5);
    EvalReport report = evaluate(search.model, heldout);
    std::ostringstream detail;
    detail << std::fixed << std::setprecision(4) << "held-out accuracy "
           << report.accuracy << ", balanced " << report.balanced_accuracy;
    c.expect(report.accuracy >= 0.95, detail.str());
    c.expect(report.balanced_accuracy >= 0.95, detail.str());
    if (c.ok) c.detail = detail.str();
    c.finish();
}

void criterion_6_metric_formulas() {
    Gate c(6, "accuracy and balanced accuracy formulas");
    // truth [0,0,1,1], predictions [0,1,1,1] via a threshold predictor
    Dataset d;
    for (double v : {0.0, 1.0, 2.0, 3.0}) {
        std::array<double, kNumFeatures> row{};
        row[2] = v;
        d.rows.push_back(row_to_features(row));
    }
    d.labels = {FormatId::coo, FormatId::coo, FormatId::csr, FormatId::csr};

    DecisionTreeModel predictor;
    TreeNode root;
    root.feature_index = 2;
    root.threshold = 0.5;
    root.left = 1;
    root.right = 2;
    root.class_counts = {2, 2, 0, 0, 0, 0};
    TreeNode left;
    left.predicted_class = 0;
    left.class_counts = {1, 0, 0, 0, 0, 0};
    TreeNode right;
    right.predicted_class = 1;
    right.class_counts = {1, 2, 0, 0, 0, 0};
    predictor.nodes = {root, left, right};
    predictor.depth = 1;

    EvalReport report = evaluate(predictor, d);
    c.expect(report.accuracy == 0.75, "accuracy 0.75");
    c.expect(report.balanced_accuracy == 0.75, "balanced accuracy 0.75");

    DecisionTreeModel constant_csr;
    TreeNode leaf;
    leaf.predicted_class = 1;
    leaf.class_counts = {0, 1, 0, 0, 0, 0};
    constant_csr.nodes = {leaf};
    Dataset imbalanced;
    for (int i = 0; i < 100; ++i) {
        std::array<double, kNumFeatures> row{};
        row[2] = i;
        imbalanced.rows.push_back(row_to_features(row));
        imbalanced.labels.push_back(i < 90 ? FormatId::csr : FormatId::coo);
    }
    EvalReport skewed = evaluate(constant_csr, imbalanced);
    c.expect(std::abs(skewed.accuracy - 0.9) <= 1e-15, "accuracy 0.9");
    c.expect(std::abs(skewed.balanced_accuracy - 0.5) <= 1e-15,
             "balanced accuracy 0.5");
    c.finish();
}

void criterion_7_determinism_serialization() {
    Gate c(7, "deterministic training and lossless model files");
    Dataset d = synthetic_corpus(7001, 200);
    HyperParams h;
    h.n_estimators = 12;
    h.max_features = 6;
    h.max_depth = 10;
    h.seed = 7002;

    std::filesystem::path dir = fresh_dir("so_accept_models");
    save_model(train_forest(d, h), dir / "first.txt");
    save_model(train_forest(d, h), dir / "second.txt");
    c.expect(slurp(dir / "first.txt") == slurp(dir / "second.txt"),
             "identical runs produce identical bytes");

    ForestModel original = train_forest(d, h);
    save_model(original, dir / "third.txt");
    ForestModel loaded = load_model(dir / "third.txt");
    Rng rng(7003);
    for (int trial = 0; trial < 1000; ++trial) {
        std::array<double, kNumFeatures> row;
        for (double& v : row) v = rng.uniform_real(0.0, 5000.0);
        FeatureVector x = row_to_features(row);
        if (predict_forest(loaded, x) != predict_forest(original, x)) {
            c.expect(false, "prediction drift after reload");
            break;
        }
    }

    // vote tally oracle on the loaded forest
    Rng tally_rng(7004);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, kNumFeatures> row;
        for (double& v : row) v = tally_rng.uniform_real(0.0, 5000.0);
        FeatureVector x = row_to_features(row);
        std::array<int, kNumFormats> votes{};
        for (const DecisionTreeModel& tree : loaded.trees) {
            votes[static_cast<std::size_t>(predict_tree(tree, x))]++;
        }
        int best = 0;
        for (int cls = 1; cls < kNumFormats; ++cls) {
            if (votes[static_cast<std::size_t>(cls)] >
                votes[static_cast<std::size_t>(best)]) {
                best = cls;
            }
        }
        if (predict_forest(loaded, x) != static_cast<FormatId>(best)) {
            c.expect(false, "vote tally mismatch");
            break;
        }
    }

    // explicit tie resolves to the lowest id
    DecisionTreeModel coo_leaf, csr_leaf;
    TreeNode n0;
    n0.predicted_class = 0;
    n0.class_counts = {1, 0, 0, 0, 0, 0};
    coo_leaf.nodes = {n0};
    TreeNode n1;
    n1.predicted_class = 1;
    n1.class_counts = {0, 1, 0, 0, 0, 0};
    csr_leaf.nodes = {n1};
    ForestModel tie;
    tie.trees = {csr_leaf, coo_leaf};
    std::array<double, kNumFeatures> zero_row{};
    c.expect(predict_forest(tie, row_to_features(zero_row)) == FormatId::coo,
             "tie breaks to lowest id");
    c.finish();
}

void criterion_8_tuner_contracts() {
    Gate c(8, "tuner outputs match the dense oracle");
    // stump: NNZ <= 4 -> CSR else COO
    DecisionTreeModel stump;
    TreeNode root;
    root.feature_index = 2;
    root.threshold = 4.0;
    root.left = 1;
    root.right = 2;
    root.class_counts = {5, 5, 0, 0, 0, 0};
    TreeNode l;
    l.predicted_class = 1;
    l.class_counts = {0, 5, 0, 0, 0, 0};
    TreeNode r;
    r.predicted_class = 0;
    r.class_counts = {5, 0, 0, 0, 0, 0};
    stump.nodes = {root, l, r};
    stump.depth = 1;
    ForestModel tree_model;
    tree_model.kind = ModelKind::tree;
    tree_model.trees = {stump};

    ForestModel forest_model;
    forest_model.kind = ModelKind::forest;
    forest_model.trees = {stump, stump, stump};

    DynamicMatrix a(worked_example_matrix());
    TunerConfig cfg;
    cfg.repetitions = 2;
    c.expect(tune_ml(a, cfg, tree_model).chosen == FormatId::coo,
             "stump routes the worked example to COO");

    Rng rng(8001);
    for (int trial = 0; trial < 50; ++trial) {
        CooMatrix coo = random_coo(rng, 48);
        DenseVector x = random_vector(rng, coo.ncols);
        DenseVector want = dense_matvec(dense_from_coo(coo), x);

        DynamicMatrix m1(coo);
        auto [y1, o1] = tune_multiply(m1, x, TunerKind::run_first, cfg);
        c.expect(max_rel_error(y1, want) <= 1e-12, "run-first output");
        bool found = false;
        FormatId best = FormatId::coo;
        double best_total = 0.0;
        for (const FormatTiming& t : o1.per_format_timings) {
            if (!t.feasible) continue;
            if (!found || t.sample.total_seconds < best_total) {
                found = true;
                best = t.format;
                best_total = t.sample.total_seconds;
            }
        }
        c.expect(found && o1.chosen == best, "run-first argmin consistency");

        DynamicMatrix m2(coo);
        auto [y2, o2] =
            tune_multiply(m2, x, TunerKind::decision_tree, cfg, &tree_model);
        c.expect(max_rel_error(y2, want) <= 1e-12, "decision-tree output");

        DynamicMatrix m3(coo);
        auto [y3, o3] =
            tune_multiply(m3, x, TunerKind::random_forest, cfg, &forest_model);
        c.expect(max_rel_error(y3, want) <= 1e-12, "random-forest output");
    }
    c.finish();
}

void criterion_9_bench_arithmetic() {
    Gate c(9, "benchmark arithmetic recomputes from raw timings");
    std::filesystem::path dir = fresh_dir("so_accept_bench");
    std::filesystem::path corpus = dir / "corpus";
    std::filesystem::create_directories(corpus);

    Rng rng(9001);
    for (int i = 0; i < 20; ++i) {
        CooMatrix m = i % 2 == 0 ? band_matrix(60 + 10 * i, 1 + i % 3)
                                 : random_coo(rng, 64, 0.02, 0.15);
        std::ostringstream name;
        name << "m" << std::setw(2) << std::setfill('0') << i << ".mtx";
        write_matrix_market(m, corpus / name.str());
    }

    FeaturesResult features = cmd_features(corpus, 0.2, dir / "features.csv");
    c.expect(features.rows == 20 && features.failures.empty(), "features");
    ProfileOptions profile_options;
    profile_options.corpus_dir = corpus;
    profile_options.reps = 20;
    profile_options.out_csv = dir / "profiles.csv";
    ProfileResult profile = cmd_profile(profile_options);
    c.expect(profile.failures.empty(), "profile");

    std::filesystem::path grid = dir / "grid.txt";
    {
        std::ofstream out(grid);
        out << "n_estimators = 10\nmax_depth = 8\n";
    }
    TrainOptions train_options;
    train_options.features_csv = dir / "features.csv";
    train_options.profiles_csv = dir / "profiles.csv";
    train_options.grid_file = grid;
    train_options.split_seed = 9002;
    train_options.model_out = dir / "model.txt";
    cmd_train(train_options);

    BenchOptions bench_options;
    bench_options.corpus_dir = corpus;
    bench_options.model_path = dir / "model.txt";
    bench_options.reps = 100;
    bench_options.out_csv = dir / "bench.csv";
    BenchReport report = cmd_bench(bench_options);
    c.expect(report.failures.empty() && report.rows.size() == 20,
             "bench completes the corpus");

    std::vector<BenchRow> rows = read_bench_csv(dir / "bench.csv");
    c.expect(rows.size() == 20, "bench CSV rows");
    for (const BenchRow& row : rows) {
        double speedup =
            row.t_csr_total / (row.t_fe + row.t_pred + row.t_opt_total);
        double cost = (row.t_fe + row.t_pred) /
                      (row.t_csr_total / static_cast<double>(row.reps));
        c.expect(std::abs(speedup - row.speedup) <= 1e-6 * std::abs(row.speedup),
                 "speedup recompute (6 significant figures)");
        c.expect(std::abs(cost - row.tuning_cost_csr_spmv) <=
                     1e-6 * std::abs(row.tuning_cost_csr_spmv),
                 "tuning cost recompute (6 significant figures)");
    }

    const auto& q = report.tuning_cost_quartiles;
    c.expect(q[0] <= q[1] && q[1] <= q[2] && q[2] <= q[3] && q[3] <= q[4],
             "quartile ordering");
    c.expect(std::isfinite(q[2]) && q[2] > 0.0,
             "median tuning cost is finite and positive");
    std::ostringstream detail;
    detail << std::setprecision(3) << "median cost " << q[2]
           << " equivalent CSR SpMVs";
    if (c.ok) c.detail = detail.str();
    c.finish();
}

void criterion_10_ingestion() {
    Gate c(10, "Matrix Market identity, symmetry, and stubbed fetching");
    std::filesystem::path dir = fresh_dir("so_accept_ingest");
    Rng rng(10001);
    for (int trial = 0; trial < 50; ++trial) {
        CooMatrix m = random_coo(rng, 48);
        std::filesystem::path path =
            dir / ("m" + std::to_string(trial) + ".mtx");
        write_matrix_market(m, path);
        if (!(read_matrix_market(path) == m)) {
            c.expect(false, "write/read identity trial " + std::to_string(trial));
            break;
        }
    }

    {
        std::ofstream out(dir / "sym.mtx");
        out << "%%MatrixMarket matrix coordinate real symmetric\n"
               "2 2 2\n1 1 5\n2 1 7\n";
    }
    CooMatrix sym = read_matrix_market(dir / "sym.mtx");
    CooMatrix want = CooMatrix::from_triplets(
        2, 2, {{0, 0, 5.0}, {1, 0, 7.0}, {0, 1, 7.0}});
    c.expect(sym == want, "symmetric expansion");

    const char* body =
        "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 7\n";
    {
        std::ofstream out(dir / "manifest.csv");
        out << "ok,G,http://host/ok.mtx,1,1,1,\n";
        out << "gone,G,http://host/gone.mtx,1,1,1,\n";
        out << "alt,G,http://host/alt.mtx,1,1,1,\n";
    }
    int calls = 0;
    FetchOptions options;
    options.workers = 1;
    options.transport = [&](const std::string& url) -> HttpResponse {
        ++calls;
        if (url.find("gone") != std::string::npos) return {404, ""};
        return {200, body};
    };
    FetchReport first = fetch_corpus(dir / "manifest.csv", dir / "dl", options);
    c.expect(first.entries.size() == 2 && first.failures.size() == 1,
             "partial failure is reported, not raised");
    c.expect(first.failures.size() == 1 &&
                 first.failures.front().matrix_id == "gone",
             "failed entry identified");
    int after_first = calls;
    FetchReport second = fetch_corpus(dir / "manifest.csv", dir / "dl", options);
    c.expect(second.downloads == 0, "second run downloads nothing");
    c.expect(calls == after_first + 1,
             "only the failed entry is retried on the second run");
    c.finish();
}

}  // namespace

int main() {
    criterion_1_spmv_oracle();
    criterion_2_round_trips();
    criterion_3_feature_oracle();
    criterion_4_cart_splits();
    criterion_5_trainer_end_to_end();
    criterion_6_metric_formulas();
    criterion_7_determinism_serialization();
    criterion_8_tuner_contracts();
    criterion_9_bench_arithmetic();
    criterion_10_ingestion();

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
    } else {
        std::printf("%d acceptance criteria FAILED\n", g_failures);
    }
    return g_failures;
}
