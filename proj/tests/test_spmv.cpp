#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sparseoracle/spmv.hpp"
#include "support/oracles.hpp"

using namespace sparseoracle;
using namespace sparseoracle::testing;

TEST_CASE("worked example multiplies identically in all six formats") {
    CooMatrix coo = worked_example_matrix();
    DenseVector x = {1.0, 1.0, 1.0};
    for (FormatId target : all_formats()) {
        CAPTURE(format_name(target));
        DenseVector y = spmv(from_coo(coo, target), x);
        CHECK(y == DenseVector{3.0, 3.0, 9.0});
    }
}

TEST_CASE("identity matrix returns its input") {
    std::vector<Triplet> triplets;
    for (index_t i = 0; i < 4; ++i) triplets.push_back({i, i, 1.0});
    DynamicMatrix m =
        from_coo(CooMatrix::from_triplets(4, 4, triplets), FormatId::csr);
    CHECK(spmv(m, {1, 2, 3, 4}) == DenseVector{1, 2, 3, 4});
}

TEST_CASE("empty matrix yields zeros") {
    CooMatrix empty;
    empty.nrows = 3;
    empty.ncols = 3;
    for (FormatId target : all_formats()) {
        CHECK(spmv(from_coo(empty, target), {5, 6, 7}) == DenseVector{0, 0, 0});
    }
}

TEST_CASE("mismatched vector length is rejected") {
    DynamicMatrix m = from_coo(worked_example_matrix(), FormatId::csr);
    CHECK_THROWS_AS(spmv(m, {1.0, 1.0}), DimensionMismatch);
    CHECK_THROWS_AS(spmv_parallel(m, {1.0, 1.0}, 2), DimensionMismatch);
}

TEST_CASE("cross-format agreement with the dense oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        CooMatrix coo = random_coo(rng);
        DenseMatrix dense = dense_from_coo(coo);
        DenseVector x = random_vector(rng, coo.ncols);
        DenseVector want = dense_matvec(dense, x);
        for (FormatId target : all_formats()) {
            CAPTURE(trial);
            CAPTURE(format_name(target));
            DynamicMatrix m;
            try {
                m = from_coo(coo, target);
            } catch (const PaddingOverflow&) {
                continue;
            }
            REQUIRE(max_rel_error(spmv(m, x), want) <= 1e-12);
        }
    }
}

TEST_CASE("linearity") {
    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        CooMatrix coo = random_coo(rng, 32);
        DynamicMatrix m = from_coo(coo, FormatId::csr);
        DenseVector x = random_vector(rng, coo.ncols);
        DenseVector z = random_vector(rng, coo.ncols);
        double alpha = rng.uniform_real(-2.0, 2.0);
        double beta = rng.uniform_real(-2.0, 2.0);

        DenseVector combined(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            combined[i] = alpha * x[i] + beta * z[i];
        }
        DenseVector lhs = spmv(m, combined);
        DenseVector yx = spmv(m, x);
        DenseVector yz = spmv(m, z);
        DenseVector rhs(yx.size());
        for (std::size_t i = 0; i < yx.size(); ++i) {
            rhs[i] = alpha * yx[i] + beta * yz[i];
        }
        REQUIRE(max_rel_error(lhs, rhs) <= 1e-10);
    }
}

TEST_CASE("single-thread parallel path is bit-identical to serial") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        CooMatrix coo = random_coo(rng);
        DenseVector x = random_vector(rng, coo.ncols);
        for (FormatId target : all_formats()) {
            DynamicMatrix m;
            try {
                m = from_coo(coo, target);
            } catch (const PaddingOverflow&) {
                continue;
            }
            CHECK(spmv_parallel(m, x, 1) == spmv(m, x));
        }
    }
}

TEST_CASE("parallel agrees with serial for every format and thread count") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        CooMatrix coo = random_coo(rng);
        DenseVector x = random_vector(rng, coo.ncols);
        for (FormatId target : all_formats()) {
            DynamicMatrix m;
            try {
                m = from_coo(coo, target);
            } catch (const PaddingOverflow&) {
                continue;
            }
            DenseVector want = spmv(m, x);
            for (int nthreads : {2, 4, 8}) {
                CAPTURE(format_name(target));
                CAPTURE(nthreads);
                REQUIRE(max_rel_error(spmv_parallel(m, x, nthreads), want) <=
                        1e-12);
            }
        }
    }
}

TEST_CASE("more threads than rows is fine") {
    CooMatrix coo = worked_example_matrix();
    for (FormatId target : all_formats()) {
        DynamicMatrix m = from_coo(coo, target);
        DenseVector y =
            spmv_parallel(m, {1.0, 1.0, 1.0}, static_cast<int>(coo.nrows) + 7);
        CHECK(max_rel_error(y, {3.0, 3.0, 9.0}) <= 1e-12);
    }
}

TEST_CASE("ELL kernel ignores padding value slots") {
    DynamicMatrix m = from_coo(worked_example_matrix(), FormatId::ell);
    DenseVector before = spmv(m, {1.0, 1.0, 1.0});
    EllMatrix& ell = m.as<EllMatrix>();
    for (std::size_t k = 0; k < ell.values.size(); ++k) {
        if (ell.col_idx[k] == EllMatrix::kPaddingCol) {
            ell.values[k] = 1e9;  // poison the padding slot
        }
    }
    CHECK(spmv(m, {1.0, 1.0, 1.0}) == before);
    CHECK(spmv_parallel(m, {1.0, 1.0, 1.0}, 2) == before);
}

TEST_CASE("time_spmv with one repetition") {
    DynamicMatrix m = from_coo(worked_example_matrix(), FormatId::csr);
    TimingSample sample = time_spmv(m, {1.0, 1.0, 1.0}, 1);
    CHECK(sample.repetitions == 1);
    REQUIRE(sample.per_rep_seconds.size() == 1);
    CHECK(sample.per_rep_seconds[0] == sample.total_seconds);
    CHECK(sample.format == FormatId::csr);
}

TEST_CASE("time_spmv accumulates repetitions") {
    DynamicMatrix m = from_coo(worked_example_matrix(), FormatId::csr);
    TimingSample sample = time_spmv(m, {1.0, 1.0, 1.0}, 1000);
    CHECK(sample.repetitions == 1000);
    CHECK(sample.per_rep_seconds.size() == 1000);
    CHECK(sample.total_seconds > 0.0);
    double sum = 0.0;
    for (double dt : sample.per_rep_seconds) sum += dt;
    CHECK(sample.total_seconds == doctest::Approx(sum));

    // timing is nondeterministic, both calls just have to be valid
    TimingSample again = time_spmv(m, {1.0, 1.0, 1.0}, 1000);
    CHECK(again.total_seconds > 0.0);
}

TEST_CASE("time_spmv rejects zero repetitions") {
    DynamicMatrix m = from_coo(worked_example_matrix(), FormatId::csr);
    CHECK_THROWS_AS(time_spmv(m, {1.0, 1.0, 1.0}, 0), InvalidInput);
}
