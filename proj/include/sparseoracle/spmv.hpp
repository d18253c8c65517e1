#pragma once

#include <vector>

#include "sparseoracle/formats.hpp"

namespace sparseoracle {

using DenseVector = std::vector<double>;

struct TimingSample {
    FormatId format = FormatId::coo;
    index_t repetitions = 0;
    double total_seconds = 0.0;
    std::vector<double> per_rep_seconds;
};

// y = A * x. Result is independent of the active format up to floating-point
// reassociation; padding contributes exactly nothing.
DenseVector spmv(const DynamicMatrix& m, const DenseVector& x);

// Row-wise partitioning for CSR/DIA/ELL/HDC and the ELL part of HYB; COO
// payloads accumulate into per-thread buffers reduced at the end, so no
// output element is written concurrently. nthreads == 1 falls back to the
// serial kernels bit-for-bit.
DenseVector spmv_parallel(const DynamicMatrix& m, const DenseVector& x,
                          int nthreads);

// One untimed warm-up multiply, then `repetitions` timed multiplies against a
// monotonic clock. total_seconds is the sum of the per-rep durations.
TimingSample time_spmv(const DynamicMatrix& m, const DenseVector& x,
                       index_t repetitions, int nthreads = 1);

}  // namespace sparseoracle
