#include "sparseoracle/spmv.hpp"

#include <algorithm>
#include <chrono>
#include <string>
#include <thread>

namespace sparseoracle {

namespace {

void check_dims(const DynamicMatrix& m, const DenseVector& x) {
    if (static_cast<index_t>(x.size()) != m.ncols()) {
        throw DimensionMismatch("spmv: vector length " +
                                std::to_string(x.size()) +
                                " does not match ncols " +
                                std::to_string(m.ncols()));
    }
}

void coo_kernel(const CooMatrix& m, const double* x, double* y, index_t lo,
                index_t hi) {
    for (index_t k = lo; k < hi; ++k) {
        y[m.row_idx[static_cast<std::size_t>(k)]] +=
            m.values[static_cast<std::size_t>(k)] *
            x[m.col_idx[static_cast<std::size_t>(k)]];
    }
}

void csr_kernel(const CsrMatrix& m, const double* x, double* y, index_t row_lo,
                index_t row_hi) {
    for (index_t i = row_lo; i < row_hi; ++i) {
        double sum = 0.0;
        for (index_t k = m.row_ptr[static_cast<std::size_t>(i)];
             k < m.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            sum += m.values[static_cast<std::size_t>(k)] *
                   x[m.col_idx[static_cast<std::size_t>(k)]];
        }
        y[i] += sum;
    }
}

// Diagonals outer, rows inner. Row bounds are clipped per diagonal; in-range
// hole cells hold exact zeros so no per-element branch is needed.
void dia_kernel(const DiaMatrix& m, const double* x, double* y, index_t row_lo,
                index_t row_hi) {
    for (index_t d = 0; d < m.ndiags(); ++d) {
        index_t off = m.offsets[static_cast<std::size_t>(d)];
        index_t lo = std::max(row_lo, -off);
        index_t hi = std::min(row_hi, m.ncols - off);
        const double* diag = m.values.data() + d * m.nrows;
        for (index_t i = lo; i < hi; ++i) {
            y[i] += diag[i] * x[i + off];
        }
    }
}

// Keys off the column sentinel, never off stored padding values.
void ell_kernel(const EllMatrix& m, const double* x, double* y, index_t row_lo,
                index_t row_hi) {
    index_t width = m.entries_per_row;
    for (index_t i = row_lo; i < row_hi; ++i) {
        double sum = 0.0;
        for (index_t k = 0; k < width; ++k) {
            index_t c = m.col_idx[static_cast<std::size_t>(i * width + k)];
            if (c == EllMatrix::kPaddingCol) break;
            sum += m.values[static_cast<std::size_t>(i * width + k)] * x[c];
        }
        y[i] += sum;
    }
}

void serial_multiply(const DynamicMatrix& m, const double* x, double* y) {
    switch (m.format()) {
        case FormatId::coo: {
            const CooMatrix& c = m.as<CooMatrix>();
            coo_kernel(c, x, y, 0, c.nnz());
            break;
        }
        case FormatId::csr: {
            const CsrMatrix& c = m.as<CsrMatrix>();
            csr_kernel(c, x, y, 0, c.nrows);
            break;
        }
        case FormatId::dia: {
            const DiaMatrix& d = m.as<DiaMatrix>();
            dia_kernel(d, x, y, 0, d.nrows);
            break;
        }
        case FormatId::ell: {
            const EllMatrix& e = m.as<EllMatrix>();
            ell_kernel(e, x, y, 0, e.nrows);
            break;
        }
        case FormatId::hyb: {
            const HybMatrix& h = m.as<HybMatrix>();
            ell_kernel(h.ell_part, x, y, 0, h.nrows());
            coo_kernel(h.coo_part, x, y, 0, h.coo_part.nnz());
            break;
        }
        case FormatId::hdc: {
            const HdcMatrix& h = m.as<HdcMatrix>();
            dia_kernel(h.dia_part, x, y, 0, h.nrows());
            csr_kernel(h.csr_part, x, y, 0, h.nrows());
            break;
        }
    }
}

// Runs fn(block, lo, hi) on `blocks` contiguous chunks of [0, n), one thread
// per chunk.
template <typename Fn>
void run_blocks(index_t n, int blocks, Fn&& fn) {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(blocks));
    index_t chunk = (n + blocks - 1) / blocks;
    for (int b = 0; b < blocks; ++b) {
        index_t lo = std::min<index_t>(n, static_cast<index_t>(b) * chunk);
        index_t hi = std::min<index_t>(n, lo + chunk);
        threads.emplace_back([&fn, b, lo, hi] { fn(b, lo, hi); });
    }
    for (std::thread& t : threads) t.join();
}

void coo_parallel(const CooMatrix& m, const double* x, double* y, index_t nrows,
                  int nthreads) {
    int blocks = static_cast<int>(
        std::min<index_t>(nthreads, std::max<index_t>(m.nnz(), 1)));
    std::vector<std::vector<double>> partial(
        static_cast<std::size_t>(blocks),
        std::vector<double>(static_cast<std::size_t>(nrows), 0.0));
    run_blocks(m.nnz(), blocks, [&](int b, index_t lo, index_t hi) {
        coo_kernel(m, x, partial[static_cast<std::size_t>(b)].data(), lo, hi);
    });
    for (const std::vector<double>& buf : partial) {
        for (index_t i = 0; i < nrows; ++i) {
            y[i] += buf[static_cast<std::size_t>(i)];
        }
    }
}

void parallel_multiply(const DynamicMatrix& m, const double* x, double* y,
                       int nthreads) {
    index_t nrows = m.nrows();
    int blocks = static_cast<int>(
        std::min<index_t>(nthreads, std::max<index_t>(nrows, 1)));
    switch (m.format()) {
        case FormatId::coo:
            coo_parallel(m.as<CooMatrix>(), x, y, nrows, nthreads);
            break;
        case FormatId::csr: {
            const CsrMatrix& c = m.as<CsrMatrix>();
            run_blocks(nrows, blocks, [&](int, index_t lo, index_t hi) {
                csr_kernel(c, x, y, lo, hi);
            });
            break;
        }
        case FormatId::dia: {
            const DiaMatrix& d = m.as<DiaMatrix>();
            run_blocks(nrows, blocks, [&](int, index_t lo, index_t hi) {
                dia_kernel(d, x, y, lo, hi);
            });
            break;
        }
        case FormatId::ell: {
            const EllMatrix& e = m.as<EllMatrix>();
            run_blocks(nrows, blocks, [&](int, index_t lo, index_t hi) {
                ell_kernel(e, x, y, lo, hi);
            });
            break;
        }
        case FormatId::hyb: {
            const HybMatrix& h = m.as<HybMatrix>();
            run_blocks(nrows, blocks, [&](int, index_t lo, index_t hi) {
                ell_kernel(h.ell_part, x, y, lo, hi);
            });
            coo_parallel(h.coo_part, x, y, nrows, nthreads);
            break;
        }
        case FormatId::hdc: {
            const HdcMatrix& h = m.as<HdcMatrix>();
            run_blocks(nrows, blocks, [&](int, index_t lo, index_t hi) {
                dia_kernel(h.dia_part, x, y, lo, hi);
                csr_kernel(h.csr_part, x, y, lo, hi);
            });
            break;
        }
    }
}

void multiply_into(const DynamicMatrix& m, const DenseVector& x, double* y,
                   int nthreads) {
    std::fill(y, y + m.nrows(), 0.0);
    if (nthreads <= 1) {
        serial_multiply(m, x.data(), y);
    } else {
        parallel_multiply(m, x.data(), y, nthreads);
    }
}

}  // namespace

DenseVector spmv(const DynamicMatrix& m, const DenseVector& x) {
    check_dims(m, x);
    DenseVector y(static_cast<std::size_t>(m.nrows()));
    multiply_into(m, x, y.data(), 1);
    return y;
}

DenseVector spmv_parallel(const DynamicMatrix& m, const DenseVector& x,
                          int nthreads) {
    check_dims(m, x);
    if (nthreads < 1) {
        throw InvalidInput("spmv_parallel: nthreads must be >= 1");
    }
    DenseVector y(static_cast<std::size_t>(m.nrows()));
    multiply_into(m, x, y.data(), nthreads);
    return y;
}

TimingSample time_spmv(const DynamicMatrix& m, const DenseVector& x,
                       index_t repetitions, int nthreads) {
    if (repetitions < 1) {
        throw InvalidInput("time_spmv: repetitions must be >= 1");
    }
    check_dims(m, x);

    using clock = std::chrono::steady_clock;
    DenseVector y(static_cast<std::size_t>(m.nrows()));

    multiply_into(m, x, y.data(), nthreads);  // warm-up, untimed

    TimingSample sample;
    sample.format = m.format();
    sample.repetitions = repetitions;
    sample.per_rep_seconds.reserve(static_cast<std::size_t>(repetitions));
    for (index_t r = 0; r < repetitions; ++r) {
        auto t0 = clock::now();
        multiply_into(m, x, y.data(), nthreads);
        auto t1 = clock::now();
        double dt = std::chrono::duration<double>(t1 - t0).count();
        sample.per_rep_seconds.push_back(dt);
        sample.total_seconds += dt;
    }
    return sample;
}

}  // namespace sparseoracle
