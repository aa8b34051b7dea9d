#pragma once

#include <cstddef>
#include <vector>

namespace dqlids {

// Dense row-major matrix of doubles. Used both for record batches
// (rows = records) and layer weights (rows = inputs, cols = outputs).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    bool operator==(const Matrix& other) const = default;
};

// out = a * b. Loop order streams over rows of b and out, which keeps the
// inner loop vectorizable; accumulation order is fixed, so results are
// run-to-run identical.
inline void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
    out.rows = a.rows;
    out.cols = b.cols;
    out.data.assign(a.rows * b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j)
                orow[j] += aik * brow[j];
        }
    }
}

// out = a^T * b, accumulating over rows of a and b (the batch dimension).
inline void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
    out.rows = a.cols;
    out.cols = b.cols;
    out.data.assign(a.cols * b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        const double* brow = b.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            double* orow = out.row(k);
            for (std::size_t j = 0; j < b.cols; ++j)
                orow[j] += aik * brow[j];
        }
    }
}

// out = a * b^T.
inline void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
    out.rows = a.rows;
    out.cols = b.rows;
    out.data.assign(a.rows * b.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k)
                acc += arow[k] * brow[k];
            orow[j] = acc;
        }
    }
}

} // namespace dqlids
