#include "pcr/kernels/kernels.hpp"

namespace pcr::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void matvec(const double* w, const double* x, const double* bias, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot(w + r * cols, x, cols) + (bias ? bias[r] : 0.0);
    }
}

void matvec_transpose_add(const double* w, const double* dy, double* dx, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        axpy(dy[r], w + r * cols, dx, cols);
    }
}

void outer_add(const double* dy, const double* x, double* dw, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        axpy(dy[r], x, dw + r * cols, cols);
    }
}

}  // namespace pcr::kernels::scalar
