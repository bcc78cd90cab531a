#include <atomic>
#include <cstdlib>
#include <cstring>

#include "pcr/kernels/kernels.hpp"

namespace pcr::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{detect_isa()};
    return isa;
}

}  // namespace

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
            return avx2::compiled() && cpu_has_avx2();
    }
    return false;
}

Isa detect_isa() {
    const char* force = std::getenv("PCR_FORCE_SCALAR");
    if (force && std::strcmp(force, "0") != 0) {
        return Isa::Scalar;
    }
    return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

Isa active_isa() { return active().load(); }

void set_active_isa(Isa isa) { active().store(isa_available(isa) ? isa : Isa::Scalar); }

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void solve_cross_batch(const CrossBatch& batch) {
    if (active_isa() == Isa::Avx2) {
        avx2::solve_cross_batch(batch);
    } else {
        scalar::solve_cross_batch(batch);
    }
}

void matvec(const double* w, const double* x, const double* bias, double* y, std::size_t rows, std::size_t cols) {
    active_isa() == Isa::Avx2 ? avx2::matvec(w, x, bias, y, rows, cols) : scalar::matvec(w, x, bias, y, rows, cols);
}

void matvec_transpose_add(const double* w, const double* dy, double* dx, std::size_t rows, std::size_t cols) {
    active_isa() == Isa::Avx2 ? avx2::matvec_transpose_add(w, dy, dx, rows, cols)
                              : scalar::matvec_transpose_add(w, dy, dx, rows, cols);
}

void outer_add(const double* dy, const double* x, double* dw, std::size_t rows, std::size_t cols) {
    active_isa() == Isa::Avx2 ? avx2::outer_add(dy, x, dw, rows, cols) : scalar::outer_add(dy, x, dw, rows, cols);
}

double dot(const double* a, const double* b, std::size_t n) {
    return active_isa() == Isa::Avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active_isa() == Isa::Avx2 ? avx2::axpy(alpha, x, y, n) : scalar::axpy(alpha, x, y, n);
}

}  // namespace pcr::kernels
