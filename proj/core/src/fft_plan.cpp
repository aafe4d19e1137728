#include "mks/fft_plan.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

#include "mks/errors.hpp"

namespace mks {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

struct Fft2D::Impl {
    double* rbuf = nullptr;
    fftw_complex* half = nullptr; // r2c spectrum
    fftw_complex* cin = nullptr;  // full c2c buffers
    fftw_complex* cout = nullptr;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

Fft2D::Fft2D(int width, int height)
    : width_(width), height_(height), impl_(std::make_unique<Impl>()) {
    if (width < 2 || height < 2)
        throw ArgumentError("Fft2D: dimensions must be at least 2x2");
    const long n = real_size();
    const long ns = spectrum_size();

    std::lock_guard<std::mutex> lock(planner_mutex());
    impl_->rbuf = fftw_alloc_real(n);
    impl_->half = fftw_alloc_complex(ns);
    impl_->cin = fftw_alloc_complex(n);
    impl_->cout = fftw_alloc_complex(n);
    // Row-major (height, width): FFTW wants the slow dimension first.
    impl_->r2c = fftw_plan_dft_r2c_2d(height, width, impl_->rbuf, impl_->half,
                                      FFTW_ESTIMATE);
    impl_->c2r = fftw_plan_dft_c2r_2d(height, width, impl_->half, impl_->rbuf,
                                      FFTW_ESTIMATE);
    impl_->fwd = fftw_plan_dft_2d(height, width, impl_->cin, impl_->cout,
                                  FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_2d(height, width, impl_->cin, impl_->cout,
                                  FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!impl_->r2c || !impl_->c2r || !impl_->fwd || !impl_->bwd)
        throw NumericalError("Fft2D: FFTW plan creation failed");
}

Fft2D::~Fft2D() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (impl_->r2c) fftw_destroy_plan(impl_->r2c);
    if (impl_->c2r) fftw_destroy_plan(impl_->c2r);
    if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
    if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
    fftw_free(impl_->rbuf);
    fftw_free(impl_->half);
    fftw_free(impl_->cin);
    fftw_free(impl_->cout);
}

void Fft2D::forward_r2c(const double* in, std::complex<double>* out) {
    std::memcpy(impl_->rbuf, in, sizeof(double) * real_size());
    fftw_execute(impl_->r2c);
    std::memcpy(static_cast<void*>(out), impl_->half, sizeof(fftw_complex) * spectrum_size());
}

void Fft2D::backward_c2r(const std::complex<double>* in, double* out) {
    std::memcpy(impl_->half, in, sizeof(fftw_complex) * spectrum_size());
    fftw_execute(impl_->c2r);
    std::memcpy(out, impl_->rbuf, sizeof(double) * real_size());
}

void Fft2D::forward_c2c(const std::complex<double>* in, std::complex<double>* out) {
    std::memcpy(impl_->cin, in, sizeof(fftw_complex) * real_size());
    fftw_execute(impl_->fwd);
    std::memcpy(static_cast<void*>(out), impl_->cout, sizeof(fftw_complex) * real_size());
}

void Fft2D::backward_c2c(const std::complex<double>* in, std::complex<double>* out) {
    std::memcpy(impl_->cin, in, sizeof(fftw_complex) * real_size());
    fftw_execute(impl_->bwd);
    std::memcpy(static_cast<void*>(out), impl_->cout, sizeof(fftw_complex) * real_size());
}

} // namespace mks
