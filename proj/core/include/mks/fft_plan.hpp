#pragma once

#include <complex>
#include <memory>

namespace mks {

// RAII wrapper over FFTW for one fixed (width, height). Transforms copy
// through internal aligned buffers, so callers never touch FFTW memory.
// Plan creation/destruction is serialized internally (FFTW requirement);
// execution is reentrant across distinct Fft2D objects, so give each worker
// thread its own instance. All transforms are unnormalized.
class Fft2D {
public:
    Fft2D(int width, int height);
    ~Fft2D();
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    int width() const { return width_; }
    int height() const { return height_; }
    // r2c stores the non-redundant half spectrum: height rows, width/2+1 cols.
    int spectrum_width() const { return width_ / 2 + 1; }
    long spectrum_size() const { return static_cast<long>(height_) * spectrum_width(); }
    long real_size() const { return static_cast<long>(width_) * height_; }

    void forward_r2c(const double* in, std::complex<double>* out);
    void backward_c2r(const std::complex<double>* in, double* out);

    void forward_c2c(const std::complex<double>* in, std::complex<double>* out);
    void backward_c2c(const std::complex<double>* in, std::complex<double>* out);

private:
    struct Impl;
    int width_;
    int height_;
    std::unique_ptr<Impl> impl_;
};

} // namespace mks
