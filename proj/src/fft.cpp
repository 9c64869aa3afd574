#include "lpw/fft.hpp"
#include "lpw/util.hpp"

#include <fftw3.h>
#include <mutex>
#include <cstring>

namespace lpw {

static std::mutex g_plan_mutex;

static std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

Conv1D::Conv1D(std::size_t nsig, std::size_t nker) : nsig_(nsig), nker_(nker) {
    padded_ = next_pow2(nsig_ + nker_ - 1);
    full_.resize(nsig_ + nker_ - 1);
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    buf_ = fftw_alloc_real(padded_);
    spec_ = fftw_alloc_complex(padded_ / 2 + 1);
    kspec_ = fftw_alloc_complex(padded_ / 2 + 1);
    plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(padded_), buf_,
                                     static_cast<fftw_complex*>(spec_), FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(padded_),
                                     static_cast<fftw_complex*>(spec_), buf_, FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_inv_) fail("fftw plan creation failed");
}

Conv1D::~Conv1D() {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
    fftw_free(buf_);
    fftw_free(spec_);
    fftw_free(kspec_);
}

void Conv1D::set_kernel(const double* k) {
    std::memcpy(buf_, k, nker_ * sizeof(double));
    std::memset(buf_ + nker_, 0, (padded_ - nker_) * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    std::memcpy(kspec_, spec_, (padded_ / 2 + 1) * sizeof(fftw_complex));
}

void Conv1D::conv_full(const double* in, double* out) {
    std::memcpy(buf_, in, nsig_ * sizeof(double));
    std::memset(buf_ + nsig_, 0, (padded_ - nsig_) * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    auto* s = static_cast<fftw_complex*>(spec_);
    auto* ks = static_cast<fftw_complex*>(kspec_);
    const double scale = 1.0 / static_cast<double>(padded_);
    for (std::size_t i = 0; i <= padded_ / 2; ++i) {
        double re = s[i][0] * ks[i][0] - s[i][1] * ks[i][1];
        double im = s[i][0] * ks[i][1] + s[i][1] * ks[i][0];
        s[i][0] = re * scale;
        s[i][1] = im * scale;
    }
    fftw_execute(static_cast<fftw_plan>(plan_inv_));
    std::memcpy(out, buf_, (nsig_ + nker_ - 1) * sizeof(double));
}

void Conv1D::conv_same(const double* in, double* out) {
    conv_full(in, full_.data());
    const std::size_t m = (nker_ - 1) / 2;
    std::memcpy(out, full_.data() + m, nsig_ * sizeof(double));
}

} // namespace lpw
