#pragma once
#include <cstddef>
#include <vector>

namespace lpw {

// Planned linear convolution of a fixed-size signal with a fixed kernel via
// FFTW r2c/c2r transforms. One instance per worker; plan creation is guarded
// by a global mutex internally (FFTW planning is not thread safe), execution
// is lock free.
class Conv1D {
public:
    Conv1D(std::size_t nsig, std::size_t nker);
    ~Conv1D();
    Conv1D(const Conv1D&) = delete;
    Conv1D& operator=(const Conv1D&) = delete;

    void set_kernel(const double* k);

    // full linear convolution, out has nsig + nker - 1 entries
    void conv_full(const double* in, double* out);

    // centered convolution for odd kernels (length 2m+1): out[i] =
    // sum_j in[j] * k[i - j + m], same length as the input
    void conv_same(const double* in, double* out);

    std::size_t nsig() const { return nsig_; }
    std::size_t nker() const { return nker_; }

private:
    std::size_t nsig_, nker_, padded_;
    double* buf_ = nullptr;       // padded real workspace
    void* spec_ = nullptr;        // fftw_complex spectrum of current input
    void* kspec_ = nullptr;       // fftw_complex spectrum of kernel
    void* plan_fwd_ = nullptr;
    void* plan_inv_ = nullptr;
    std::vector<double> full_;
};

} // namespace lpw
