#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <vector>

namespace nsglue {

using cplx = std::complex<double>;

// Cached FFTW plans for an n^3 real-to-halfcomplex transform pair.  Plans own
// aligned scratch buffers; callers pass ordinary vectors and data is copied
// through the scratch (robust against FFTW's input-destruction rules).
class Fft3 {
  public:
    static Fft3& get(int n) {
        static std::map<int, std::unique_ptr<Fft3>> cache;
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, std::unique_ptr<Fft3>(new Fft3(n))).first;
        return *it->second;
    }

    int n() const { return n_; }
    std::size_t real_size() const { return std::size_t(n_) * n_ * n_; }
    std::size_t cplx_size() const { return std::size_t(n_) * n_ * (n_ / 2 + 1); }

    // unnormalized forward transform
    void fwd(const std::vector<double>& in, std::vector<cplx>& out) {
        std::memcpy(rbuf_, in.data(), real_size() * sizeof(double));
        fftw_execute(fwd_plan_);
        out.resize(cplx_size());
        std::memcpy(out.data(), cbuf_, cplx_size() * sizeof(cplx));
    }

    // inverse transform, normalized so bwd(fwd(x)) = x
    void bwd(const std::vector<cplx>& in, std::vector<double>& out) {
        std::memcpy(cbuf_, in.data(), cplx_size() * sizeof(cplx));
        fftw_execute(bwd_plan_);
        out.resize(real_size());
        const double s = 1.0 / double(real_size());
        for (std::size_t i = 0; i < real_size(); ++i) out[i] = rbuf_[i] * s;
    }

    ~Fft3() {
        fftw_destroy_plan(fwd_plan_);
        fftw_destroy_plan(bwd_plan_);
        fftw_free(rbuf_);
        fftw_free(cbuf_);
    }

    Fft3(const Fft3&) = delete;
    Fft3& operator=(const Fft3&) = delete;

  private:
    explicit Fft3(int n) : n_(n) {
        rbuf_ = fftw_alloc_real(real_size());
        cbuf_ = reinterpret_cast<fftw_complex*>(fftw_alloc_complex(cplx_size()));
        fwd_plan_ = fftw_plan_dft_r2c_3d(n, n, n, rbuf_, cbuf_, FFTW_ESTIMATE);
        bwd_plan_ = fftw_plan_dft_c2r_3d(n, n, n, cbuf_, rbuf_, FFTW_ESTIMATE);
    }

    int n_;
    double* rbuf_;
    fftw_complex* cbuf_;
    fftw_plan fwd_plan_;
    fftw_plan bwd_plan_;
};

}  // namespace nsglue
