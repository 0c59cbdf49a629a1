// SPDX-License-Identifier: Apache-2.0
//
// FFTW3 plan cache. Plans are created once per (dim, N) with FFTW_ESTIMATE
// (deterministic) and executed on caller buffers through scratch arrays so
// concurrent callers never share state beyond the mutex-guarded cache.

#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "cnslab/field.hpp"

namespace cnslab::detail {

class FftPlan {
public:
    FftPlan(int dim, int n) : total_(1) {
        int sizes[3] = {n, n, n};
        for (int d = 0; d < dim; ++d) total_ *= static_cast<std::size_t>(n);
        in_ = fftw_alloc_complex(total_);
        out_ = fftw_alloc_complex(total_);
        fwd_ = fftw_plan_dft(dim, sizes, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft(dim, sizes, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftPlan() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(in_);
        fftw_free(out_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    // Executes in place on `data`; forward is scaled by 1/total.
    void execute(std::vector<cplx>& data, bool forward) {
        std::lock_guard<std::mutex> lk(mu_);
        for (std::size_t i = 0; i < total_; ++i) {
            in_[i][0] = data[i].real();
            in_[i][1] = data[i].imag();
        }
        fftw_execute(forward ? fwd_ : bwd_);
        const double scale = forward ? 1.0 / static_cast<double>(total_) : 1.0;
        for (std::size_t i = 0; i < total_; ++i) data[i] = cplx(out_[i][0] * scale, out_[i][1] * scale);
    }

private:
    std::size_t total_;
    fftw_complex* in_;
    fftw_complex* out_;
    fftw_plan fwd_;
    fftw_plan bwd_;
    std::mutex mu_;
};

inline FftPlan& plan_for(const TorusGrid& g) {
    static std::mutex cache_mu;
    static std::map<std::pair<int, int>, std::unique_ptr<FftPlan>> cache;
    std::lock_guard<std::mutex> lk(cache_mu);
    auto key = std::make_pair(g.dim(), g.points_per_axis());
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<FftPlan>(g.dim(), g.points_per_axis())).first;
    return *it->second;
}

}  // namespace cnslab::detail
