#include "bab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace bab::fft {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<cplx> scratch(n);
        auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw: plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mu_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void run(std::vector<cplx>& data, int sign) {
    if (data.empty()) return;
    fftw_plan plan = cache().get(data.size(), sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void forward(std::vector<cplx>& data) { run(data, FFTW_FORWARD); }
void inverse(std::vector<cplx>& data) { run(data, FFTW_BACKWARD); }

}  // namespace bab::fft
