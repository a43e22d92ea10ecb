#include "corstitch/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace corstitch {
namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t rows, std::size_t cols, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(rows, cols, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        // FFTW_ESTIMATE leaves the scratch arrays untouched; UNALIGNED permits new-array
        // execution on std::vector storage.
        std::vector<Complex> scratch_in(rows * cols), scratch_out(rows * cols);
        auto plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                     reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                     reinterpret_cast<fftw_complex*>(scratch_out.data()), sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plans() {
    static PlanCache cache;
    return cache;
}

ComplexGrid transform(const ComplexGrid& input, int sign) {
    ComplexGrid out(input.rows(), input.cols());
    if (input.empty()) return out;
    auto plan = plans().get(input.rows(), input.cols(), sign);
    // fftw_execute_dft does not modify its input for out-of-place complex plans.
    auto* in = const_cast<Complex*>(input.values().data());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in),
                     reinterpret_cast<fftw_complex*>(out.values().data()));
    return out;
}

}  // namespace

ComplexGrid fft2(const ComplexGrid& input) { return transform(input, FFTW_FORWARD); }

ComplexGrid fft2(const RealGrid& input) {
    ComplexGrid complex(input.rows(), input.cols());
    auto src = input.values();
    auto dst = complex.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
    return fft2(complex);
}

ComplexGrid ifft2(const ComplexGrid& input) {
    auto out = transform(input, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(input.size());
    for (auto& v : out.values()) v *= scale;
    return out;
}

}  // namespace corstitch
