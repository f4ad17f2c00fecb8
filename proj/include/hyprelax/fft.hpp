#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace hyprelax::detail {

/// Thin FFTW wrapper: in-place complex transforms with a process-wide plan
/// cache. Plans are created with FFTW_ESTIMATE (deterministic) and
/// FFTW_UNALIGNED so one plan serves any buffer of the right shape.
/// Not thread-safe; all solvers here are single-threaded by design.
class FftEngine {
public:
    static void forward(std::complex<double>* data, int n0, int n1 = 0) {
        execute(data, n0, n1, FFTW_FORWARD);
        const std::size_t total = n1 > 0 ? static_cast<std::size_t>(n0) * n1 : static_cast<std::size_t>(n0);
        const double scale = 1.0 / static_cast<double>(total);
        for (std::size_t i = 0; i < total; ++i) data[i] *= scale;
    }

    static void inverse(std::complex<double>* data, int n0, int n1 = 0) {
        execute(data, n0, n1, FFTW_BACKWARD);
    }

private:
    static void execute(std::complex<double>* data, int n0, int n1, int sign) {
        auto* p = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(plan(n0, n1, sign), p, p);
    }

    static fftw_plan plan(int n0, int n1, int sign) {
        static std::map<std::tuple<int, int, int>, fftw_plan> cache;
        const auto key = std::make_tuple(n0, n1, sign);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;

        const std::size_t total = n1 > 0 ? static_cast<std::size_t>(n0) * n1 : static_cast<std::size_t>(n0);
        std::vector<std::complex<double>> scratch(total);
        auto* s = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan pl = n1 > 0
                           ? fftw_plan_dft_2d(n0, n1, s, s, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
                           : fftw_plan_dft_1d(n0, s, s, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!pl) throw std::runtime_error("fft: plan creation failed");
        cache.emplace(key, pl);
        return pl;
    }
};

} // namespace hyprelax::detail
