#pragma once

#include "hyprelax/errors.hpp"
#include "hyprelax/fft.hpp"
#include "hyprelax/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hyprelax {

/// Uniform periodic grid on [0, 2*pi*L_len)^d with N points per axis.
/// The frequency lattice consists of integer multiples of 1/L_len; index m
/// on an axis carries the signed wavenumber in [-N/2, N/2).
struct TorusGrid {
    int d = 1;
    int N = 64;
    double L_len = 1.0;

    TorusGrid() = default;
    TorusGrid(int d_, int N_, double L_len_ = 1.0) : d(d_), N(N_), L_len(L_len_) { check(); }

    void check() const {
        if (d < 1 || d > 2) throw ConfigError("grid: d must be 1 or 2");
        if (N < 4 || (N & (N - 1)) != 0) throw ConfigError("grid: N must be a power of two >= 4");
        if (!(L_len > 0.0)) throw ConfigError("grid: L_len must be positive");
    }

    std::size_t size() const {
        return d == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N;
    }

    double dx() const { return 2.0 * M_PI * L_len / N; }
    double cell_volume() const { return std::pow(dx(), d); }

    int signed_index(int i) const { return i < N / 2 ? i : i - N; }

    /// Physical wavenumber along one axis for flat-array axis index i.
    double freq(int i) const { return signed_index(i) / L_len; }

    double x(int i) const { return dx() * i; }

    double nyquist() const { return (N / 2) / L_len; }

    /// |k| of the flat coefficient index.
    double freq_norm(std::size_t flat) const {
        if (d == 1) return std::abs(freq(static_cast<int>(flat)));
        const int i = static_cast<int>(flat / static_cast<std::size_t>(N));
        const int j = static_cast<int>(flat % static_cast<std::size_t>(N));
        const double fi = freq(i), fj = freq(j);
        return std::sqrt(fi * fi + fj * fj);
    }

    bool operator==(const TorusGrid& o) const {
        return d == o.d && N == o.N && L_len == o.L_len;
    }
};

/// Real scalar field with lazily synchronized physical samples and spectral
/// coefficients (coefficients normalized so that the k = 0 entry is the mean).
/// Value-semantic; every operation returns a fresh field.
class SpectralField {
public:
    SpectralField() = default;

    static SpectralField from_values(const TorusGrid& grid, std::vector<double> values) {
        if (values.size() != grid.size())
            throw std::invalid_argument("field: value array does not match grid");
        SpectralField f;
        f.grid_ = grid;
        f.values_ = std::move(values);
        f.values_ok_ = true;
        return f;
    }

    static SpectralField from_coeffs(const TorusGrid& grid, std::vector<Complex> coeffs) {
        if (coeffs.size() != grid.size())
            throw std::invalid_argument("field: coefficient array does not match grid");
        SpectralField f;
        f.grid_ = grid;
        f.coeffs_ = std::move(coeffs);
        f.coeffs_ok_ = true;
        return f;
    }

    static SpectralField zero(const TorusGrid& grid) {
        return from_values(grid, std::vector<double>(grid.size(), 0.0));
    }

    /// Sample a function of x (d=1) on the grid.
    static SpectralField sample(const TorusGrid& grid, const std::function<double(double)>& f) {
        if (grid.d != 1) throw std::invalid_argument("field: 1-d sampler on non-1-d grid");
        std::vector<double> v(grid.size());
        for (int i = 0; i < grid.N; ++i) v[static_cast<std::size_t>(i)] = f(grid.x(i));
        return from_values(grid, std::move(v));
    }

    static SpectralField sample2(const TorusGrid& grid,
                                 const std::function<double(double, double)>& f) {
        if (grid.d != 2) throw std::invalid_argument("field: 2-d sampler on non-2-d grid");
        std::vector<double> v(grid.size());
        for (int i = 0; i < grid.N; ++i)
            for (int j = 0; j < grid.N; ++j)
                v[static_cast<std::size_t>(i) * grid.N + j] = f(grid.x(i), grid.x(j));
        return from_values(grid, std::move(v));
    }

    const TorusGrid& grid() const { return grid_; }

    const std::vector<double>& values() const {
        sync_values();
        return values_;
    }

    const std::vector<Complex>& coeffs() const {
        sync_coeffs();
        return coeffs_;
    }

    double mean() const { return coeffs()[0].real(); }

    /// New field with every coefficient scaled by m(|k|).
    SpectralField radial_multiplier(const std::function<double(double)>& m) const {
        sync_coeffs();
        std::vector<Complex> c(coeffs_);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= m(grid_.freq_norm(i));
        return from_coeffs(grid_, std::move(c));
    }

    /// Spectral derivative along one axis.
    SpectralField derivative(int axis) const {
        if (axis < 0 || axis >= grid_.d) throw std::out_of_range("field: derivative axis");
        sync_coeffs();
        std::vector<Complex> c(coeffs_);
        if (grid_.d == 1) {
            for (int i = 0; i < grid_.N; ++i)
                c[static_cast<std::size_t>(i)] *= Complex(0.0, grid_.freq(i));
        } else {
            for (int i = 0; i < grid_.N; ++i)
                for (int j = 0; j < grid_.N; ++j) {
                    const double k = axis == 0 ? grid_.freq(i) : grid_.freq(j);
                    c[static_cast<std::size_t>(i) * grid_.N + j] *= Complex(0.0, k);
                }
        }
        return from_coeffs(grid_, std::move(c));
    }

    /// Zero all modes with |index| > N/3 on any axis (2/3 dealiasing rule).
    SpectralField dealias() const {
        const int cut = grid_.N / 3;
        sync_coeffs();
        std::vector<Complex> c(coeffs_);
        if (grid_.d == 1) {
            for (int i = 0; i < grid_.N; ++i)
                if (std::abs(grid_.signed_index(i)) > cut) c[static_cast<std::size_t>(i)] = 0.0;
        } else {
            for (int i = 0; i < grid_.N; ++i)
                for (int j = 0; j < grid_.N; ++j)
                    if (std::abs(grid_.signed_index(i)) > cut || std::abs(grid_.signed_index(j)) > cut)
                        c[static_cast<std::size_t>(i) * grid_.N + j] = 0.0;
        }
        return from_coeffs(grid_, std::move(c));
    }

    /// Grid L^p norm by the rectangle rule (exact for trigonometric
    /// polynomials when p = 2); p = infinity gives the max norm.
    double lp_norm(double p) const {
        const auto& v = values();
        if (std::isinf(p)) {
            double m = 0.0;
            for (double x : v) m = std::max(m, std::abs(x));
            return m;
        }
        if (!(p >= 1.0)) throw std::invalid_argument("field: lp_norm needs p >= 1");
        double s = 0.0;
        for (double x : v) s += std::pow(std::abs(x), p);
        return std::pow(s * grid_.cell_volume(), 1.0 / p);
    }

    double max_abs() const { return lp_norm(std::numeric_limits<double>::infinity()); }

    bool finite() const {
        for (double x : values())
            if (!std::isfinite(x)) return false;
        return true;
    }

    SpectralField& operator+=(const SpectralField& o) { return combine(o, 1.0); }
    SpectralField& operator-=(const SpectralField& o) { return combine(o, -1.0); }

    SpectralField& operator*=(double a) {
        if (values_ok_)
            for (double& x : values_) x *= a;
        if (coeffs_ok_)
            for (Complex& c : coeffs_) c *= a;
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double a, SpectralField f) { return f *= a; }

    /// Pointwise product in physical space (caller is responsible for
    /// dealiasing the result where it matters).
    friend SpectralField pointwise(const SpectralField& a, const SpectralField& b) {
        require_same_grid(a, b);
        const auto& va = a.values();
        const auto& vb = b.values();
        std::vector<double> out(va.size());
        for (std::size_t i = 0; i < va.size(); ++i) out[i] = va[i] * vb[i];
        return from_values(a.grid_, std::move(out));
    }

    /// Pointwise transform of the samples.
    SpectralField map(const std::function<double(double)>& f) const {
        const auto& v = values();
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = f(v[i]);
        return from_values(grid_, std::move(out));
    }

private:
    static void require_same_grid(const SpectralField& a, const SpectralField& b) {
        if (!(a.grid_ == b.grid_)) throw std::invalid_argument("field: grid mismatch");
    }

    SpectralField& combine(const SpectralField& o, double sign) {
        require_same_grid(*this, o);
        if (coeffs_ok_ && o.coeffs_ok_ && !values_ok_) {
            for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += sign * o.coeffs_[i];
            return *this;
        }
        sync_values();
        const auto& ov = o.values();
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += sign * ov[i];
        coeffs_ok_ = false;
        return *this;
    }

    void sync_coeffs() const {
        if (coeffs_ok_) return;
        if (!values_ok_) throw std::logic_error("field: empty");
        coeffs_.assign(values_.begin(), values_.end());
        if (grid_.d == 1)
            detail::FftEngine::forward(coeffs_.data(), grid_.N);
        else
            detail::FftEngine::forward(coeffs_.data(), grid_.N, grid_.N);
        coeffs_ok_ = true;
    }

    void sync_values() const {
        if (values_ok_) return;
        if (!coeffs_ok_) throw std::logic_error("field: empty");
        std::vector<Complex> tmp(coeffs_);
        if (grid_.d == 1)
            detail::FftEngine::inverse(tmp.data(), grid_.N);
        else
            detail::FftEngine::inverse(tmp.data(), grid_.N, grid_.N);
        values_.resize(tmp.size());
        for (std::size_t i = 0; i < tmp.size(); ++i) values_[i] = tmp[i].real();
        values_ok_ = true;
    }

    TorusGrid grid_;
    mutable std::vector<double> values_;
    mutable std::vector<Complex> coeffs_;
    mutable bool values_ok_ = false;
    mutable bool coeffs_ok_ = false;
};

} // namespace hyprelax
