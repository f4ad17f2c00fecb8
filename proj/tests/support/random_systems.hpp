#pragma once

#include "hyprelax/rng.hpp"
#include "hyprelax/system.hpp"

namespace hyprelax::testsupport {

/// Random system satisfying the structural hypotheses: symmetric coefficient
/// matrices with vanishing leading blocks, damping with positive-definite
/// symmetric part on the trailing block. Roughly a third of the draws get
/// rank-deficient coupling blocks so that both stability outcomes appear.
inline PartiallyDissipativeSystem random_structured_system(Rng& rng, int max_n = 4) {
    const int d = rng.index(2) == 0 ? 1 : 2;
    const int n = 2 + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_n - 1)));
    const int n1 = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(n - 1)));
    const int n2 = n - n1;

    auto random_sym = [&](int size) {
        Mat b(size, size);
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j) b(i, j) = rng.normal();
        return ((b + b.transpose()) / 2.0).eval();
    };

    PartiallyDissipativeSystem sys;
    sys.d = d;
    sys.n1 = n1;
    sys.n2 = n2;

    const int coupling_mode = static_cast<int>(rng.index(3));  // 0: full, 1: zero, 2: rank-1
    sys.A_bar.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        Mat A = random_sym(n);
        A.topLeftCorner(n1, n1).setZero();
        if (coupling_mode == 1) {
            A.topRightCorner(n1, n2).setZero();
            A.bottomLeftCorner(n2, n1).setZero();
        } else if (coupling_mode == 2 && n1 > 1) {
            Mat col = Mat::Zero(n2, n1);
            for (int i = 0; i < n2; ++i) col(i, 0) = rng.normal();
            A.bottomLeftCorner(n2, n1) = col;
            A.topRightCorner(n1, n2) = col.transpose();
        }
        sys.A_bar[static_cast<std::size_t>(k)] = A;
    }

    sys.T.assign(static_cast<std::size_t>(d), std::vector<Mat>(static_cast<std::size_t>(n)));
    for (int k = 0; k < d; ++k)
        for (int m = 0; m < n; ++m) {
            Mat t = random_sym(n);
            if (m < n1) t.topLeftCorner(n1, n1).setZero();
            sys.T[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] = t;
        }

    Mat G(n2, n2), K(n2, n2);
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j) {
            G(i, j) = rng.normal();
            K(i, j) = rng.normal();
        }
    const Mat L2 = (G.transpose() * G + 0.2 * Mat::Identity(n2, n2) + 0.3 * (K - K.transpose())).eval();
    sys.L = Mat::Zero(n, n);
    sys.L.bottomRightCorner(n2, n2) = L2;
    return sys;
}

} // namespace hyprelax::testsupport
