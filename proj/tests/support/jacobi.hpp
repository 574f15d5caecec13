#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "thinwalk/quotients.hpp"

namespace thinwalk::testing_support {

// Cyclic Jacobi rotations on a dense symmetric matrix; returns ascending eigenvalues.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        }
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline std::vector<std::vector<double>> transition_rows(const CayleyTable& t) {
    std::vector<std::vector<double>> p(t.order(), std::vector<double>(t.order(), 0.0));
    for (std::size_t i = 0; i < t.order(); ++i) {
        for (std::size_t a = 0; a < t.generator_count(); ++a) p[i][t.step(i, a)] += double(t.weights[a]) / t.a_size;
    }
    return p;
}

}  // namespace thinwalk::testing_support
