#include "labelstack/linalg.hpp"

#include "labelstack/error.hpp"

#include <algorithm>
#include <cmath>

namespace labelstack::linalg {

std::vector<double> solve(SquareMatrix A, std::vector<double> b, double rel_tol)
{
    const std::size_t n = A.size();
    if (b.size() != n) {
        throw UsageError("solve: dimension mismatch");
    }
    double scale = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            scale = std::max(scale, std::abs(A(r, c)));
        }
    }
    if (scale == 0.0) {
        throw SingularSystem("singular system: zero matrix");
    }
    const double tiny = rel_tol * scale;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r) {
            if (std::abs(A(r, k)) > std::abs(A(piv, k))) {
                piv = r;
            }
        }
        if (std::abs(A(piv, k)) <= tiny) {
            throw SingularSystem("singular system: pivot " + std::to_string(k) + " below tolerance");
        }
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(A(k, c), A(piv, c));
            }
            std::swap(b[k], b[piv]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = A(r, k) / A(k, k);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = k; c < n; ++c) {
                A(r, c) -= f * A(k, c);
            }
            b[r] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t c = k + 1; c < n; ++c) {
            s -= A(k, c) * x[c];
        }
        x[k] = s / A(k, k);
    }
    return x;
}

std::vector<double> least_squares(const Design& A, std::span<const double> y, double ridge,
                                  std::size_t unpenalized)
{
    if (y.size() != A.rows) {
        throw UsageError("least_squares: response length differs from design rows");
    }
    if (ridge < 0.0) {
        throw UsageError("least_squares: ridge must be >= 0");
    }
    const std::size_t k = A.cols;
    SquareMatrix G(k);
    std::vector<double> rhs(k, 0.0);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* row = A.data.data() + i * k;
        for (std::size_t a = 0; a < k; ++a) {
            rhs[a] += row[a] * y[i];
            for (std::size_t b = a; b < k; ++b) {
                G(a, b) += row[a] * row[b];
            }
        }
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            G(a, b) = G(b, a);
        }
        if (a != unpenalized) {
            G(a, a) += ridge;
        }
    }
    try {
        return solve(std::move(G), std::move(rhs), ridge > 0.0 ? 1e-15 : 1e-12);
    } catch (const SingularSystem&) {
        if (ridge == 0.0) {
            throw SingularSystem("least squares design is rank deficient; use a ridge penalty > 0");
        }
        throw;
    }
}

}  // namespace labelstack::linalg
