#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace labelstack::linalg {

/// Dense row-major square matrix.
class SquareMatrix {
public:
    explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * n_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * n_ + c]; }

private:
    std::size_t n_;
    std::vector<double> data_;
};

/// Gaussian elimination with partial pivoting. Throws SingularSystem when a
/// pivot falls below rel_tol times the largest absolute entry of A.
std::vector<double> solve(SquareMatrix A, std::vector<double> b, double rel_tol = 1e-12);

/// Row-major n x k design matrix.
struct Design {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
};

/// Least squares via normal equations (A^T A + ridge * D) beta = A^T y,
/// where D is the identity except a zero for column `unpenalized` (pass
/// cols to penalize all). With ridge == 0 a rank-deficient design throws.
std::vector<double> least_squares(const Design& A, std::span<const double> y, double ridge = 0.0,
                                  std::size_t unpenalized = static_cast<std::size_t>(-1));

}  // namespace labelstack::linalg
