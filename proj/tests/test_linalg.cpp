#include "doctest.h"

#include "labelstack/error.hpp"
#include "labelstack/linalg.hpp"
#include "labelstack/random.hpp"

#include <Eigen/Dense>

using namespace labelstack;

TEST_CASE("solve recovers a known solution")
{
    linalg::SquareMatrix A(3);
    const double vals[3][3] = {{0.0, 2.0, 1.0}, {1.0, 1.0, 0.0}, {3.0, 0.0, 1.0}};
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            A(r, c) = vals[r][c];
        }
    }
    // x = (1, -2, 3)
    const auto x = linalg::solve(A, {-1.0, -1.0, 6.0});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(x[2] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("singular systems throw")
{
    linalg::SquareMatrix A(2);
    A(0, 0) = 1.0;
    A(0, 1) = 2.0;
    A(1, 0) = 2.0;
    A(1, 1) = 4.0;
    CHECK_THROWS_AS(linalg::solve(A, {1.0, 2.0}), SingularSystem);

    linalg::Design D{3, 2, {1, 1, 1, 1, 1, 1}};
    CHECK_THROWS_AS(linalg::least_squares(D, std::vector<double>{1, 2, 3}), SingularSystem);
    CHECK_NOTHROW(linalg::least_squares(D, std::vector<double>{1, 2, 3}, 1e-6));
}

TEST_CASE("least squares agrees with an SVD solve")
{
    Rng rng(11);
    const std::size_t n = 30;
    const std::size_t k = 4;
    linalg::Design A{n, k, {}};
    Eigen::MatrixXd M(n, k);
    std::vector<double> y(n);
    Eigen::VectorXd ye(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            const double v = c == 0 ? 1.0 : rng.uniform(-1.0, 1.0);
            A.data.push_back(v);
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
        y[r] = rng.uniform(-2.0, 2.0);
        ye(static_cast<Eigen::Index>(r)) = y[r];
    }
    const auto beta = linalg::least_squares(A, y);
    const Eigen::VectorXd ref = M.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(ye);
    for (std::size_t c = 0; c < k; ++c) {
        CHECK(beta[c] == doctest::Approx(ref(static_cast<Eigen::Index>(c))).epsilon(1e-10));
    }
}

TEST_CASE("ridge leaves the unpenalized column free")
{
    // y = 5 exactly; a huge ridge shrinks the slope but not the intercept.
    linalg::Design A{4, 2, {1, 0, 1, 1, 1, 2, 1, 3}};
    const std::vector<double> y{5, 5, 5, 5};
    const auto beta = linalg::least_squares(A, y, 1e6, 0);
    CHECK(beta[0] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(std::abs(beta[1]) < 1e-9);
}
