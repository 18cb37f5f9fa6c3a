#pragma once

#include "labelstack/execution.hpp"
#include "labelstack/random.hpp"

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace labelstack::theory {

/// A target feature x, a fully observed covariate z and an encoded label
/// y >= 0, all of the same length n >= 3.
struct TheoremInstance {
    std::vector<double> x;
    std::vector<double> z;
    std::vector<double> y;

    std::size_t size() const noexcept { return x.size(); }
    void validate() const;
};

/// x_hat = intercept + z_coef * z + y_coef * y
struct Coefficients {
    double intercept = 0.0;
    double z_coef = 0.0;
    double y_coef = 0.0;
};

/// Comparison of the label-augmented linear model against the same model
/// with its label term dropped.
struct TheoremReport {
    Coefficients gamma;
    double mean_x = 0.0;
    double mean_z = 0.0;
    double mean_y = 0.0;
    std::vector<double> E;  // per-row contribution weights
    double v_plus = 0.0;    // sum of y_i E_i over E_i >= 0
    double v_minus = 0.0;   // sum of y_i E_i over E_i < 0
    double sse_iul = 0.0;   // sum (x_hat_i - x_i)^2
    double sse_di = 0.0;    // sum (x_hat_i - y_coef y_i - x_i)^2, shared coefficients
    double identity_residual = 0.0;  // |(sse_di - sse_iul) - (v_plus + v_minus)|
    double tolerance_bound = 0.0;    // tol * max(1, |sse_di|)
    bool identity_holds = false;
    bool iff_holds = false;  // (sse_iul <= sse_di) == (v_plus + v_minus >= 0), at tolerance

    // Diagnostics with no claimed identity.
    double sse_di_refit = 0.0;     // SSE of an OLS refit of x on [1, z]
    double sse_di_sst_form = 0.0;  // SST - sum (x_hat'_i - mean_x)^2

    double v_sum() const noexcept { return v_plus + v_minus; }
    bool ok() const noexcept { return identity_holds && iff_holds; }
};

/// OLS of x on [1, z, y] via normal equations with partial pivoting.
/// Throws DataError if the design is rank deficient.
Coefficients fit_ols_full(const TheoremInstance& inst);

/// E_i = y_coef^2 (y_i - 2 mean_y) + 2 z_coef y_coef (z_i - mean_z).
std::vector<double> compute_E(const TheoremInstance& inst, const Coefficients& gamma);

/// (sum over E_i >= 0 of y_i E_i, sum over E_i < 0 of y_i E_i)
std::pair<double, double> split_V(const TheoremInstance& inst, std::span<const double> E);

/// Full evaluation; records violations in the report instead of throwing.
TheoremReport evaluate_theorem1(const TheoremInstance& inst, double tol);

/// As evaluate_theorem1, but throws InvariantViolation if the identity or the
/// sign equivalence fails at tolerance.
TheoremReport verify_theorem1(const TheoremInstance& inst, double tol);

/// x, z uniform on [-1, 1]; y = |u| with u uniform on [-1, 1].
TheoremInstance random_instance(std::size_t n, Rng& rng);

/// Evaluate many instances. Parallel spreads instances over OpenMP threads;
/// results are identical to the serial path.
std::vector<TheoremReport> evaluate_batch(std::span<const TheoremInstance> instances, double tol,
                                          Execution exec = Execution::Parallel);

/// One row per report; header documented in the README.
void write_theorem_csv(std::ostream& out, std::span<const TheoremReport> reports);

}  // namespace labelstack::theory
