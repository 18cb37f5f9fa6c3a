#include "labelstack/theory.hpp"

#include "labelstack/csv.hpp"
#include "labelstack/error.hpp"
#include "labelstack/linalg.hpp"
#include "labelstack/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>

namespace labelstack::theory {

namespace {

double mean(std::span<const double> v)
{
    double s = 0.0;
    for (double a : v) {
        s += a;
    }
    return s / static_cast<double>(v.size());
}

}  // namespace

void TheoremInstance::validate() const
{
    if (x.size() != z.size() || x.size() != y.size()) {
        throw UsageError("theorem instance: x, z, y lengths differ");
    }
    if (x.size() < 3) {
        throw UsageError("theorem instance: need n >= 3");
    }
    for (double v : y) {
        if (!(v >= 0.0)) {
            throw UsageError("theorem instance: labels must be >= 0");
        }
    }
    for (const auto* vec : {&x, &z, &y}) {
        for (double v : *vec) {
            if (!std::isfinite(v)) {
                throw UsageError("theorem instance: non-finite entry");
            }
        }
    }
}

Coefficients fit_ols_full(const TheoremInstance& inst)
{
    inst.validate();
    const std::size_t n = inst.size();
    linalg::Design A{n, 3, {}};
    A.data.reserve(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        A.data.insert(A.data.end(), {1.0, inst.z[i], inst.y[i]});
    }
    try {
        const auto beta = linalg::least_squares(A, inst.x, 0.0);
        return {beta[0], beta[1], beta[2]};
    } catch (const SingularSystem&) {
        throw DataError("theorem instance: design [1, z, y] is rank deficient");
    }
}

std::vector<double> compute_E(const TheoremInstance& inst, const Coefficients& gamma)
{
    const double mz = mean(inst.z);
    const double my = mean(inst.y);
    const double g1 = gamma.z_coef;
    const double g2 = gamma.y_coef;
    std::vector<double> E(inst.size());
    for (std::size_t i = 0; i < E.size(); ++i) {
        E[i] = g2 * g2 * (inst.y[i] - 2.0 * my) + 2.0 * g1 * g2 * (inst.z[i] - mz);
    }
    return E;
}

std::pair<double, double> split_V(const TheoremInstance& inst, std::span<const double> E)
{
    if (E.size() != inst.size()) {
        throw UsageError("split_V: E length differs from instance size");
    }
    double plus = 0.0;
    double minus = 0.0;
    for (std::size_t i = 0; i < E.size(); ++i) {
        (E[i] >= 0.0 ? plus : minus) += inst.y[i] * E[i];
    }
    return {plus, minus};
}

TheoremReport evaluate_theorem1(const TheoremInstance& inst, double tol)
{
    if (!(tol >= 0.0)) {
        throw UsageError("theorem check: tolerance must be >= 0");
    }
    TheoremReport rep;
    rep.gamma = fit_ols_full(inst);
    rep.mean_x = mean(inst.x);
    rep.mean_z = mean(inst.z);
    rep.mean_y = mean(inst.y);

    const auto& g = rep.gamma;
    double sst = 0.0;
    double ssr_di = 0.0;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const double di = g.intercept + g.z_coef * inst.z[i];
        const double iul = di + g.y_coef * inst.y[i];
        rep.sse_iul += (iul - inst.x[i]) * (iul - inst.x[i]);
        rep.sse_di += (di - inst.x[i]) * (di - inst.x[i]);
        sst += (inst.x[i] - rep.mean_x) * (inst.x[i] - rep.mean_x);
        ssr_di += (di - rep.mean_x) * (di - rep.mean_x);
    }
    rep.sse_di_sst_form = sst - ssr_di;

    {
        linalg::Design B{inst.size(), 2, {}};
        for (std::size_t i = 0; i < inst.size(); ++i) {
            B.data.insert(B.data.end(), {1.0, inst.z[i]});
        }
        const auto beta = linalg::least_squares(B, inst.x, 0.0);
        for (std::size_t i = 0; i < inst.size(); ++i) {
            const double r = beta[0] + beta[1] * inst.z[i] - inst.x[i];
            rep.sse_di_refit += r * r;
        }
    }

    rep.E = compute_E(inst, rep.gamma);
    std::tie(rep.v_plus, rep.v_minus) = split_V(inst, rep.E);

    rep.identity_residual = std::abs((rep.sse_di - rep.sse_iul) - rep.v_sum());
    rep.tolerance_bound = tol * std::max(1.0, std::abs(rep.sse_di));
    rep.identity_holds = rep.identity_residual <= rep.tolerance_bound;
    const bool iul_wins = rep.sse_iul <= rep.sse_di + rep.tolerance_bound;
    const bool v_nonneg = rep.v_sum() >= -rep.tolerance_bound;
    rep.iff_holds = iul_wins == v_nonneg;
    return rep;
}

TheoremReport verify_theorem1(const TheoremInstance& inst, double tol)
{
    TheoremReport rep = evaluate_theorem1(inst, tol);
    if (!rep.identity_holds) {
        throw InvariantViolation("SSE identity violated: residual " + format_roundtrip(rep.identity_residual) +
                                 " exceeds " + format_roundtrip(rep.tolerance_bound));
    }
    if (!rep.iff_holds) {
        throw InvariantViolation("sign equivalence violated: sse_iul=" + format_roundtrip(rep.sse_iul) +
                                 " sse_di=" + format_roundtrip(rep.sse_di) +
                                 " V=" + format_roundtrip(rep.v_sum()));
    }
    return rep;
}

TheoremInstance random_instance(std::size_t n, Rng& rng)
{
    TheoremInstance inst;
    inst.x.resize(n);
    inst.z.resize(n);
    inst.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        inst.x[i] = rng.uniform(-1.0, 1.0);
        inst.z[i] = rng.uniform(-1.0, 1.0);
        inst.y[i] = std::abs(rng.uniform(-1.0, 1.0));
    }
    return inst;
}

std::vector<TheoremReport> evaluate_batch(std::span<const TheoremInstance> instances, double tol,
                                          Execution exec)
{
    std::vector<TheoremReport> out(instances.size());
    for_each_index(instances.size(), exec,
                   [&](std::size_t i) { out[i] = evaluate_theorem1(instances[i], tol); });
    return out;
}

void write_theorem_csv(std::ostream& out, std::span<const TheoremReport> reports)
{
    out << "instance,n,gamma0,gamma1,gamma2,mean_x,mean_z,mean_y,v_plus,v_minus,v_sum,"
           "sse_iul,sse_di,identity_residual,tolerance_bound,identity_holds,iff_holds,"
           "sse_di_refit,sse_di_sst_form\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        const auto f = [](double v) { return format_roundtrip(v); };
        out << i << ',' << r.E.size() << ',' << f(r.gamma.intercept) << ',' << f(r.gamma.z_coef) << ','
            << f(r.gamma.y_coef) << ',' << f(r.mean_x) << ',' << f(r.mean_z) << ',' << f(r.mean_y) << ','
            << f(r.v_plus) << ',' << f(r.v_minus) << ',' << f(r.v_sum()) << ',' << f(r.sse_iul) << ','
            << f(r.sse_di) << ',' << f(r.identity_residual) << ',' << f(r.tolerance_bound) << ','
            << (r.identity_holds ? 1 : 0) << ',' << (r.iff_holds ? 1 : 0) << ',' << f(r.sse_di_refit)
            << ',' << f(r.sse_di_sst_form) << '\n';
    }
}

}  // namespace labelstack::theory
