#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stallpred/errors.hpp"
#include "stallpred/gp.hpp"
#include "stallpred/rng.hpp"
#include "stallpred/tune.hpp"

using namespace stallpred;

namespace {

SeKernel kernel_1d(double signal_var = 1.0, double noise_var = 0.0) {
    SeKernel k;
    k.length_scales = {0.2};
    k.signal_var = signal_var;
    k.noise_var = noise_var;
    return k;
}

// Naive Gauss-Jordan inverse; the test-side linear algebra stays independent
// of the library's Cholesky path.
std::vector<Vector> invert(std::vector<Vector> a) {
    const std::size_t n = a.size();
    std::vector<Vector> inv(n, Vector(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        const double d = a[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

SearchSpace space_1d() {
    SearchSpace s;
    s.dims = {{"x", DimKind::ContinuousLinear, 0.0, 1.0, {}}};
    return s;
}

}  // namespace

TEST_CASE("gp_fit: single observation interpolates") {
    GpSurrogate s = gp_fit({{{0.4}, 0.7}}, kernel_1d());
    const Posterior p = gp_posterior(s, {0.4});
    CHECK(p.mean == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(p.stddev <= 1e-6);
}

TEST_CASE("gp_fit: duplicate points merge by objective mean") {
    GpSurrogate merged = gp_fit({{{0.4}, 0.7}, {{0.4}, 0.7}}, kernel_1d());
    GpSurrogate single = gp_fit({{{0.4}, 0.7}}, kernel_1d());
    CHECK(merged.obs.size() == 1);
    for (double x : {0.1, 0.4, 0.8}) {
        const Posterior a = gp_posterior(merged, {x});
        const Posterior b = gp_posterior(single, {x});
        CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));
        CHECK(a.stddev == doctest::Approx(b.stddev).epsilon(1e-12));
    }

    GpSurrogate avg = gp_fit({{{0.4}, 0.6}, {{0.4}, 0.8}}, kernel_1d());
    CHECK(gp_posterior(avg, {0.4}).mean == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("gp_fit: empty observations rejected") {
    CHECK_THROWS_AS(gp_fit({}, kernel_1d()), std::invalid_argument);
}

TEST_CASE("gp posterior: matches an explicit matrix-inverse solve on 5 points") {
    Rng rng(12);
    SeKernel k;
    k.length_scales = {0.2, 0.3};
    k.signal_var = 1.5;
    k.noise_var = 1e-6;
    std::vector<Observation> obs;
    for (int i = 0; i < 5; ++i)
        obs.push_back({{rng.uniform(), rng.uniform()}, rng.uniform()});
    GpSurrogate s = gp_fit(obs, k);

    const std::size_t n = obs.size();
    std::vector<Vector> km(n, Vector(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            km[i][j] = kernel_eval(k, obs[i].point, obs[j].point);
            if (i == j) km[i][j] += k.noise_var;
        }
    const auto kinv = invert(km);

    for (int probe = 0; probe < 8; ++probe) {
        const Vector x{rng.uniform(), rng.uniform()};
        Vector kstar(n);
        for (std::size_t i = 0; i < n; ++i) kstar[i] = kernel_eval(k, obs[i].point, x);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) mean += kstar[i] * kinv[i][j] * obs[j].objective;
        double var = k.signal_var;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) var -= kstar[i] * kinv[i][j] * kstar[j];

        const Posterior p = gp_posterior(s, x);
        CHECK(p.mean == doctest::Approx(mean).epsilon(1e-8));
        CHECK(p.stddev == doctest::Approx(std::sqrt(std::max(var, 0.0))).epsilon(1e-7));
    }

    // posterior mean at each training point within sigma_n of the value
    for (const auto& o : obs) {
        const Posterior p = gp_posterior(s, o.point);
        CHECK(std::fabs(p.mean - o.objective) <= std::sqrt(k.noise_var) + 1e-9);
    }
}

TEST_CASE("gp posterior: prior recovery far from the data") {
    GpSurrogate s = gp_fit({{{0.5}, 0.9}}, kernel_1d(1.0, 0.0));
    // 10 length scales away
    const Posterior p = gp_posterior(s, {0.5 + 10.0 * 0.2});
    CHECK(std::fabs(p.mean) < 1e-6);
    CHECK(p.stddev == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gp posterior: hand-solved 2x2 system") {
    const double sf = 1.3, sn = 1e-4;
    SeKernel k = kernel_1d(sf, sn);
    const Vector x1{0.2}, x2{0.6};
    const double y1 = 0.4, y2 = 0.9;
    GpSurrogate s = gp_fit({{x1, y1}, {x2, y2}}, k);

    const double b = kernel_eval(k, x1, x2);
    const double a = sf + sn;
    const double det = a * a - b * b;

    for (double px : {0.3, 0.5, 0.85}) {
        const Vector x{px};
        const double k1 = kernel_eval(k, x1, x);
        const double k2 = kernel_eval(k, x2, x);
        // K^{-1} = [[a,-b],[-b,a]] / det
        const double w1 = (a * k1 - b * k2) / det;
        const double w2 = (-b * k1 + a * k2) / det;
        const double mean = w1 * y1 + w2 * y2;
        const double var = sf - (k1 * w1 + k2 * w2);
        const Posterior p = gp_posterior(s, x);
        CHECK(p.mean == doctest::Approx(mean).epsilon(1e-10));
        CHECK(p.stddev == doctest::Approx(std::sqrt(std::max(var, 0.0))).epsilon(1e-10));
    }
}

TEST_CASE("ei_value: analytic anchor points") {
    // phi(0) = 1/sqrt(2 pi)
    CHECK(ei_value(0.5, 1.0, 0.5) == doctest::Approx(0.398942).epsilon(1e-6));
    // sigma = 0 reduces to max(0, gap)
    CHECK(ei_value(0.3, 0.0, 0.5) == 0.0);
    CHECK(ei_value(0.7, 0.0, 0.5) == doctest::Approx(0.2));
    // dominant gap
    CHECK(ei_value(10.5, 1e-6, 0.5) == doctest::Approx(10.0).epsilon(1e-5));
}

TEST_CASE("ei_value: nonnegative, monotone in sigma, antitone in y_best") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const double mu = 2.0 * rng.normal();
        const double sigma = std::fabs(rng.normal());
        const double best = 2.0 * rng.normal();
        const double ei = ei_value(mu, sigma, best);
        CHECK(ei >= 0.0);
        CHECK(ei >= std::max(0.0, mu - best) - 1e-12);  // EI dominates the greedy gap
        if (mu < best)
            CHECK(ei_value(mu, sigma + 0.1, best) >= ei);  // more uncertainty helps
        CHECK(ei_value(mu, sigma, best + 0.1) <= ei + 1e-12);
    }
}

TEST_CASE("expected_improvement: saturates through the surrogate") {
    GpSurrogate s = gp_fit({{{0.5}, 0.9}}, kernel_1d(1.0, 0.0));
    // at the observed point sigma ~ 0 and mean = y_best: no improvement
    CHECK(expected_improvement(s, {0.5}, 0.9) <= 1e-6);
    // far away: mean ~ 0, sigma ~ 1, y_best = mean there => phi(0)
    CHECK(expected_improvement(s, {0.5 + 2.0}, 0.0) ==
          doctest::Approx(0.398942).epsilon(1e-5));
    // degenerate flat surrogate: EI identically zero
    GpSurrogate flat = gp_fit({{{0.5}, 0.0}}, kernel_1d(0.0, 1e-6));
    CHECK(expected_improvement(flat, {0.1}, 0.0) == 0.0);
}

TEST_CASE("propose_next: moves away from a single low observation") {
    // zero-mean prior: far from a bad point the posterior mean rises back
    // to 0 and EI grows, so the proposal leaves the neighborhood
    GpSurrogate s = gp_fit({{{0.5}, -1.0}}, kernel_1d(1.0, 1e-6));
    const Vector p = propose_next(s, space_1d(), 3);
    CHECK(std::fabs(p[0] - 0.5) > 0.2);
}

TEST_CASE("propose_next: deterministic per seed; random fallback inside the box") {
    GpSurrogate flat = gp_fit({{{0.5}, 0.0}}, kernel_1d(0.0, 1e-6));
    const Vector a = propose_next(flat, space_1d(), 7);
    const Vector b = propose_next(flat, space_1d(), 7);
    const Vector c = propose_next(flat, space_1d(), 8);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a[0] >= 0.0);
    CHECK(a[0] <= 1.0);

    GpSurrogate s = gp_fit({{{0.2}, 0.1}, {{0.7}, 0.4}}, kernel_1d(1.0, 1e-6));
    CHECK(propose_next(s, space_1d(), 11) == propose_next(s, space_1d(), 11));
}

TEST_CASE("propose_next: integer and categorical dims come back snapped") {
    SearchSpace space;
    space.dims = {{"units", DimKind::Integer, 8.0, 256.0, {}},
                  {"act", DimKind::Categorical, 0.0, 0.0, {"relu", "tanh", "sigmoid"}}};
    SeKernel k;
    k.length_scales = {0.2, 0.2};
    k.signal_var = 1.0;
    k.noise_var = 1e-6;
    GpSurrogate s = gp_fit({{snap_point(space, {0.3, 0.4}), 0.2},
                            {snap_point(space, {0.9, 0.9}), -0.5}},
                           k);
    const Vector p = propose_next(s, space, 5);
    const double units = dim_value(space.dims[0], p[0]);
    CHECK(units == std::round(units));
    CHECK(snap_unit(space.dims[0], p[0]) == doctest::Approx(p[0]));
    CHECK(snap_unit(space.dims[1], p[1]) == doctest::Approx(p[1]));
}

TEST_CASE("dimension mapping: log, linear, integer, categorical") {
    Dimension lr{"lr", DimKind::ContinuousLog, 1e-5, 1e-2, {}};
    CHECK(dim_value(lr, 0.0) == doctest::Approx(1e-5));
    CHECK(dim_value(lr, 1.0) == doctest::Approx(1e-2));
    // geometric midpoint
    CHECK(dim_value(lr, 0.5) == doctest::Approx(std::sqrt(1e-5 * 1e-2)).epsilon(1e-12));

    Dimension lin{"w", DimKind::ContinuousLinear, -2.0, 6.0, {}};
    CHECK(dim_value(lin, 0.25) == doctest::Approx(0.0));

    Dimension units{"u", DimKind::Integer, 8.0, 10.0, {}};
    CHECK(dim_value(units, 0.0) == 8.0);
    CHECK(dim_value(units, 0.49) == 9.0);
    CHECK(dim_value(units, 1.0) == 10.0);

    Dimension cat{"c", DimKind::Categorical, 0.0, 0.0, {"a", "b"}};
    CHECK(dim_value(cat, 0.1) == 0.0);
    CHECK(dim_value(cat, 0.9) == 1.0);
    CHECK(dim_value(cat, 1.0) == 1.0);
}

TEST_CASE("search space validation") {
    SearchSpace bad1;
    bad1.dims = {{"x", DimKind::ContinuousLinear, 2.0, 1.0, {}}};
    CHECK_THROWS_AS(validate(bad1), std::invalid_argument);
    SearchSpace bad2;
    bad2.dims = {{"lr", DimKind::ContinuousLog, 0.0, 1.0, {}}};
    CHECK_THROWS_AS(validate(bad2), std::invalid_argument);
    SearchSpace bad3;
    CHECK_THROWS_AS(validate(bad3), std::invalid_argument);
}

TEST_CASE("tune: finds the quadratic optimum for 9 of 10 seeds") {
    auto objective = [](const Vector& u) {
        return -(u[0] - 0.3) * (u[0] - 0.3);
    };
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const TuneResult r = tune(objective, space_1d(), 20, 5, seed);
        CHECK(r.trace.size() == 20);
        if (std::fabs(r.best_point[0] - 0.3) < 0.05) ++hits;
    }
    CHECK(hits >= 9);
}

TEST_CASE("tune: budget == init degenerates to random search") {
    auto objective = [](const Vector& u) { return u[0]; };
    const TuneResult r = tune(objective, space_1d(), 6, 6, 3);
    CHECK(r.trace.size() == 6);
    double best = -1.0;
    for (const auto& t : r.trace) best = std::max(best, t.objective);
    CHECK(r.best_objective == best);
}

TEST_CASE("tune: constant objective completes with a full trace") {
    auto objective = [](const Vector&) { return 0.5; };
    const TuneResult r = tune(objective, space_1d(), 12, 4, 1);
    CHECK(r.trace.size() == 12);
    CHECK(r.best_objective == 0.5);
    CHECK(r.best_index == 0);  // ties break to the earliest trial
}

TEST_CASE("tune: non-finite objectives are recorded as failed and skipped") {
    auto objective = [](const Vector& u) {
        if (u[0] < 0.5) return std::nan("");
        return 1.0 - u[0];
    };
    const TuneResult r = tune(objective, space_1d(), 15, 5, 2);
    CHECK(r.trace.size() == 15);
    bool any_failed = false;
    for (const auto& t : r.trace) any_failed = any_failed || !t.ok;
    CHECK(any_failed);
    CHECK(std::isfinite(r.best_objective));
    CHECK(r.best_point[0] >= 0.5);
}

TEST_CASE("tune: trace determinism and prefix-stable improvement") {
    auto objective = [](const Vector& u) {
        return std::sin(7.0 * u[0]) * std::cos(3.0 * u[0]);
    };
    const TuneResult a = tune(objective, space_1d(), 18, 4, 9);
    const TuneResult b = tune(objective, space_1d(), 18, 4, 9);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].point == b.trace[i].point);
        CHECK(a.trace[i].objective == b.trace[i].objective);
    }

    // larger budget with the same seed keeps the trace prefix, so the best
    // objective can only improve
    const TuneResult small = tune(objective, space_1d(), 10, 4, 9);
    for (std::size_t i = 0; i < small.trace.size(); ++i)
        CHECK(small.trace[i].point == a.trace[i].point);
    CHECK(a.best_objective >= small.best_objective);
}

TEST_CASE("tune: precondition budget >= init >= 2") {
    auto objective = [](const Vector& u) { return u[0]; };
    CHECK_THROWS_AS(tune(objective, space_1d(), 5, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(tune(objective, space_1d(), 3, 4, 0), std::invalid_argument);
}

TEST_CASE("trace_to_csv: layout and status column") {
    SearchSpace space;
    space.dims = {{"learning_rate", DimKind::ContinuousLog, 1e-5, 1e-2, {}}};
    std::vector<Trial> trace;
    trace.push_back({{0.5}, 0.75, true});
    trace.push_back({{0.25}, std::nan(""), false});
    const std::string csv = trace_to_csv(space, trace);
    CHECK(csv.find("iter,learning_rate,objective,status\n") == 0);
    CHECK(csv.find(",ok\n") != std::string::npos);
    CHECK(csv.find(",nan,failed\n") != std::string::npos);
}
