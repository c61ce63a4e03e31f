#include "oracles.hpp"
#include "pnpsteric/errors.hpp"
#include "pnpsteric/excess_current.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace pnpsteric;
using oracle::quad;

namespace {

// c1, c2 on a branch in quad precision
std::pair<quad, quad> pair_conc(quad s, quad g, quad z, bool a) {
    quad r = oracle::c_diff_A(s, g, z);
    quad big = (s + r) / 2;
    quad small = 2 * expq(-(g + z) * s) / (s + r);
    return a ? std::pair{big, small} : std::pair{small, big};
}

// Species sum z_i D_i (dc_i/dphi + z_i c_i) with valences -q, +q, by quad differences in Sigma.
double species_sum_oracle(double sigma, double g, double z, double q, bool a, double d1, double d2) {
    quad s = sigma, h = quad(1e-14);
    auto phi = [&](quad t) { return a ? oracle::phi_A(t, g, z, q) : oracle::phi_B(t, g, z, q); };
    quad dphi = (phi(s + h) - phi(s - h)) / (2 * h);
    auto [p1, p2] = pair_conc(s + h, g, z, a);
    auto [m1, m2] = pair_conc(s - h, g, z, a);
    auto [c1, c2] = pair_conc(s, g, z, a);
    quad dc1 = (p1 - m1) / (2 * h) / dphi;
    quad dc2 = (p2 - m2) / (2 * h) / dphi;
    quad qq = q;
    quad out = -qq * d1 * (dc1 - qq * c1) + qq * d2 * (dc2 + qq * c2);
    return double(out);
}

const ThreeSpeciesModel& three() {
    static ThreeSpeciesModel m({TwoSpeciesParams(1, 20), 1.0, 0.5});
    return m;
}

const FourSpeciesModel& four() {
    static FourSpeciesModel m({TwoSpeciesParams(1, 25, 1), TwoSpeciesParams(1, 25, 2), -0.3});
    return m;
}

BvpSolution three_solution(std::size_t n) {
    RhsFunction f = three().assemble(Branch::A);
    double c = *f.root();
    return solve({1e-2, f, {c + 0.3, c - 0.2, 0.0}, n});
}

BvpSolution four_solution(Branch b, std::size_t n) {
    RhsFunction f = four().assemble(b);
    double c = *f.root();
    return solve({1e-2, f, {c + 0.25, c + 0.02, 0.01}, n});
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

} // namespace

TEST_CASE("diffusion set validation") {
    auto check = [](std::vector<double> d, double e) { DiffusionSet{std::move(d), e}.validate(3); };
    CHECK_NOTHROW(check({1, 2, 3}, 1.0));
    CHECK_THROWS_AS(check({1, 2}, 1.0), DomainError);
    CHECK_THROWS_AS(check({1, 0, 3}, 1.0), DomainError);
    CHECK_THROWS_AS(check({1, 2, 3}, 0.0), DomainError);
}

TEST_CASE("grid derivative is exact on quadratics") {
    std::vector<double> x(11), y(11);
    for (int i = 0; i <= 10; ++i) {
        x[i] = -1.0 + 0.2 * i;
        y[i] = 3.0 * x[i] * x[i] - x[i] + 2.0;
    }
    auto d = grid_derivative(x, y);
    for (int i = 0; i <= 10; ++i) CHECK(d[i] == doctest::Approx(6.0 * x[i] - 1.0).epsilon(1e-12));
}

TEST_CASE("piecewise quadratic reproduces quadratics and is additive") {
    for (int n : {9, 10}) {
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = -1.0 + 2.0 * i / (n - 1);
            y[i] = x[i] * x[i] - 0.5 * x[i];
        }
        PiecewiseQuadratic pq(x, y);
        auto F = [](double t) { return t * t * t / 3.0 - 0.25 * t * t; };
        CHECK(pq(0.123) == doctest::Approx(0.123 * 0.123 - 0.5 * 0.123).epsilon(1e-13));
        CHECK(pq.integral(-0.9, 0.77) == doctest::Approx(F(0.77) - F(-0.9)).epsilon(1e-13));
        CHECK(std::fabs(pq.integral(-0.9, 0.1) + pq.integral(0.1, 0.77) - pq.integral(-0.9, 0.77)) < 1e-14);
        CHECK(pq.integral(0.3, 0.3) == 0.0);
    }
    CHECK_THROWS_AS(PiecewiseQuadratic({0.0, 1.0}, {0.0, 1.0}), DomainError);
}

TEST_CASE("pair current density against the species sum") {
    for (double q : {1.0, 2.0}) {
        TwoSpeciesParams p(1, 20, q);
        double sc = sigma_c(p);
        for (double s : {sc * 1.1, sc * 2.0, 3.0}) {
            for (Branch b : {Branch::A, Branch::B}) {
                double ref = species_sum_oracle(s, 1, 20, q, b == Branch::A, 1.0, 2.0);
                double got = q * pair_current_density(s, p, b, 1.0, 2.0);
                CHECK(std::fabs(got - ref) < 1e-9 * std::max(1.0, std::fabs(ref)));
            }
        }
    }
}

TEST_CASE("equal diffusion constants remove the skew terms") {
    TwoSpeciesParams p(1, 20);
    for (double s : {0.5, 1.5}) {
        double a = pair_current_density(s, p, Branch::A, 1.5, 1.5);
        double b = pair_current_density(s, p, Branch::B, 1.5, 1.5);
        CHECK(a == doctest::Approx(b).epsilon(1e-14));
        CHECK(a == doctest::Approx(1.5 * pair_current_density(s, p, Branch::A, 1.0, 1.0)).epsilon(1e-14));
    }
}

TEST_CASE("sigma integrand equals density times dphi/dsigma") {
    for (double q : {1.0, 2.0}) {
        TwoSpeciesParams p(0.5, 15, q);
        for (double s : {0.3, 0.9, 4.0}) {
            if (s <= sigma_z(p)) continue;
            for (Branch b : {Branch::A, Branch::B}) {
                double lhs = pair_sigma_integrand(s, p, b, 1.0, 3.0);
                double rhs = pair_current_density(s, p, b, 1.0, 3.0) * dphi_dsigma(s, p, b);
                CHECK(std::fabs(lhs - rhs) < 1e-11 * std::max(1.0, std::fabs(rhs)));
            }
        }
    }
}

TEST_CASE("constant solution carries no current") {
    RhsFunction f = three().assemble(Branch::A);
    double c = *f.root();
    BvpSolution s = solve({1e-2, f, {c, c, 0.0}, 201});
    DiffusionSet d{{1, 2, 1}, 1.0};
    CurrentReport rep = current_report(s, three(), d, Branch::A, -0.5, 0.5);
    CHECK(max_abs(rep.pointwise.current) == 0.0);
    CHECK(rep.integral_x == 0.0);
    CHECK(rep.integral_sigma == 0.0);
}

TEST_CASE("window bounds") {
    BvpSolution s = three_solution(401);
    DiffusionSet d{{1, 2, 1}, 1.0};
    CurrentProfile cp = pointwise_current_three(s, three(), d, Branch::A);
    CHECK(integral_current_x(cp, 0.2, 0.2) == 0.0);
    CHECK(integral_current_sigma_three(s, three(), d, Branch::A, 0.2, 0.2) == 0.0);
    CHECK_THROWS_AS(integral_current_x(cp, 0.3, 0.2), BoundsError);
    CHECK_THROWS_AS(integral_current_x(cp, -1.0, 0.2), BoundsError);
    CHECK_THROWS_AS(integral_current_sigma_three(s, three(), d, Branch::A, 0.0, 1.0), BoundsError);
    CHECK_THROWS_AS(integral_current_x(cp, NAN, 0.2), BoundsError);
}

TEST_CASE("three-species dual route agreement improves with the grid") {
    DiffusionSet d{{1, 2, 1}, 1.0};
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    std::vector<std::pair<double, double>> windows;
    for (int i = 0; i < 5; ++i) {
        double a = u(rng), b = u(rng);
        windows.push_back({std::min(a, b), std::max(a, b)});
    }
    std::vector<double> prev(windows.size(), 1e300);
    for (std::size_t n : {2001, 4001}) {
        BvpSolution s = three_solution(n);
        CurrentProfile cp = pointwise_current_three(s, three(), d, Branch::A);
        for (std::size_t w = 0; w < windows.size(); ++w) {
            auto [x1, x2] = windows[w];
            double xr = integral_current_x(cp, x1, x2);
            double sr = integral_current_sigma_three(s, three(), d, Branch::A, x1, x2);
            double diff = std::fabs(xr - sr);
            CHECK(diff <= std::max(1e-6, 1e-4 * std::fabs(sr)));
            CHECK(diff <= prev[w]);
            prev[w] = diff;
        }
    }
}

TEST_CASE("four-species dual route agreement") {
    DiffusionSet d{{1, 2, 1.5, 0.5}, 1.0};
    for (Branch b : {Branch::A, Branch::B}) {
        BvpSolution s = four_solution(b, 4001);
        auto r = integral_current_four(s, four(), d, b, -0.7, 0.4);
        CHECK(std::fabs(r.sigma_route - r.x_route) <= std::max(1e-6, 1e-4 * std::fabs(r.sigma_route)));
        CHECK(std::fabs(r.sigma_route) > 1e-3);
        CurrentReport rep = current_report(s, four(), d, b, -0.7, 0.4);
        CHECK(rep.integral_sigma == r.sigma_route);
        CHECK(rep.integral_x == r.x_route);
    }
}

TEST_CASE("four-species equal pair-34 diffusion constants") {
    TwoSpeciesParams p(1, 25, 2);
    double s = 2.0;
    double a = pair_current_density(s, p, Branch::B, 0.7, 0.7);
    double b = pair_current_density(s, p, Branch::A, 0.7, 0.7);
    CHECK(a == doctest::Approx(b).epsilon(1e-14));
    CHECK(pair_current_density(s, p, Branch::B, 0.7, 1.1) !=
          doctest::Approx(pair_current_density(s, p, Branch::A, 0.7, 1.1)));
}

TEST_CASE("species-sum current matches the branch formula") {
    DiffusionSet d{{1, 2, 1}, 1.0};
    BvpSolution s = three_solution(8001);
    CurrentProfile cp = pointwise_current_three(s, three(), d, Branch::A);
    std::vector<std::vector<double>> conc(3, std::vector<double>(s.values.size()));
    for (std::size_t j = 0; j < s.values.size(); ++j) {
        auto c = three().concentrations(s.values[j], Branch::A);
        for (int i = 0; i < 3; ++i) conc[i][j] = c[i];
    }
    GenericCurrent gc = generic_current(s.nodes, s.values, conc,
                                        three_species_system(three().config()), d);
    CHECK(gc.max_algebraic_residual < 1e-10);
    double m = 0.0;
    for (std::size_t j = cp.first_accurate; j <= cp.last_accurate; ++j)
        m = std::max(m, std::fabs(gc.total[j] - cp.current[j]));
    CHECK(m < 1e-6);
    CHECK(max_abs(gc.per_species[2]) < 1e-10);
}

TEST_CASE("species-sum current for four species") {
    DiffusionSet d{{1, 2, 1.5, 0.5}, 1.0};
    BvpSolution s = four_solution(Branch::A, 8001);
    CurrentProfile cp = pointwise_current_four(s, four(), d, Branch::A);
    std::vector<std::vector<double>> conc(4, std::vector<double>(s.values.size()));
    for (std::size_t j = 0; j < s.values.size(); ++j) {
        auto c = four().concentrations(s.values[j], Branch::A);
        for (int i = 0; i < 4; ++i) conc[i][j] = c[i];
    }
    GenericCurrent gc = generic_current(s.nodes, s.values, conc,
                                        four_species_system(four().config()), d);
    double m = 0.0, scale = 0.0;
    for (std::size_t j = cp.first_accurate; j <= cp.last_accurate; ++j) {
        m = std::max(m, std::fabs(gc.total[j] - cp.current[j]));
        scale = std::max(scale, std::fabs(cp.current[j]));
    }
    CHECK(m < 1e-5 * std::max(1.0, scale));
}

TEST_CASE("species-sum current rejects inconsistent data") {
    std::vector<double> x{-1, -0.5, 0, 0.5, 1}, phi(5, 0.0);
    SpeciesSystem sys{{-1, 1}, {{0, 0}, {0, 0}}};
    DiffusionSet d{{1, 1}, 1.0};
    std::vector<std::vector<double>> ok(2, std::vector<double>(5, 1.0));
    GenericCurrent g = generic_current(x, phi, ok, sys, d);
    CHECK(max_abs(g.total) == 0.0);
    auto bad = ok;
    bad[0][2] = 2.0;
    CHECK_THROWS_AS(generic_current(x, phi, bad, sys, d), ConsistencyError);
    bad[0][2] = -1.0;
    CHECK_THROWS_AS(generic_current(x, phi, bad, sys, d), ConsistencyError);
    CHECK_THROWS_AS(generic_current(x, phi, {ok[0]}, sys, d), DomainError);
}

TEST_CASE("profiles off the segment are rejected") {
    const BranchCurves& bc = three().curves();
    double pac = bc.phi_Ac();
    BvpSolution s;
    s.nodes = {-1, -0.5, 0, 0.5, 1};
    s.values = {-pac - 0.1, -pac + 0.1, 0.0, 0.1, 0.2};
    s.epsilon = 1e-2;
    DiffusionSet d{{1, 2, 1}, 1.0};
    CHECK_THROWS_AS(pointwise_current_three(s, three(), d, Branch::A), BranchMismatchError);
}

TEST_CASE("endpoint at the turning point is flagged") {
    double pac = three().curves().phi_Ac();
    BvpSolution s;
    for (int i = 0; i <= 8; ++i) {
        double x = -1.0 + 0.25 * i;
        s.nodes.push_back(x);
        s.values.push_back(-pac + (x + 0.5) * (x + 0.5));
    }
    s.epsilon = 1e-2;
    DiffusionSet d{{1, 2, 1}, 1.0};
    std::vector<std::string> warnings;
    double v = integral_current_sigma_three(s, three(), d, Branch::A, -0.5, 0.5, &warnings);
    CHECK(std::isfinite(v));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("EndpointSingularityWarning") == 0);
}
