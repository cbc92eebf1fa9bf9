#include "critjac/levinson.hpp"
#include "critjac/pipeline.hpp"
#include "critjac/system_spec.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace critjac;
using critjac::testing::random_mat2;

namespace mp = boost::multiprecision;

namespace {

double d(const Real& x) { return to_double(x); }

SystemSpec simple(RealSampler p, MatSampler r, Index start) {
    SystemSpec s;
    s.name = "simple";
    s.p = std::move(p);
    s.V = [](Index) { return Mat2::diag(-1, 0); };
    s.R = std::move(r);
    s.start_index = start;
    return s;
}

RealSampler inverse_shifted() {
    return [](Index n) { return Real(1) / Real(n + 1); };
}

RealSampler inverse_sqrt() {
    return [](Index n) { return 1 / mp::sqrt(Real(n)); };
}

MatSampler zero_r() {
    return [](Index) { return Mat2::zero(); };
}

MatSampler ones_over_square() {
    return [](Index n) {
        Complex c = Real(1) / (Real(n) * n);
        return Mat2{c, c, c, c};
    };
}

}  // namespace

TEST_SUITE("levinson") {

TEST_CASE("eigen ordering and eigenvector normalization") {
    PrecisionScope scope(PrecisionContext(50));
    auto e = eigen(Mat2::diag(-1, 0));
    CHECK(e.mu1 == Complex(-1));
    CHECK(e.mu2 == Complex(0));
    CHECK(e.x1 == Vec2{1, 0});
    CHECK(e.x2 == Vec2{0, 1});

    auto s = eigen(Mat2{0, 1, 1, 0});
    const Real r = 1 / mp::sqrt(Real(2));
    CHECK(abs(e.mu1 + Complex(1)) == 0);
    CHECK(abs(s.mu1 + Complex(1)) < precision_tolerance(5));
    CHECK(abs(s.mu2 - Complex(1)) < precision_tolerance(5));
    CHECK(norm(s.x1 - Vec2{Complex(r), Complex(-r)}) < precision_tolerance(5));
    CHECK(norm(s.x2 - Vec2{Complex(r), Complex(r)}) < precision_tolerance(5));

    // elliptic tie on the real part broken by the imaginary part
    auto rot = eigen(Mat2{0, 1, -1, 0});
    CHECK(abs(rot.mu1 - Complex(0, -1)) < precision_tolerance(5));
    CHECK(abs(rot.mu2 - Complex(0, 1)) < precision_tolerance(5));
    CHECK(rot.x1[0].imag() == 0);
    CHECK(rot.x1[0].real() > 0);

    CHECK_THROWS_AS(eigen(Mat2{1, 1, 0, 1}), LevinsonError);
}

TEST_CASE("constant V diagonalizes trivially") {
    PrecisionScope scope(PrecisionContext(50));
    auto dz = d1_diagonalize([](Index) { return Mat2::diag(-1, 0); }, 1, 1000);
    CHECK(dz.threshold == 1);
    for (Index n : {1, 10, 999}) {
        CHECK(dz.T(n) == Mat2::identity());
        CHECK(dz.mu1(n) == Complex(-1));
        CHECK(dz.mu2(n) == Complex(0));
    }
    CHECK(dz.variation_sums.back() == 0);
    CHECK(dz.limit_gap == 0);
}

TEST_CASE("perturbed diagonal: eigenvector variation is summable") {
    PrecisionScope scope(PrecisionContext(50));
    MatSampler v = [](Index n) {
        Complex e = Real(1) / (Real(n) * n);
        return Mat2{-1, e, e, 0};
    };
    auto dz = d1_diagonalize(v, 2, 10000);
    Real tail = variation_tail(dz, 1000, 10000);
    // first-order eigenvector shift is n^{-2}, so the tail telescopes to ~1000^{-2} - 10000^{-2}
    CHECK(d(tail) < 1e-3);
    CHECK(d(tail) == doctest::Approx(1e-6 - 1e-8).epsilon(0.05));
    for (std::size_t i = 1; i < dz.variation_sums.size(); ++i)
        CHECK(dz.variation_sums[i] >= dz.variation_sums[i - 1]);

    for (Index n = 2; n < 400; ++n) {
        Mat2 t = dz.T(n);
        Mat2 back = t * Mat2::diag(dz.mu1(n), dz.mu2(n)) * inverse(t);
        CHECK(norm(back - v(n)) < precision_tolerance(10));
        // continuity: labels never swap
        CHECK(d(abs(dz.mu1(n + 1) - dz.mu1(n))) <= 2 * d(norm(v(n + 1) - v(n))));
    }
}

TEST_CASE("diagonalization identity for random convergent sequences") {
    PrecisionScope scope(PrecisionContext(60));
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        Mat2 base = random_mat2(rng, false);
        Mat2 wobble = random_mat2(rng, false);
        if (abs(discriminant(base)) < Real("0.05")) continue;
        MatSampler v = [base, wobble](Index n) { return base + Complex(Real(1) / (Real(n) * n)) * wobble; };
        Diagonalization dz;
        try {
            dz = d1_diagonalize(v, 1, 400);
        } catch (const LevinsonError&) {
            continue;
        }
        for (Index n = dz.threshold; n <= 400; n += 13) {
            Mat2 t = dz.T(n);
            Mat2 back = t * Mat2::diag(dz.mu1(n), dz.mu2(n)) * inverse(t);
            CHECK(norm(back - v(n)) < precision_tolerance(10) * std::max(Real(1), norm(v(n))));
        }
    }
}

TEST_CASE("larger solution without perturbation is exactly e2") {
    PrecisionScope scope(PrecisionContext(50));
    auto spec = simple(inverse_shifted(), zero_r(), 1);
    auto sol = larger_solution(spec, 2000);
    CHECK(sol.retries == 0);
    for (const auto& v : sol.trace.values) CHECK(v == Vec2{0, 1});
    CHECK(sol.drift == 0);
}

TEST_CASE("seed e1 telescopes to an exact rational") {
    PrecisionScope scope(PrecisionContext(50));
    auto spec = simple(inverse_shifted(), zero_r(), 1);
    const Index n0 = 5;
    auto t = vop_solve(spec, Vec2{1, 0}, n0, 3000);
    for (Index n : {5, 6, 100, 3000}) {
        // prod_{k=n0}^{n-1} k/(k+1) = n0/n
        CHECK(abs(t.at(n)[0] - Complex(Real(n0) / n)) < precision_tolerance(5));
        CHECK(t.at(n)[1] == Complex(0));
    }
}

TEST_CASE("perturbed larger solution converges and matches direct iteration") {
    PrecisionScope scope(PrecisionContext(50));
    auto spec = simple(inverse_sqrt(), ones_over_square(), 20);
    auto sol = larger_solution(spec, 10000);
    CHECK(sol.n0 == 20);
    const Vec2& lim = sol.trace.at(10000);
    const Real second = lim[1].real();
    CHECK(second > Real("0.9"));
    CHECK(second < Real("1.1"));
    CHECK(d(norm(sol.trace.at(10000) - sol.trace.at(5000))) < 1e-3);
    CHECK(sol.drift < 1e-3);

    MatSampler step = [&](Index n) { return spec.step(n); };
    Vec2 direct = chrono_product(step, 20, 9999) * Vec2{0, 1};
    CHECK(d(norm(direct - lim)) < 1e-3);
    CHECK(norm(direct - lim) < precision_tolerance(15));

    // fixed-point consistency, step by step
    for (Index n = 20; n < 10000; n += 7) {
        Vec2 next = spec.step(n) * sol.trace.at(n);
        CHECK(norm(next - sol.trace.at(n + 1)) < precision_tolerance(15));
    }
}

TEST_CASE("n0 retry doubles the start index") {
    PrecisionScope scope(PrecisionContext(50));
    // R pushes the second component through zero for small n
    MatSampler r = [](Index n) {
        Complex c = n < 8 ? Complex(-1) : Complex(0);
        return Mat2{0, 0, 0, c};
    };
    auto spec = simple(inverse_shifted(), r, 1);
    auto sol = larger_solution(spec, 1000);
    CHECK(sol.retries > 0);
    CHECK(sol.n0 >= 8);
    CHECK_FALSE(sol.notes.empty());
    CHECK(sol.limit == Vec2{0, 1});
}

TEST_CASE("boundedness certificate") {
    PrecisionScope scope(PrecisionContext(50));
    auto none = boundedness_certificate(simple(inverse_sqrt(), zero_r(), 1), 1000);
    CHECK(none.bound == 1);
    CHECK(none.start == 2);  // p_1 = 1 is excluded

    MatSampler r = [](Index n) { return Mat2::diag(Complex(Real(1) / (Real(n) * n)), 0); };
    auto spec = simple(inverse_sqrt(), r, 1);
    auto cert = boundedness_certificate(spec, 100000);
    const double e_bound = std::exp(M_PI * M_PI / 6);
    CHECK(d(cert.bound) <= e_bound);
    CHECK(e_bound == doctest::Approx(5.1810).epsilon(1e-4));
    // prod_{n>=2} (1 + n^{-2}) = sinh(pi) / (2 pi)
    CHECK(d(cert.bound) == doctest::Approx(std::sinh(M_PI) / (2 * M_PI)).epsilon(1e-4));

    std::mt19937_64 rng(5);
    MatSampler rr = [](Index n) {
        Complex c = Real(1) / (Real(n) * n);
        return Mat2{c, Complex(-1) * c, c, c};
    };
    auto rspec = simple(inverse_sqrt(), rr, 2);
    auto rcert = boundedness_certificate(rspec, 3000);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 20; ++i) {
        Vec2 x{Complex(Real(u(rng)), Real(u(rng))), Complex(Real(u(rng)))};
        const Real start = norm(x);
        for (Index n = 2; n < 3000; ++n) {
            x = rspec.step(n) * x;
            if (n % 50 == 0) CHECK(norm(x) <= rcert.bound * start);
        }
    }
}

TEST_CASE("elliptic smoke test") {
    PrecisionScope scope(PrecisionContext(50));
    SystemSpec s;
    s.p = inverse_sqrt();
    s.V = [](Index) { return Mat2{0, 1, -1, 0}; };
    s.R = zero_r();
    s.start_index = 2;
    auto basis = asymptotic_basis(s, 10000);
    CHECK(basis.smaller.method == "forward recursion");
    CHECK(basis.smaller.norm_ratio_drift < 0.01);
    CHECK(basis.larger.norm_ratio_drift < 0.01);
    CHECK(basis.smaller.tail_residual < 1e-30);
    CHECK(basis.larger.tail_residual < 1e-30);
    // |prod (1 + i p_k)|^2 = prod (1 + p_k^2): direct product oracle
    Real direct = 1;
    for (Index k = 2; k < 10000; ++k) direct *= 1 + Real(1) / k;
    CHECK(d(abs(basis.scalar_product_2(10000)) / mp::sqrt(direct)) == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("hyperbolic decoupled system has the exact basis") {
    PrecisionScope scope(PrecisionContext(50));
    auto spec = simple(inverse_shifted(), zero_r(), 1);
    auto basis = asymptotic_basis(spec, 2000);
    CHECK(basis.smaller.method == "backward recursion");
    CHECK(basis.smaller.tail_residual == 0);
    CHECK(basis.larger.tail_residual == 0);
    CHECK(basis.larger.normalized_end == Vec2{0, 1});
    CHECK(basis.smaller.norm_ratio_drift < 1e-40);
    // prod_{k=1}^{n-1} (1 - 1/(k+1)) = 1/n
    CHECK(abs(basis.scalar_product_1(2000) - Complex(Real(1) / 2000)) < precision_tolerance(5));
    CHECK(basis.scalar_product_2(2000) == Complex(1));
    CHECK(basis.diagnostics.warnings.empty());
}

TEST_CASE("diagnostics flag a summable p") {
    PrecisionScope scope(PrecisionContext(50));
    auto spec = simple([](Index n) { return Real(1) / (Real(n) * n); }, zero_r(), 2);
    auto basis = asymptotic_basis(spec, 1000);
    REQUIRE_FALSE(basis.diagnostics.warnings.empty());
    CHECK(basis.diagnostics.warnings.front() == "sum of p_n may converge");
}

TEST_CASE("L-stage of the hyperbolic model") {
    ModelParams p0("0.8", "1", "1");
    const Index n_max = 1000;
    PrecisionScope scope(PrecisionContext(required_digits(p0, 2 * n_max + 1)));
    ModelParams p = p0.rebound();
    auto a = ansatz(p);
    auto spec = paper_l_stage(p);
    CHECK(spec.start_index == 2);
    CHECK(spec.p(10) > 0);
    CHECK(spec.p(10) < 1);

    auto basis = asymptotic_basis(spec, n_max);
    INFO("larger residual " << basis.larger.tail_residual << " smaller " << basis.smaller.tail_residual);
    CHECK(basis.larger.direction == Vec2{0, 1});
    CHECK(basis.smaller.direction == Vec2{1, 0});
    CHECK(basis.larger.tail_residual < 0.05);
    CHECK(basis.smaller.tail_residual < 0.05);
    // prod (1 - p_k) = exp(2A(n0^delta - n^delta)) telescopes
    const Real want = mp::exp(2 * a.A * (mp::pow(Real(2), a.delta) - mp::pow(Real(n_max), a.delta)));
    CHECK(d(abs(basis.scalar_product_1(n_max) - Complex(want)) / want) < 1e-40);
    CHECK(d(abs(basis.larger.normalized_end[1])) > 0.5);
}

TEST_CASE("JSON system specs") {
    PrecisionScope scope(PrecisionContext(50));
    auto doc = nlohmann::json::parse(R"({
        "name": "perturbed",
        "start_index": 2,
        "p": {"family": "power", "c": 1, "e": "-0.5"},
        "V": {"family": "constant", "matrix": [[-1, 0], [0, 0]]},
        "R": {"family": "power", "matrix": [[1, 1], [1, 1]], "e": -2}
    })");
    auto spec = system_spec_from_json(doc);
    auto ref = simple(inverse_sqrt(), ones_over_square(), 2);
    CHECK(spec.name == "perturbed");
    CHECK(spec.start_index == 2);
    for (Index n : {2, 3, 50}) {
        CHECK(abs(Complex(spec.p(n) - ref.p(n))) < precision_tolerance(5));
        CHECK(norm(spec.R(n) - ref.R(n)) < precision_tolerance(5));
        CHECK(spec.V(n) == Mat2::diag(-1, 0));
    }

    auto mixed = system_spec_from_json(nlohmann::json::parse(R"({
        "p": {"family": "table", "from": 1, "values": [0.5, "0.25"], "then": {"family": "power", "e": -1, "shift": 1}},
        "V": {"family": "sum", "terms": [
            {"family": "constant", "matrix": [[-1, 0], [0, 0]]},
            {"family": "matrix-of-powers", "entries": [[0, {"family": "power", "e": -2}], [{"family": "power", "e": -2}, 0]]}
        ]},
        "R": {"family": "constant", "matrix": [[0, [0, 1]], [0, 0]]}
    })"));
    CHECK(mixed.p(1) == Real("0.5"));
    CHECK(mixed.p(2) == Real("0.25"));
    CHECK(abs(Complex(mixed.p(3) - Real(1) / 4)) < precision_tolerance(5));
    CHECK(abs(mixed.V(10)(0, 1) - Complex(Real(1) / 100)) < precision_tolerance(5));
    CHECK(mixed.R(7)(0, 1) == Complex(0, 1));

    CHECK_THROWS_WITH_AS(system_spec_from_json(nlohmann::json::parse(R"({"p": 1, "V": {"family": "bogus"}, "R": {"family": "zero"}})")),
                         "V: unknown family 'bogus'", SpecError);
    CHECK_THROWS_AS(system_spec_from_json(nlohmann::json::parse(R"({"p": 1, "V": {"family": "zero"}})")), SpecError);
    CHECK_THROWS_AS(system_spec_from_json(nlohmann::json::parse(R"({"builtin": "nope"})")), SpecError);

    const std::string path = (std::filesystem::temp_directory_path() / "levinson_malformed.json").string();
    {
        std::ofstream out(path);
        out << "{\n  \"p\": 1,\n  \"V\": [\n";
    }
    try {
        load_system_spec(path);
        FAIL("expected a parse error");
    } catch (const SpecError& e) {
        const std::string what = e.what();
        CHECK(what.find("line") != std::string::npos);
        CHECK(what.find("byte") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("zero perturbation spec from JSON reports the exact basis") {
    PrecisionScope scope(PrecisionContext(50));
    auto spec = system_spec_from_json(nlohmann::json::parse(R"({
        "start_index": 1,
        "p": {"family": "power", "e": -1, "shift": 1},
        "V": {"family": "constant", "matrix": [[-1, 0], [0, 0]]},
        "R": {"family": "zero"}
    })"));
    auto basis = asymptotic_basis(spec, 500);
    CHECK(basis.larger.tail_residual == 0);
    CHECK(basis.smaller.tail_residual == 0);
}

}
