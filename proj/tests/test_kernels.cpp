#include "adkit/errors.hpp"
#include "adkit/kernels.hpp"
#include "adkit/rng.hpp"

#include <doctest.h>

#include <vector>

using namespace adkit;
namespace k = adkit::kernels;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (auto& v : m.a) v = rng.gaussian();
    return m;
}

} // namespace

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
    Rng rng(31);
    for (const auto [n, m, kk] : {std::array<std::size_t, 3>{7, 5, 11},
                                  std::array<std::size_t, 3>{1, 9, 3},
                                  std::array<std::size_t, 3>{16, 16, 16},
                                  std::array<std::size_t, 3>{33, 2, 65}}) {
        const auto x = random_matrix(n, kk, rng);
        const auto y = random_matrix(m, kk, rng);
        Matrix out_p(n, m), out_s(n, m);
        k::matmul_nt(x, y, out_p);
        k::matmul_nt_serial(x, y, out_s);
        CHECK(out_p.a == out_s.a);

        const auto delta = random_matrix(n, m, rng);
        const auto act = random_matrix(n, kk, rng);
        Matrix g_p(m, kk), g_s(m, kk);
        k::grad_weights(delta, act, g_p);
        k::grad_weights_serial(delta, act, g_s);
        CHECK(g_p.a == g_s.a);

        std::vector<double> b_p(m), b_s(m);
        k::grad_bias(delta, b_p.data());
        k::grad_bias_serial(delta, b_s.data());
        CHECK(b_p == b_s);
    }
}

TEST_CASE("affine matches a hand-rolled product") {
    Rng rng(32);
    const auto w = random_matrix(4, 6, rng);
    std::vector<double> x(6), b(4), y(4);
    for (auto& v : x) v = rng.gaussian();
    for (auto& v : b) v = rng.gaussian();
    k::affine(w, x.data(), b.data(), y.data());
    for (std::size_t i = 0; i < 4; ++i) {
        double acc = b[i];
        for (std::size_t j = 0; j < 6; ++j) acc += w.at(i, j) * x[j];
        CHECK(y[i] == acc);
    }
    // null bias means zero bias
    k::affine(w, x.data(), nullptr, y.data());
    for (std::size_t i = 0; i < 4; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 6; ++j) acc += w.at(i, j) * x[j];
        CHECK(y[i] == acc);
    }
}

TEST_CASE("matvec_t matches a hand-rolled transpose product") {
    Rng rng(33);
    const auto w = random_matrix(5, 3, rng);
    std::vector<double> d(5), y(3);
    for (auto& v : d) v = rng.gaussian();
    k::matvec_t(w, d.data(), y.data());
    for (std::size_t j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < 5; ++i) acc += w.at(i, j) * d[i];
        CHECK(y[j] == doctest::Approx(acc).epsilon(1e-15));
    }
}

TEST_CASE("matmul agrees with the brute-force definition") {
    Rng rng(34);
    const auto x = random_matrix(6, 8, rng);
    const auto y = random_matrix(4, 8, rng);
    Matrix out(6, 4);
    k::matmul_nt(x, y, out);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (std::size_t kk = 0; kk < 8; ++kk) acc += x.at(i, kk) * y.at(j, kk);
            CHECK(out.at(i, j) == acc);
        }
}

TEST_CASE("shape mismatches raise dimension errors") {
    Matrix x(2, 3), y(4, 5), out(2, 4);
    CHECK_THROWS_AS(k::matmul_nt(x, y, out), DimensionError);
    Matrix delta(3, 2), act(4, 5), g(2, 5);
    CHECK_THROWS_AS(k::grad_weights(delta, act, g), DimensionError);
}
