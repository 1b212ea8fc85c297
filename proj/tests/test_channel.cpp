#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include <Eigen/SVD>

#include "risloc/channel.hpp"

using namespace risloc;
using namespace risloc::channel;

namespace
{

// Direct per-entry evaluation of the ULA response.
CVector ula_oracle(Index n, double angle)
{
    CVector v(n);
    for (Index k = 0; k < n; ++k)
    {
        v(k) = std::exp(kJ * (kPi * static_cast<double>(k) * std::sin(angle))) /
               std::sqrt(static_cast<double>(n));
    }
    return v;
}

Complex random_gain(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    return {re, n(rng)};
}

CMatrix random_matrix(std::mt19937_64& rng, Index r, Index c)
{
    CMatrix m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) m(i, j) = random_gain(rng);
    return m;
}

CMatrix random_phases(std::mt19937_64& rng, Index r, Index c)
{
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    CMatrix m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) m(i, j) = std::polar(1.0, u(rng));
    return m;
}

} // namespace

TEST_CASE("ula response examples")
{
    const CVector a = ula_response({4}, 0.0);
    for (Index k = 0; k < 4; ++k) CHECK(std::abs(a(k) - Complex(0.5, 0.0)) < 1e-15);

    const CVector one = ula_response({1}, 1.234);
    CHECK(one.size() == 1);
    CHECK(std::abs(one(0) - Complex(1.0, 0.0)) < 1e-15);

    const CVector b = ula_response({4}, kPi / 6);
    const Complex expect[4] = {{0.5, 0}, {0, 0.5}, {-0.5, 0}, {0, -0.5}};
    for (Index k = 0; k < 4; ++k) CHECK(std::abs(b(k) - expect[k]) < 1e-12);
}

TEST_CASE("steering derivative matches finite differences")
{
    const double f = 0.37;
    const double h = 1e-6;
    const CVector fd = (steering(12, f + h) - steering(12, f - h)) / (2.0 * h);
    CHECK((fd - steering_derivative(12, f)).norm() < 1e-7);
}

TEST_CASE("bs-ris channel examples")
{
    CHECK(bs_ris_channel({0, 0}, 0.3, 0.4, {4}, {8}).norm() == 0.0);

    const CMatrix s = bs_ris_channel({1, 0}, 0.7, 1.1, {1}, {1});
    CHECK(std::abs(s(0, 0) - Complex(1, 0)) < 1e-15);

    const CMatrix ones = bs_ris_channel({1, 0}, 0.0, 0.0, {2}, {2});
    CHECK((ones - CMatrix::Ones(2, 2)).norm() < 1e-14);

    const Complex rho{0.3, -1.2};
    const CMatrix h = bs_ris_channel(rho, 0.4, 2.0, {16}, {64});
    CHECK(h.norm() == doctest::Approx(std::sqrt(16.0 * 64.0) * std::abs(rho)));
    Eigen::JacobiSVD<CMatrix> svd(h);
    CHECK(svd.singularValues()(1) < 1e-10 * svd.singularValues()(0));
}

TEST_CASE("ris-ms channel equals the explicit sum of outer products")
{
    std::mt19937_64 rng(5);
    MultipathChannel ch{{{random_gain(rng), 0.5, 2.1}, {random_gain(rng), 1.3, 0.9}}, {32}, {8}};
    CMatrix oracle = CMatrix::Zero(8, 32);
    for (const auto& p : ch.paths)
    {
        oracle += std::sqrt(32.0 * 8.0) * p.gain * ula_oracle(8, p.aoa) * ula_oracle(32, p.aod).adjoint();
    }
    CHECK((ris_ms_channel(ch) - oracle).norm() < 1e-12);

    Eigen::JacobiSVD<CMatrix> svd(oracle);
    const RVector sv = svd.singularValues();
    CHECK(sv(1) > 1e-6 * sv(0));
    CHECK(sv(2) < 1e-10 * sv(0));
}

TEST_CASE("ris-ms channel single path and zero gain")
{
    MultipathChannel zero{{{{0, 0}, 0.5, 0.5}}, {16}, {8}};
    CHECK(ris_ms_channel(zero).norm() == 0.0);

    const Complex rho{0.8, 0.6};
    MultipathChannel one{{{rho, 0.5, 1.9}}, {16}, {8}};
    CHECK(ris_ms_channel(one).norm() == doctest::Approx(std::sqrt(16.0 * 8.0) * std::abs(rho)));
}

TEST_CASE("effective frequency difference")
{
    CHECK(effective_frequency_diff(0.8, 0.8) == doctest::Approx(0.0));
    CHECK(effective_frequency_diff(std::asin(-0.5), std::asin(0.9)) == doctest::Approx(-0.6));
    CHECK(effective_frequency_diff(std::asin(0.5), std::asin(0.3)) == doctest::Approx(-0.2));
}

TEST_CASE("property: hadamard identity of RIS steering vectors")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ang(0.0, kPi);
    const Index n = 64;
    for (int i = 0; i < 100; ++i)
    {
        const double theta = ang(rng);
        const double phi = ang(rng);
        const CVector lhs = ula_response({n}, theta).conjugate().cwiseProduct(ula_response({n}, phi));
        const CVector rhs = steering(n, effective_frequency_diff(theta, phi)) / std::sqrt(static_cast<double>(n));
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("property: matrix and hadamard observation forms agree")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ang(0.0, kPi);
    for (int trial = 0; trial < 50; ++trial)
    {
        const Index nb = 16, nr = 64, nm = 16, p = 4, t = 16;
        const double theta_br = ang(rng);
        const double phi_br = ang(rng);
        const Complex rho_br = random_gain(rng);
        MultipathChannel ch{{{random_gain(rng), ang(rng), ang(rng)}}, {nr}, {nm}};
        if (trial % 2 == 1) ch.paths.push_back({random_gain(rng), ang(rng), ang(rng)});
        TrainingSetup setup{ula_response({nb}, theta_br), random_matrix(rng, nm, p), random_phases(rng, nr, t),
                            0.0};
        const CMatrix h_br = bs_ris_channel(rho_br, theta_br, phi_br, {nb}, {nr});
        const CMatrix h_rm = ris_ms_channel(ch);
        const CMatrix y7 = noiseless_observation(setup, h_br, h_rm);
        const CMatrix y8 = noiseless_observation_hadamard(setup, rho_br, phi_br, nb, h_rm);
        CHECK((y7 - y8).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("single-path observation has the factored form")
{
    std::mt19937_64 rng(23);
    const Index nb = 16, nr = 64, nm = 16, p = 4, t = 16;
    const Complex rho_br = random_gain(rng);
    const Complex rho = random_gain(rng);
    const double theta_br = 0.7, phi_br = kPi - 0.7;
    const double theta = 0.4, phi = 2.3;
    MultipathChannel ch{{{rho, theta, phi}}, {nr}, {nm}};
    const CMatrix w = random_matrix(rng, nm, p);
    const CMatrix om = random_phases(rng, nr, t);
    TrainingSetup setup{ula_response({nb}, theta_br), w, om, 0.0};
    const CMatrix y = training_observation(setup, bs_ris_channel(rho_br, theta_br, phi_br, {nb}, {nr}),
                                           ris_ms_channel(ch), 1);

    const Complex xi = static_cast<double>(nr) * std::sqrt(static_cast<double>(nb * nm)) * rho_br * rho;
    const CVector left = w.adjoint() * ula_response({nm}, phi);
    const CVector right = om.transpose() * steering(nr, effective_frequency_diff(theta, phi_br));
    // steering() is unit norm, so the RIS factor carries 1/sqrt(N_R)
    const CMatrix factored = xi / std::sqrt(static_cast<double>(nr)) * left * right.transpose();
    CHECK((y - factored).cwiseAbs().maxCoeff() < 1e-10 * factored.cwiseAbs().maxCoeff());
}

TEST_CASE("fully aligned beams reach the product array gain")
{
    const Index nb = 16, nr = 64, nm = 16;
    const Complex rho_br{0.6, -0.2}, rho{-0.4, 0.9};
    const double theta_br = 1.0, phi_br = kPi - 1.0, theta = 0.6, phi = 2.0;
    MultipathChannel ch{{{rho, theta, phi}}, {nr}, {nm}};
    const double fd = effective_frequency_diff(theta, phi_br);
    CMatrix om(nr, 1);
    for (Index n = 0; n < nr; ++n) om(n, 0) = std::exp(-kJ * (kPi * static_cast<double>(n) * fd));
    TrainingSetup setup{ula_response({nb}, theta_br), ula_response({nm}, phi), om, 0.0};
    const CMatrix y = training_observation(setup, bs_ris_channel(rho_br, theta_br, phi_br, {nb}, {nr}),
                                           ris_ms_channel(ch), 3);
    CHECK(std::abs(y(0, 0)) ==
          doctest::Approx(static_cast<double>(nr) * std::sqrt(static_cast<double>(nb * nm)) *
                          std::abs(rho_br * rho)));
}

TEST_CASE("training observation edge cases")
{
    std::mt19937_64 rng(29);
    TrainingSetup setup{ula_response({4}, 0.3), random_matrix(rng, 8, 2), random_phases(rng, 16, 3), 0.0};
    const CMatrix y = training_observation(setup, CMatrix::Zero(16, 4), CMatrix::Zero(8, 16), 7);
    CHECK(y.rows() == 2);
    CHECK(y.cols() == 3);
    CHECK(y.norm() == 0.0);

    CHECK_THROWS_AS(training_observation(setup, CMatrix::Zero(15, 4), CMatrix::Zero(8, 16), 7),
                    std::invalid_argument);
    CHECK_THROWS_AS(training_observation(setup, CMatrix::Zero(16, 4), CMatrix::Zero(7, 16), 7),
                    std::invalid_argument);
}

TEST_CASE("property: noise determinism and statistics")
{
    std::mt19937_64 rng(31);
    TrainingSetup setup{ula_response({4}, 0.3), random_matrix(rng, 8, 3), random_phases(rng, 16, 5), 2.5};
    const CMatrix h_br = bs_ris_channel({1, 0}, 0.3, kPi - 0.3, {4}, {16});
    MultipathChannel ch{{{{0.5, 0.5}, 0.4, 1.7}}, {16}, {8}};
    const CMatrix h_rm = ris_ms_channel(ch);
    const CMatrix a = training_observation(setup, h_br, h_rm, 99);
    const CMatrix b = training_observation(setup, h_br, h_rm, 99);
    const CMatrix c = training_observation(setup, h_br, h_rm, 100);
    CHECK((a - b).norm() == 0.0);
    CHECK((a - c).norm() > 0.0);

    const CMatrix z = complex_gaussian(200, 200, 2.5, 4);
    const double var = z.squaredNorm() / static_cast<double>(z.size());
    CHECK(var == doctest::Approx(2.5).epsilon(0.02));
    CHECK(std::abs(z.mean()) < 0.02);
}

TEST_CASE("property: noiseless observation is linear in each gain")
{
    std::mt19937_64 rng(37);
    TrainingSetup setup{ula_response({8}, 0.9), random_matrix(rng, 8, 3), random_phases(rng, 32, 4), 0.0};
    const Complex a{0.3, 0.7}, b{-1.1, 0.2}, c{2.0, -0.5};
    auto obs = [&](Complex rho_br, Complex r1, Complex r2) {
        MultipathChannel ch{{{r1, 0.4, 1.3}, {r2, 1.9, 0.6}}, {32}, {8}};
        return noiseless_observation(setup, bs_ris_channel(rho_br, 0.9, kPi - 0.9, {8}, {32}), ris_ms_channel(ch));
    };
    CHECK((obs(c * a, b, b) - c * obs(a, b, b)).norm() < 1e-10);
    CHECK((obs(a, b + c, a) - obs(a, b, a) - obs(a, c, 0)).norm() < 1e-10);
    CHECK((obs(a, a, b + c) - obs(a, a, b) - obs(a, 0, c)).norm() < 1e-10);
}
