#include <doctest.h>

#include <cmath>

#include "mre/spectral_field.hpp"
#include "test_util.hpp"

using namespace mre;
using mre::testing::field_rel_diff;
using mre::testing::random_divfree_field;

namespace {

SpectralField sin_y_field(const GridSpec& g) {
    // B = (sin y, 0)
    SpectralField B(g);
    B.at(0, Wave{0, 1, 0}) = cplx{0.0, -0.5};
    B.at(0, Wave{0, -1, 0}) = cplx{0.0, 0.5};
    return B;
}

}  // namespace

TEST_CASE("project_divfree annihilates pure gradients") {
    const GridSpec g{2, 16};
    SpectralField grad(g);
    // gradient of a random scalar: \hat g_k = i k f_k (parallel to k)
    std::mt19937 gen(7);
    std::normal_distribution<double> dist;
    for_each_slot(g, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(g, k)) return;
        const cplx f{dist(gen), dist(gen)};
        for (int c = 0; c < 2; ++c) grad.comp[c][idx] = cplx{0.0, 1.0} * static_cast<double>(k[c]) * f;
    });
    const SpectralField out = project_divfree(grad);
    CHECK(l2_norm(out) < 1e-12 * std::max(1.0, l2_norm(grad)));
}

TEST_CASE("project_divfree is idempotent and fixes divergence-free fields") {
    const GridSpec g{2, 16};
    const SpectralField B = random_divfree_field(g, 4, 11);
    CHECK(field_rel_diff(project_divfree(B), B) < 1e-14);

    const GridSpec g3{3, 8};
    const SpectralField B3 = random_divfree_field(g3, 2, 13);
    const SpectralField once = project_divfree(B3);
    CHECK(field_rel_diff(project_divfree(once), once) < 1e-14);
}

TEST_CASE("project_divfree single-mode hand example") {
    // d=2, k=(0,1), \hat g = (1,1) -> (1,0)
    const GridSpec g{2, 16};
    SpectralField raw(g);
    raw.at(0, Wave{0, 1, 0}) = 1.0;
    raw.at(1, Wave{0, 1, 0}) = 1.0;
    raw.at(0, Wave{0, -1, 0}) = 1.0;
    raw.at(1, Wave{0, -1, 0}) = 1.0;
    const SpectralField out = project_divfree(raw);
    CHECK(std::abs(out.at(0, Wave{0, 1, 0}) - cplx{1.0, 0.0}) < 1e-15);
    CHECK(std::abs(out.at(1, Wave{0, 1, 0})) < 1e-15);
}

TEST_CASE("Leray decomposition is orthogonal") {
    const GridSpec g{3, 8};
    std::mt19937 gen(3);
    std::normal_distribution<double> dist;
    SpectralField raw(g);
    for_each_slot(g, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(g, k)) return;
        for (int c = 0; c < 3; ++c) raw.comp[c][idx] = {dist(gen), dist(gen)};
    });
    // symmetrize for reality
    SpectralField sym(g);
    for_each_slot(g, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(g, k)) return;
        const std::size_t jdx = index_of_wave(g, Wave{-k[0], -k[1], -k[2]});
        for (int c = 0; c < 3; ++c)
            sym.comp[c][idx] = 0.5 * (raw.comp[c][idx] + std::conj(raw.comp[c][jdx]));
    });
    const SpectralField pi = project_divfree(sym);
    const SpectralField rest = sym - pi;
    CHECK(std::abs(l2_inner(pi, rest)) < 1e-12 * l2_norm2(sym));
}

TEST_CASE("frac_laplacian multiplier and inverse pair") {
    const GridSpec g{2, 16};
    const SpectralField B = random_divfree_field(g, 4, 17);
    CHECK(field_rel_diff(frac_laplacian(B, 0.0), B) == 0.0);

    SpectralField single(g);
    single.at(0, Wave{1, 1, 0}) = cplx{0.0, 1.0};
    single.at(0, Wave{-1, -1, 0}) = cplx{0.0, -1.0};
    const SpectralField lap = frac_laplacian(single, 1.0);
    CHECK(std::abs(lap.at(0, Wave{1, 1, 0}) - cplx{0.0, 2.0}) < 1e-15);

    CHECK(field_rel_diff(frac_laplacian(frac_laplacian(B, 0.7), -0.7), B) < 1e-12);
}

TEST_CASE("curl_inv recovers the flux function of the shear field") {
    const GridSpec g{2, 16};
    const SpectralField B = sin_y_field(g);
    const SpectralScalar phi = curl_inv_scalar(B);
    // phi = cos y
    CHECK(std::abs(phi.at(Wave{0, 1, 0}) - cplx{0.5, 0.0}) < 1e-15);
    CHECK(std::abs(phi.at(Wave{0, -1, 0}) - cplx{0.5, 0.0}) < 1e-15);
    CHECK(field_rel_diff(perp_grad(phi), B) < 1e-14);
}

TEST_CASE("curl_inv is a right inverse on random fields") {
    const GridSpec g2{2, 16};
    const SpectralField B2 = random_divfree_field(g2, 5, 23);
    CHECK(field_rel_diff(perp_grad(curl_inv_scalar(B2)), B2) < 1e-12);

    const GridSpec g3{3, 8};
    const SpectralField B3 = random_divfree_field(g3, 2, 29);
    const SpectralField A = curl_inv_field(B3);
    CHECK(field_rel_diff(curl(A), B3) < 1e-12);
    CHECK(max_relative_divergence(A) < 1e-12);

    const SpectralField zero(g3);
    CHECK(l2_norm(curl_inv_field(zero)) == 0.0);
}

TEST_CASE("sobolev norms: shear field and weights") {
    const GridSpec g{2, 16};
    const SpectralField B = sin_y_field(g);
    // ||B||^2_{L^2} = (2pi)^2 / 2
    CHECK(mre::testing::rel_diff(l2_norm2(B), 0.5 * kTwoPi * kTwoPi) < 1e-14);
    // Hdot^1 norm = 1 * L2 norm on the |k|=1 shell
    CHECK(mre::testing::rel_diff(sobolev_norm(B, 1.0), l2_norm(B)) < 1e-14);
    // inhomogeneous weight (|k|^2+1) = 2 on the shell
    CHECK(mre::testing::rel_diff(sobolev_norm2(B, 1.0, NormKind::inhomogeneous), 2.0 * l2_norm2(B)) <
          1e-14);
}

TEST_CASE("interpolation inequality on random fields") {
    const GridSpec g{2, 16};
    for (unsigned seed : {1u, 2u, 3u, 4u}) {
        const SpectralField B = random_divfree_field(g, 5, seed);
        const double m1 = 0.4, m2 = 2.2;
        const double mid = sobolev_norm(B, 0.5 * (m1 + m2), NormKind::inhomogeneous);
        const double bound = std::sqrt(sobolev_norm(B, m1, NormKind::inhomogeneous) *
                                       sobolev_norm(B, m2, NormKind::inhomogeneous));
        CHECK(mid <= bound * (1.0 + 1e-12));
    }
}

TEST_CASE("transform round trip") {
    const GridSpec g{2, 16};
    SUBCASE("zero field") {
        const SpectralField z(g);
        CHECK(l2_norm(to_spectral(to_physical(z))) == 0.0);
    }
    SUBCASE("single cosine mode is exact") {
        SpectralField B(g);
        B.at(0, Wave{2, 1, 0}) = cplx{0.5, 0.0};
        B.at(0, Wave{-2, -1, 0}) = cplx{0.5, 0.0};
        B = project_divfree(B);
        CHECK(field_rel_diff(to_spectral(to_physical(B)), B) < 1e-14);
    }
    SUBCASE("random band-limited field round-trips") {
        const SpectralField B = random_divfree_field(g, 7, 31);
        CHECK(field_rel_diff(to_spectral(to_physical(B)), B) < 1e-12);
        CHECK(reality_defect(to_spectral(to_physical(B))) < 1e-12);
    }
    SUBCASE("non-power-of-two grid") {
        const GridSpec g12{2, 12};
        const SpectralField B = random_divfree_field(g12, 3, 37);
        CHECK(field_rel_diff(to_spectral(to_physical(B)), B) < 1e-12);
    }
    SUBCASE("grid mismatch is an error") {
        PhysicalField p;
        p.grid = g;
        p.comp[0].assign(10, 0.0);
        p.comp[1].assign(10, 0.0);
        CHECK_THROWS_AS((void)to_spectral(p), std::invalid_argument);
    }
}

TEST_CASE("physical samples match analytic values") {
    const GridSpec g{2, 16};
    const SpectralField B = sin_y_field(g);
    const PhysicalField p = to_physical(B);
    for (int i0 : {0, 3, 9})
        for (int i1 : {0, 5, 12}) {
            const auto x = grid_point(g, i0, i1, 0);
            CHECK(std::abs(p.comp[0][flat_index(g, i0, i1, 0)] - std::sin(x[1])) < 1e-14);
            CHECK(std::abs(p.comp[1][flat_index(g, i0, i1, 0)]) < 1e-14);
        }
}

TEST_CASE("Parseval against physical quadrature") {
    const GridSpec g{2, 16};
    const SpectralField B = random_divfree_field(g, 5, 41);
    const PhysicalField p = to_physical(B);
    double quad = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i)
        quad += p.comp[0][i] * p.comp[0][i] + p.comp[1][i] * p.comp[1][i];
    quad *= std::pow(g.dx(), 2);
    CHECK(mre::testing::rel_diff(quad, l2_norm2(B)) < 1e-10);
}

TEST_CASE("dealias_product") {
    const GridSpec g{2, 16};  // dealias band: |k_i| <= 5
    SUBCASE("constant times b is truncated b") {
        const SpectralField B = random_divfree_field(g, 7, 43);
        const std::vector<double> ones(g.points(), 1.0);
        const PhysicalField pb = to_physical(B);
        const SpectralScalar out = dealias_product(g, ones, pb.comp[0]);
        SpectralScalar expect(g);
        expect.coef = B.comp[0];
        dealias_truncate(expect);
        double diff = 0.0;
        for (std::size_t i = 0; i < out.coef.size(); ++i)
            diff = std::max(diff, std::abs(out.coef[i] - expect.coef[i]));
        CHECK(diff < 1e-13);
    }
    SUBCASE("sin x . sin x = 1/2 - cos(2x)/2, mean dropped") {
        SpectralScalar sx(g);
        sx.at(Wave{1, 0, 0}) = cplx{0.0, -0.5};
        sx.at(Wave{-1, 0, 0}) = cplx{0.0, 0.5};
        const std::vector<double> s = to_physical(sx);
        const SpectralScalar prod = dealias_product(g, s, s);
        CHECK(std::abs(prod.at(Wave{2, 0, 0}) - cplx{-0.25, 0.0}) < 1e-14);
        CHECK(std::abs(prod.at(Wave{-2, 0, 0}) - cplx{-0.25, 0.0}) < 1e-14);
        // zero mode is excluded by the mean-zero contract
        CHECK(std::abs(prod.coef[index_of_wave(g, Wave{0, 0, 0})]) == 0.0);
    }
    SUBCASE("mode sums beyond the band are absent") {
        SpectralScalar a(g);
        a.at(Wave{3, 0, 0}) = cplx{0.5, 0.0};
        a.at(Wave{-3, 0, 0}) = cplx{0.5, 0.0};
        const std::vector<double> s = to_physical(a);
        const SpectralScalar prod = dealias_product(g, s, s);
        CHECK(std::abs(prod.at(Wave{6, 0, 0})) == 0.0);  // |k| = 6 > 5
    }
}
