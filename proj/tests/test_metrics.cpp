#include <doctest.h>

#include <random>

#include "canon3d/canonicalize.hpp"
#include "canon3d/metrics.hpp"
#include "test_util.hpp"

using namespace canon3d;

namespace {

// O(N^2) all-pairs oracle.
double brute_chamfer(const PointCloud& x, const PointCloud& y) {
    double fwd = 0.0, bwd = 0.0;
    for (const Vec3& p : x.points) {
        double best = 1e300;
        for (const Vec3& q : y.points) best = std::min(best, (p - q).squaredNorm());
        fwd += best;
    }
    for (const Vec3& q : y.points) {
        double best = 1e300;
        for (const Vec3& p : x.points) best = std::min(best, (p - q).squaredNorm());
        bwd += best;
    }
    return fwd / x.size() + bwd / y.size();
}

}  // namespace

TEST_CASE("chamfer basics") {
    const PointCloud x = testutil::random_cloud(1, 30);
    CHECK(chamfer(x, x) == doctest::Approx(0.0).epsilon(1e-15));

    PointCloud a, b;
    a.points = {Vec3{0, 0, 0}};
    b.points = {Vec3{1, 0, 0}};
    CHECK(chamfer(a, b) == doctest::Approx(2.0).epsilon(1e-15));

    CHECK_THROWS_AS(chamfer(PointCloud{}, x), EmptyCloud);
}

TEST_CASE("chamfer matches the brute-force oracle") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const PointCloud x = testutil::random_cloud(2 * s, 50);
        const PointCloud y = testutil::random_cloud(2 * s + 1, 50);
        CHECK(std::abs(chamfer(x, y) - brute_chamfer(x, y)) < 1e-10);
    }
}

TEST_CASE("chamfer symmetry and joint SE(3) invariance") {
    const PointCloud x = testutil::random_cloud(5, 40);
    const PointCloud y = testutil::random_cloud(6, 35);
    CHECK(std::abs(chamfer(x, y) - chamfer(y, x)) < 1e-12);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const RigidTransform t = random_transform(s, 2.0);
        CHECK(std::abs(chamfer(apply_cloud(t, x), apply_cloud(t, y)) - chamfer(x, y)) < 1e-9);
    }
}

TEST_CASE("chamfer is zero iff the point sets coincide") {
    PointCloud x, y;
    x.points = {Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{1, 0, 0}};
    y.points = {Vec3{1, 0, 0}, Vec3{0, 0, 0}};
    CHECK(chamfer(x, y) == 0.0);
    y.points.push_back(Vec3{0.5, 0, 0});
    CHECK(chamfer(x, y) > 0.0);
}

TEST_CASE("temporal_consistency") {
    const PointCloud x = testutil::random_cloud(9, 20);
    const std::vector<PointCloud> constant{x, x, x};
    const ConsistencyReport r = temporal_consistency(constant);
    REQUIRE(r.pair_chamfer.size() == 2);
    CHECK(r.pair_chamfer[0] == doctest::Approx(0.0));
    CHECK(r.mean == doctest::Approx(0.0));

    const PointCloud y = testutil::random_cloud(10, 20);
    const ConsistencyReport two = temporal_consistency({x, y});
    REQUIRE(two.pair_chamfer.size() == 1);
    CHECK(two.pair_chamfer[0] == doctest::Approx(chamfer(x, y)));
    CHECK(two.mean == doctest::Approx(two.pair_chamfer[0]).epsilon(1e-12));

    CHECK_THROWS(temporal_consistency({x}));
}

TEST_CASE("equivariance_deviation clean vs noisy") {
    const EncoderParams params = init_params(20);
    const PointCloud x = testutil::random_cloud(123, 48);

    // acos of a trace within eps of 3 still yields ~sqrt(eps), so the rotation
    // bound cannot be tighter than ~1e-7 even for bit-identical frames
    const auto [r0, t0] = equivariance_deviation(params, x, RigidTransform::identity());
    CHECK(r0 < 1e-6);
    CHECK(t0 < 1e-9);

    double clean_mean = 0.0, noisy_mean = 0.0;
    for (int s = 0; s < 100; ++s) {
        const RigidTransform h = random_transform(3000 + s, 1.0);
        const auto [rc, tc] = equivariance_deviation(params, x, h);
        CHECK(rc <= 1e-6);
        CHECK(tc <= 1e-6);
        clean_mean += rc;

        // independently noised views: measure Psi(noise(HX)) vs H Psi(noise(X))
        std::mt19937_64 rng(4000 + s);
        std::normal_distribution<double> g(0.0, 0.05);
        PointCloud xa = x;
        PointCloud xb = apply_cloud(h, x);
        for (Vec3& p : xa.points)
            for (int i = 0; i < 3; ++i) p[i] += g(rng);
        for (Vec3& p : xb.points)
            for (int i = 0; i < 3; ++i) p[i] += g(rng);
        const RigidTransform fa = estimate_frame(params, xa);
        const RigidTransform fb = estimate_frame(params, xb);
        noisy_mean += rotation_geodesic(fb.rotation, compose(h, fa).rotation);
    }
    CHECK(noisy_mean / 100.0 > clean_mean / 100.0);
}
