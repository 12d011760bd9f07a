#include "core/geom.hpp"

#include <cmath>

#include "core/config.hpp"
#include "core/rng.hpp"
#include "doctest.h"

using namespace dsk;

namespace {
constexpr double kPi = 3.14159265358979323846;

Pose yaw_pose(double yaw, Vec3 pos = {}) { return {pos, Quat::from_rpy(0, 0, yaw)}; }

Rng make_rng(uint64_t seed) { return Rng(seed); }

Pose random_pose(Rng& rng) {
  return {{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)},
          Quat::from_rpy(rng.uniform(-kPi, kPi), rng.uniform(-1.2, 1.2), rng.uniform(-kPi, kPi))};
}
}  // namespace

TEST_SUITE("geom.pose") {
  TEST_CASE("identity composition") {
    Pose id = Pose::identity();
    Pose c = compose(id, id);
    CHECK(c.position.norm() == doctest::Approx(0));
    CHECK(quat_angle(c.orientation, Quat::identity()) == doctest::Approx(0));
  }

  TEST_CASE("identity is neutral") {
    Rng rng = make_rng(7);
    for (int i = 0; i < 20; ++i) {
      Pose p = random_pose(rng);
      Pose left = compose(Pose::identity(), p);
      CHECK(distance(left.position, p.position) < 1e-12);
      CHECK(quat_angle(left.orientation, p.orientation) < 1e-9);
    }
  }

  TEST_CASE("two quarter yaws make a half turn") {
    Pose q90 = yaw_pose(kPi / 2);
    Pose q180 = compose(q90, q90);
    CHECK(q180.position.norm() == doctest::Approx(0));
    CHECK(quat_angle(q180.orientation, Quat::from_rpy(0, 0, kPi)) == doctest::Approx(0).epsilon(1e-9));
  }

  TEST_CASE("composition is associative") {
    Rng rng = make_rng(11);
    for (int i = 0; i < 50; ++i) {
      Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
      Pose left = compose(compose(a, b), c);
      Pose right = compose(a, compose(b, c));
      CHECK(distance(left.position, right.position) < 1e-9);
      CHECK(quat_angle(left.orientation, right.orientation) < 1e-9);
    }
  }

  TEST_CASE("quaternions stay normalized through composition chains") {
    Rng rng = make_rng(13);
    Pose acc = Pose::identity();
    for (int i = 0; i < 300; ++i) {
      acc = compose(acc, random_pose(rng));
      CHECK(std::abs(acc.orientation.norm() - 1.0) < 1e-9);
    }
  }

  TEST_CASE("pose_error on identical poses") {
    Rng rng = make_rng(3);
    Pose p = random_pose(rng);
    PoseError e = pose_error(p, p);
    CHECK(e.pos == doctest::Approx(0));
    CHECK(e.rot == doctest::Approx(0));
    CHECK(e.combined == doctest::Approx(0));
  }

  TEST_CASE("pure yaw error") {
    Pose a = yaw_pose(0), b = yaw_pose(kPi / 2);
    PoseError e = pose_error(a, b);
    CHECK(e.rot == doctest::Approx(kPi / 2).epsilon(1e-9));
    CHECK(e.combined == doctest::Approx(0.05 * kPi).epsilon(1e-9));
  }

  TEST_CASE("position-only error against the headline threshold") {
    Pose a{{0, 0, 0}, Quat::identity()};
    Pose b{{0.03, 0, 0}, Quat::identity()};
    PoseError e = pose_error(a, b);
    CHECK(e.combined == doctest::Approx(0.03));
    CHECK(e.combined < 0.05);
  }

  TEST_CASE("pose_error is symmetric") {
    Rng rng = make_rng(17);
    for (int i = 0; i < 50; ++i) {
      Pose a = random_pose(rng), b = random_pose(rng);
      PoseError ab = pose_error(a, b), ba = pose_error(b, a);
      CHECK(std::abs(ab.pos - ba.pos) < 1e-9);
      CHECK(std::abs(ab.rot - ba.rot) < 1e-9);
      CHECK(std::abs(ab.combined - ba.combined) < 1e-9);
    }
  }

  TEST_CASE("rpy round trip") {
    Rng rng = make_rng(23);
    for (int i = 0; i < 50; ++i) {
      double r = rng.uniform(-1.4, 1.4), p = rng.uniform(-1.4, 1.4), y = rng.uniform(-kPi, kPi);
      Quat q = Quat::from_rpy(r, p, y);
      Vec3 back = rpy_of(q);
      Quat q2 = Quat::from_rpy(back.x, back.y, back.z);
      CHECK(quat_angle(q, q2) < 1e-9);
    }
  }
}

TEST_SUITE("geom.collide") {
  TEST_CASE("distant spheres miss") {
    auto c = collide(Shape::sphere(1), {{0, 0, 0}, {}}, Shape::sphere(1), {{3, 0, 0}, {}});
    CHECK(!c.has_value());
  }

  TEST_CASE("concentric spheres overlap fully") {
    auto c = collide(Shape::sphere(1), {{0, 0, 0}, {}}, Shape::sphere(1), {{0, 0, 0}, {}});
    REQUIRE(c.has_value());
    CHECK(c->depth == doctest::Approx(2.0));
  }

  TEST_CASE("box-sphere grazing depth") {
    auto c = collide(Shape::box(0.1, 0.1, 0.1), {{0, 0, 0}, {}}, Shape::sphere(0.05),
                     {{0.12, 0, 0}, {}});
    REQUIRE(c.has_value());
    CHECK(c->depth == doctest::Approx(0.03).epsilon(1e-9));
    CHECK(c->normal.x == doctest::Approx(1.0));
  }

  TEST_CASE("symmetry: presence and depth match under swap") {
    Rng rng = make_rng(31);
    auto random_shape = [&](Rng& r) {
      switch (r.uniform_int(0, 2)) {
        case 0: return Shape::box(r.uniform(0.02, 0.1), r.uniform(0.02, 0.1), r.uniform(0.02, 0.1));
        case 1: return Shape::disc(r.uniform(0.02, 0.1), r.uniform(0.02, 0.15));
        default: return Shape::sphere(r.uniform(0.02, 0.1));
      }
    };
    int overlaps = 0;
    for (int i = 0; i < 300; ++i) {
      Shape sa = random_shape(rng), sb = random_shape(rng);
      Pose pa = random_pose(rng), pb = random_pose(rng);
      pa.position = pa.position * 0.12;
      pb.position = pb.position * 0.12;
      auto ab = collide(sa, pa, sb, pb);
      auto ba = collide(sb, pb, sa, pa);
      CHECK(ab.has_value() == ba.has_value());
      if (ab && ba) {
        ++overlaps;
        CHECK(std::abs(ab->depth - ba->depth) < 1e-6);
        CHECK((ab->normal + ba->normal).norm() < 1e-9);
      }
    }
    CHECK(overlaps > 20);  // the generator must actually exercise overlap
  }

  TEST_CASE("stacked boxes touch with a vertical normal") {
    Shape cube = Shape::box(0.03, 0.03, 0.03);
    auto c = collide(cube, {{0, 0, 0.03}, {}}, cube, {{0, 0, 0.09}, {}});
    REQUIRE(c.has_value());
    CHECK(c->depth == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(c->normal.z) == doctest::Approx(1.0));
  }

  TEST_CASE("upright disc pair") {
    Shape d = Shape::disc(0.05, 0.04);
    auto c = collide(d, {{0, 0, 0.02}, {}}, d, {{0.08, 0, 0.02}, {}});
    REQUIRE(c.has_value());
    CHECK(c->depth == doctest::Approx(0.02));
    auto none = collide(d, {{0, 0, 0.02}, {}}, d, {{0.11, 0, 0.02}, {}});
    CHECK(!none.has_value());
  }
}

TEST_SUITE("geom.project") {
  Camera test_cam() {
    Camera cam;
    cam.window_center = {0, 0};
    cam.window_w = cam.window_h = 1.2;
    cam.res_w = cam.res_h = 256;
    return cam;
  }

  TEST_CASE("window center maps to the frame center") {
    auto px = project(test_cam(), {0, 0, 0.3});
    REQUIRE(px.has_value());
    CHECK(px->x == doctest::Approx(128));
    CHECK(px->y == doctest::Approx(128));
  }

  TEST_CASE("point outside the window is out of frame") {
    CHECK(!project(test_cam(), {0.7, 0, 0}).has_value());
    CHECK(!project(test_cam(), {0, -0.61, 0}).has_value());
  }

  TEST_CASE("known linear mapping") {
    auto px = project(test_cam(), {0.3, 0, 0});
    REQUIRE(px.has_value());
    CHECK(px->x == doctest::Approx(192));
  }

  TEST_CASE("affine: midpoints map to pixel midpoints") {
    Rng rng = make_rng(41);
    Camera cam = test_cam();
    for (int i = 0; i < 100; ++i) {
      Vec3 a{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0};
      Vec3 b{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0};
      Vec3 mid = (a + b) * 0.5;
      auto pa = project(cam, a), pb = project(cam, b), pm = project(cam, mid);
      if (!pa || !pb || !pm) continue;
      CHECK(std::abs((pa->x + pb->x) / 2 - pm->x) < 1.0);
      CHECK(std::abs((pa->y + pb->y) / 2 - pm->y) < 1.0);
    }
  }
}

TEST_SUITE("geom.footprint") {
  TEST_CASE("identical coaxial footprints overlap fully") {
    Shape cube = Shape::box(0.05, 0.05, 0.05);
    Pose p{{0.2, 0.1, 0.05}, Quat::identity()};
    CHECK(footprint_overlap(cube, p, cube, p) == doctest::Approx(1.0));
  }

  TEST_CASE("disjoint footprints do not overlap") {
    Shape cube = Shape::box(0.05, 0.05, 0.05);
    CHECK(footprint_overlap(cube, {{0, 0, 0}, {}}, cube, {{0.2, 0, 0}, {}}) ==
          doctest::Approx(0.0));
  }

  TEST_CASE("quarter-area tile arithmetic") {
    Shape small = Shape::box(0.05, 0.05, 0.01);
    Shape big = Shape::box(0.1, 0.1, 0.01);
    Pose at_origin{{0, 0, 0.01}, Quat::identity()};
    CHECK(footprint_overlap(small, at_origin, big, at_origin) == doctest::Approx(1.0));
    CHECK(footprint_overlap(big, at_origin, small, at_origin) ==
          doctest::Approx(0.25).epsilon(0.01));
  }

  TEST_CASE("growing the base never shrinks the fraction") {
    Rng rng = make_rng(53);
    for (int i = 0; i < 25; ++i) {
      Shape top = Shape::box(rng.uniform(0.02, 0.05), rng.uniform(0.02, 0.05), 0.01);
      Pose tp{{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 0.01},
              Quat::from_rpy(0, 0, rng.uniform(-kPi, kPi))};
      double r = rng.uniform(0.01, 0.04);
      Pose bp{{rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03), 0.01}, Quat::identity()};
      double prev = 0;
      for (int g = 0; g < 5; ++g) {
        double frac = footprint_overlap(top, tp, Shape::disc(r + 0.02 * g, 0.02), bp);
        CHECK(frac >= prev - 1e-12);
        prev = frac;
      }
    }
  }
}
