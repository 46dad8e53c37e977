// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "dfd/error.hpp"
#include "dfd/image.hpp"
#include "support/test_helpers.hpp"

using namespace dfd;
using dfd_test::random_grid;
using dfd_test::random_image;
using dfd_test::rel_err;

TEST_SUITE_BEGIN("image_core");

TEST_CASE("validate accepts clean fields and names the first bad pixel") {
  SUBCASE("all-zero image is ok") {
    CHECK(!validate(Image(4, 4, 3)));
    CHECK(!validate(Image(4, 4, 1)));
  }
  SUBCASE("non-finite value is reported with coordinates") {
    Image img(3, 5, 1);
    img.at(1, 4, 0) = std::numeric_limits<double>::quiet_NaN();
    const auto bad = validate(img);
    REQUIRE(bad.has_value());
    CHECK(bad->find("x=4") != std::string::npos);
    CHECK(bad->find("y=1") != std::string::npos);
  }
  SUBCASE("out-of-range intensity is a violation") {
    Image img(2, 2, 1);
    img.at(0, 1, 0) = 1.5;
    CHECK(validate(img).has_value());
  }
  SUBCASE("depth outside the camera range is a violation") {
    DepthMap depth(2, 2, 5.0);
    depth.at(1, 0) = 11.0;
    const auto bad = validate(depth, 0.1, 10.0);
    REQUIRE(bad.has_value());
    CHECK(bad->find("x=0") != std::string::npos);
  }
  SUBCASE("negative sigma is a violation") {
    DefocusMap sigma(2, 2, 1.0);
    sigma.at(0, 0) = -0.25;
    CHECK(validate(sigma).has_value());
  }
  SUBCASE("stack checks size, monotone distances and slice shapes") {
    FocalStack stack;
    stack.images = {Image(2, 2, 1)};
    stack.focus_distances = {1.0};
    CHECK(validate(stack).has_value());  // K < 2

    stack.images = {Image(2, 2, 1), Image(2, 2, 1)};
    stack.focus_distances = {1.0, 1.0};
    CHECK(validate(stack).has_value());  // not strictly increasing

    stack.focus_distances = {1.0, 2.0};
    CHECK(!validate(stack));

    stack.images[1] = Image(2, 3, 1);
    CHECK(validate(stack).has_value());  // shape mismatch
  }
}

TEST_CASE("spatial_gradients") {
  SUBCASE("constant field has zero gradients") {
    const GradientPair g = spatial_gradients(Grid(4, 4, 3.25));
    for (double v : g.dx.data) CHECK(v == 0.0);
    for (double v : g.dy.data) CHECK(v == 0.0);
  }
  SUBCASE("horizontal ramp has constant dx and zero dy") {
    Grid ramp(3, 5);
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 5; ++x) ramp.at(y, x) = 0.75 * x;
    const GradientPair g = spatial_gradients(ramp);
    for (int y = 0; y < 3; ++y) {
      for (int x = 0; x < 4; ++x) CHECK(g.dx.at(y, x) == doctest::Approx(0.75));
      CHECK(g.dx.at(y, 4) == 0.0);  // trailing column
    }
    for (double v : g.dy.data) CHECK(v == 0.0);
  }
  SUBCASE("random field matches the brute-force difference table") {
    const Grid field = random_grid(4, 4, -2.0, 2.0, 5);
    const GradientPair g = spatial_gradients(field);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        const double dx = x + 1 < 4 ? field.at(y, x + 1) - field.at(y, x) : 0.0;
        const double dy = y + 1 < 4 ? field.at(y + 1, x) - field.at(y, x) : 0.0;
        CHECK(g.dx.at(y, x) == dx);
        CHECK(g.dy.at(y, x) == dy);
      }
  }
  SUBCASE("linearity on random fields") {
    const Grid a = random_grid(5, 6, -1.0, 1.0, 6);
    const Grid b = random_grid(5, 6, -1.0, 1.0, 7);
    Grid sum(5, 6);
    for (std::size_t i = 0; i < sum.data.size(); ++i)
      sum.data[i] = a.data[i] + b.data[i];
    const GradientPair ga = spatial_gradients(a);
    const GradientPair gb = spatial_gradients(b);
    const GradientPair gs = spatial_gradients(sum);
    for (std::size_t i = 0; i < sum.data.size(); ++i) {
      CHECK(gs.dx.data[i] == doctest::Approx(ga.dx.data[i] + gb.dx.data[i]).epsilon(1e-12));
      CHECK(gs.dy.data[i] == doctest::Approx(ga.dy.data[i] + gb.dy.data[i]).epsilon(1e-12));
    }
  }
  SUBCASE("degenerate one-pixel dimension is a shape error") {
    CHECK_THROWS_AS(spatial_gradients(Grid(1, 5)), ShapeError);
    CHECK_THROWS_AS(spatial_gradients(Grid(5, 1)), ShapeError);
  }
}

TEST_CASE("laplacian") {
  SUBCASE("constant image maps to zero") {
    const Grid lap = laplacian(Image(4, 4, 3, 0.6));
    for (double v : lap.data) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("single bright center pixel reproduces the stencil") {
    Grid field(5, 5, 0.0);
    field.at(2, 2) = 0.8;
    const Grid lap = laplacian(field);
    CHECK(lap.at(2, 2) == doctest::Approx(4.0 * 0.8));
    CHECK(lap.at(1, 2) == doctest::Approx(-0.8));
    CHECK(lap.at(3, 2) == doctest::Approx(-0.8));
    CHECK(lap.at(2, 1) == doctest::Approx(-0.8));
    CHECK(lap.at(2, 3) == doctest::Approx(-0.8));
    CHECK(lap.at(1, 1) == 0.0);
  }
  SUBCASE("random field matches the brute-force stencil with replicate padding") {
    const Grid field = random_grid(6, 6, -1.0, 1.0, 9);
    const Grid lap = laplacian(field);
    auto clamp = [](int v, int hi) { return std::max(0, std::min(v, hi)); };
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) {
        const double expected = 4.0 * field.at(y, x) -
                                field.at(clamp(y - 1, 5), x) -
                                field.at(clamp(y + 1, 5), x) -
                                field.at(y, clamp(x - 1, 5)) -
                                field.at(y, clamp(x + 1, 5));
        CHECK(lap.at(y, x) == doctest::Approx(expected).epsilon(1e-14));
      }
  }
  SUBCASE("affine ramps are annihilated in the interior") {
    Grid ramp(6, 7);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 7; ++x) ramp.at(y, x) = 0.3 * x - 0.2 * y + 0.05;
    const Grid lap = laplacian(ramp);
    for (int y = 1; y < 5; ++y)
      for (int x = 1; x < 6; ++x)
        CHECK(lap.at(y, x) == doctest::Approx(0.0).epsilon(1e-13));
  }
  SUBCASE("adjoint satisfies the dot-product identity") {
    const Grid a = random_grid(7, 7, -1.0, 1.0, 12);
    const Grid b = random_grid(7, 7, -1.0, 1.0, 13);
    const Grid la = laplacian(a);
    const Grid ltb = laplacian_adjoint(b);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      lhs += la.data[i] * b.data[i];
      rhs += a.data[i] * ltb.data[i];
    }
    CHECK(rel_err(lhs, rhs) < 1e-12);
  }
  SUBCASE("too-small image is a shape error") {
    CHECK_THROWS_AS(laplacian(Grid(2, 5)), ShapeError);
  }
}

TEST_CASE("box_sum matches brute force") {
  const Grid field = random_grid(6, 5, 0.0, 1.0, 15);
  const Grid sum = box_sum(field, 2);
  auto clamp = [](int v, int hi) { return std::max(0, std::min(v, hi)); };
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 5; ++x) {
      double expected = 0.0;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx)
          expected += field.at(clamp(y + dy, 5), clamp(x + dx, 4));
      CHECK(sum.at(y, x) == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("channel helpers") {
  const Image img = random_image(3, 4, 3, 0.0, 1.0, 17);
  const Grid mean = channel_mean(img);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x)
      CHECK(mean.at(y, x) ==
            doctest::Approx((img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / 3.0));
  const Grid plane = channel_plane(img, 1);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) CHECK(plane.at(y, x) == img.at(y, x, 1));
  CHECK_THROWS_AS(channel_plane(img, 3), std::out_of_range);
}

TEST_SUITE_END();
