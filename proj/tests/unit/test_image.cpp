#include <doctest.h>

#include "qsel/error.hpp"
#include "qsel/image.hpp"
#include "test_support.hpp"

using namespace qsel;

TEST_CASE("zero shift is the identity") {
  Image img = make_image(4, 5, {0.2F, 0.5F, 0.9F});
  img.at(1, 2, 0) = 0.0F;
  CHECK(apply_channel_shift(img, {0.0F, 0.0F, 0.0F}) == img);
}

TEST_CASE("shift clamps to [0, 1]") {
  const Image white = make_image(3, 3, {1.0F, 1.0F, 1.0F});
  const auto shifted = apply_channel_shift(white, {0.05F, 0.1F, 0.01F});
  for (float v : shifted.pixels) CHECK(v == 1.0F);

  const Image black = make_image(2, 2, {0.0F, 0.0F, 0.0F});
  for (float v : apply_channel_shift(black, {-0.1F, -0.05F, -0.01F}).pixels) CHECK(v == 0.0F);
}

TEST_CASE("shift is per channel and leaves the input alone") {
  const Image img = make_image(2, 3, {0.5F, 0.5F, 0.5F});
  const Image copy = img;
  const auto out = apply_channel_shift(img, {0.1F, -0.1F, 0.0F});
  CHECK(img == copy);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(out.at(r, c, 0) == doctest::Approx(0.6));
      CHECK(out.at(r, c, 1) == doctest::Approx(0.4));
      CHECK(out.at(r, c, 2) == 0.5F);
    }
  }
}

TEST_CASE("rgb_shift draws within the limit, is seeded, and stays in range") {
  Image img = make_image(8, 8, {0.0F, 0.5F, 1.0F});
  img.at(3, 3, 1) = 0.95F;
  Rng a(42);
  Rng b(42);
  const auto x = rgb_shift(img, a);
  const auto y = rgb_shift(img, b);
  CHECK(x == y);

  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto s = draw_channel_shift(rng);
    for (float v : s) {
      CHECK(v >= -0.1F);
      CHECK(v <= 0.1F);
    }
    for (float v : apply_channel_shift(img, s).pixels) {
      CHECK(v >= 0.0F);
      CHECK(v <= 1.0F);
    }
  }
}

TEST_CASE("malformed images are rejected") {
  Image bad{2, 2, std::vector<float>(5)};
  Rng rng(1);
  CHECK_THROWS_AS(rgb_shift(bad, rng), ImageError);
  CHECK_THROWS_AS(rgb_shift(Image{}, rng), ImageError);
}

TEST_CASE("PNG save, load and encode") {
  test::TempDir dir;
  Image img = make_image(4, 6, {0.0F, 0.0F, 0.0F});
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      img.at(r, c, 0) = static_cast<float>(r * 40) / 255.0F;
      img.at(r, c, 1) = static_cast<float>(c * 30) / 255.0F;
      img.at(r, c, 2) = 1.0F;
    }
  }
  save_png(img, dir / "a.png");
  const auto loaded = load_image(dir / "a.png");
  REQUIRE(loaded.height == 4);
  REQUIRE(loaded.width == 6);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    CHECK(loaded.pixels[i] == doctest::Approx(img.pixels[i]).epsilon(1e-6));
  }
  CHECK(encode_png(img) == encode_png(loaded));
  CHECK_THROWS_AS(load_image(dir / "missing.png"), ImageError);
}

TEST_CASE("base64") {
  auto enc = [](std::string s) {
    std::vector<std::uint8_t> b(s.begin(), s.end());
    return base64_encode(b);
  };
  CHECK(enc("") == "");
  CHECK(enc("f") == "Zg==");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("foo") == "Zm9v");
  CHECK(enc("foobar") == "Zm9vYmFy");
}

TEST_CASE("Rng streams are reproducible and in range") {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
  CHECK(derive_seed(1, 1) != derive_seed(1, 2));
  CHECK(derive_seed(1, 1) == derive_seed(1, 1));
}
