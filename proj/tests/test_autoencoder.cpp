#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "softprobe/autoencoder.hpp"
#include "softprobe/recovery.hpp"
#include "softprobe/toy_data.hpp"
#include "test_support.hpp"

using namespace softprobe;
using Catch::Approx;

namespace {

Image toy_image(uint64_t seed) {
  ToyDataConfig cfg;
  cfg.subjects_per_class = 1;
  cfg.images_per_subject = 1;
  cfg.seed = seed;
  return generate_toy_dataset(cfg).images.front();
}

}  // namespace

TEST_CASE("untrained autoencoder refuses to reconstruct") {
  const ConvAutoencoder ae(8, 1);
  REQUIRE_FALSE(ae.ready());
  REQUIRE_THROWS_AS(recover_autoencode(toy_image(3), ae), NotReadyError);
}

TEST_CASE("autoencoder overfits a single image") {
  const Image img = toy_image(7);
  ConvAutoencoder ae(16, 5);
  ConvAutoencoder::TrainOptions opts;
  opts.epochs = 400;
  ae.train_reconstruction({img}, opts);
  const Image rec = ae.reconstruct(img);
  REQUIRE(mean_abs_difference(rec, img) < 0.05);
}

TEST_CASE("autoencoder contracts high-frequency noise") {
  ToyDataConfig cfg;
  cfg.subjects_per_class = 6;
  cfg.images_per_subject = 4;
  cfg.seed = 77;
  const ToyDataset toy = generate_toy_dataset(cfg);
  ConvAutoencoder ae(16, 5);
  ConvAutoencoder::TrainOptions opts;
  opts.epochs = 40;
  ae.train_reconstruction(toy.images, opts);

  const Image clean = toy.images.front();
  Image noisy = clean;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> noise(-0.15f, 0.15f);
  for (float& v : noisy.data()) v += noise(rng);
  noisy.clamp01();

  const Image rec = recover_autoencode(noisy, ae);
  REQUIRE(lp_distance(rec, clean, 2.0) < lp_distance(noisy, clean, 2.0));
}

TEST_CASE("autoencoder output stays in range for extreme inputs") {
  ConvAutoencoder ae(8, 2);
  ae.train_reconstruction({toy_image(9)}, {.epochs = 5});
  for (const Image input : {testing::constant_image(32, 32, 0.0f),
                            testing::constant_image(32, 32, 1.0f)}) {
    const Image out = recover_autoencode(input, ae);
    for (float v : out.data()) {
      REQUIRE(v >= 0.0f);
      REQUIRE(v <= 1.0f);
    }
    REQUIRE(out.same_dims(input));
  }
}

TEST_CASE("autoencoder handles odd dimensions by internal padding") {
  ConvAutoencoder ae(8, 3);
  ae.train_reconstruction({toy_image(11)}, {.epochs = 5});
  const Image odd = testing::random_image(17, 23, 6);
  const Image out = ae.reconstruct(odd);
  REQUIRE(out.height() == 17);
  REQUIRE(out.width() == 23);
}

TEST_CASE("autoencoder weight round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "softprobe_ae_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "ae.spw").string();

  ConvAutoencoder ae(8, 42);
  ae.train_reconstruction({toy_image(13)}, {.epochs = 10});
  ae.save(path, "deadbeef");

  const ConvAutoencoder loaded = ConvAutoencoder::load(path);
  REQUIRE(loaded.ready());
  REQUIRE(loaded.channels() == 8);
  const Image probe = toy_image(14);
  REQUIRE(max_abs_difference(ae.reconstruct(probe), loaded.reconstruct(probe)) == 0.0);
  std::filesystem::remove_all(dir);
}
