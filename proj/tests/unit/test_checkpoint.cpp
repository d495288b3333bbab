#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "rumi/ad/checkpoint.hpp"
#include "rumi/model.hpp"
#include "test_support.hpp"

namespace rumi::testing {
namespace {

namespace fs = std::filesystem;
using ad::Checkpoint;
using ad::CheckpointError;
using ad::Tensor;

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "rumi_ckpt_test";
  fs::create_directories(dir);
  return dir;
}

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));  // host is little-endian
  out.append(buf, sizeof(T));
}

TEST(Checkpoint, ByteLayoutOfTinyStore) {
  ad::ParamStore store;
  store.add("w", Tensor::matrix(1, 2, {1.5, -2.0}), false, true);
  std::string expect = "RUMICKPT";
  put<std::uint32_t>(expect, 1);
  put<std::uint64_t>(expect, 2);
  expect += "{}";
  put<std::uint64_t>(expect, 1);
  put<std::uint32_t>(expect, 1);
  expect += "w";
  put<std::uint8_t>(expect, 2);
  put<std::uint32_t>(expect, 2);
  put<std::uint64_t>(expect, 1);
  put<std::uint64_t>(expect, 2);
  put<double>(expect, 1.5);
  put<double>(expect, -2.0);
  EXPECT_EQ(ad::encode_checkpoint(store, "{}"), expect);
}

TEST(Checkpoint, ModelRoundTripIsBitwise) {
  ad::Rng rng(71);
  ReaderModel model(toy_dims(), VariantConfig::from_id(0), random_tensor(9, 3, rng), 8, 72);
  randomize(model.params(), rng, 2.0);
  auto& first = model.params().all().front()->value;
  first[0] = -0.0;
  first[1] = std::numeric_limits<double>::denorm_min();
  first[2] = std::numeric_limits<double>::max();
  const fs::path path = temp_dir() / "model.ckpt";
  ad::save_checkpoint(path, model.params(), "meta \xe2\x9c\x93");
  EXPECT_FALSE(fs::exists(fs::path(path) += ".tmp"));

  ReaderModel other(toy_dims(), VariantConfig::from_id(0), Tensor::matrix(9, 3), 8, 999);
  const Checkpoint ckpt = ad::load_checkpoint(path);
  EXPECT_EQ(ckpt.meta, "meta \xe2\x9c\x93");
  ad::restore(other.params(), ckpt);
  auto a = model.params().all();
  auto b = other.params().all();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    EXPECT_EQ(a[i]->frozen, b[i]->frozen);
    EXPECT_TRUE(bitwise_equal(a[i]->value, b[i]->value)) << a[i]->name;
  }
  // Overwriting an existing checkpoint also leaves no temp file behind.
  ad::save_checkpoint(path, other.params(), "again");
  EXPECT_EQ(ad::load_checkpoint(path).meta, "again");
  EXPECT_FALSE(fs::exists(fs::path(path) += ".tmp"));
}

TEST(Checkpoint, CorruptOrTruncatedBytesAreRejected) {
  ad::ParamStore store;
  store.add("w", Tensor::matrix(2, 2, {1, 2, 3, 4}), false, true);
  store.add("b", Tensor::matrix(2, 1, {5, 6}));
  const std::string good = ad::encode_checkpoint(store, "m");
  EXPECT_NO_THROW(ad::decode_checkpoint(good));
  for (std::size_t n = 0; n < good.size(); ++n)
    EXPECT_THROW(ad::decode_checkpoint(good.substr(0, n)), CheckpointError) << "prefix " << n;
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(ad::decode_checkpoint(bad_magic), CheckpointError);
  std::string bad_version = good;
  bad_version[8] = 7;
  EXPECT_THROW(ad::decode_checkpoint(bad_version), CheckpointError);
  EXPECT_THROW(ad::decode_checkpoint(good + "x"), CheckpointError);

  const fs::path path = temp_dir() / "truncated.ckpt";
  {
    std::ofstream out(path, std::ios::binary);
    out << good.substr(0, good.size() / 2);
  }
  EXPECT_THROW(ad::load_checkpoint(path), CheckpointError);
  EXPECT_THROW(ad::load_checkpoint(temp_dir() / "missing.ckpt"), CheckpointError);
}

TEST(Checkpoint, RestoreRejectsMismatchAndLeavesStoreUntouched) {
  ad::ParamStore src;
  src.add("w", Tensor::matrix(2, 2, {1, 2, 3, 4}), false, true);
  src.add("b", Tensor::matrix(2, 1, {5, 6}));
  const Checkpoint ckpt = ad::decode_checkpoint(ad::encode_checkpoint(src, ""));

  ad::ParamStore shape;
  shape.add("w", Tensor::matrix(2, 3), false, true);
  shape.add("b", Tensor::matrix(2, 1, {7, 8}));
  EXPECT_THROW(ad::restore(shape, ckpt), CheckpointError);
  EXPECT_EQ(shape.at("b").value[0], 7.0);

  ad::ParamStore missing;
  missing.add("w", Tensor::matrix(2, 2), false, true);
  missing.add("other", Tensor::matrix(2, 1));
  EXPECT_THROW(ad::restore(missing, ckpt), CheckpointError);

  ad::ParamStore fewer;
  fewer.add("w", Tensor::matrix(2, 2), false, true);
  EXPECT_THROW(ad::restore(fewer, ckpt), CheckpointError);
}

}  // namespace
}  // namespace rumi::testing
