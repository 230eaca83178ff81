#include <sstream>

#include "doctest.h"
#include "relsem/checkpoint.hpp"
#include "relsem/errors.hpp"
#include "relsem/nn.hpp"
#include "relsem/rng.hpp"

using relsem::Tensor;
namespace nn = relsem::nn;
namespace ckpt = relsem::ckpt;

namespace {

nn::ParamMap sample_params(uint64_t seed) {
  relsem::Rng rng(seed);
  nn::ParamMap pm;
  pm.add("layer.w", Tensor::randn_trunc({3, 4}, 0.02, rng, true));
  pm.add("layer.b", Tensor::zeros({1, 4}));
  pm.add("emb", Tensor::randn_trunc({5, 2}, 0.02, rng, true));
  return pm;
}

}  // namespace

TEST_CASE("manifest round-trip restores every value bitwise") {
  nn::ParamMap pm = sample_params(7);
  std::stringstream ss;
  ckpt::write_manifest(ss, pm);

  nn::ParamMap fresh = sample_params(99);  // different values, same shapes
  ckpt::load_into(fresh, ckpt::read_manifest(ss));
  for (const auto& [name, t] : pm.items()) {
    CHECK(fresh.at(name).values() == t.values());
  }
}

TEST_CASE("manifest rejects corruption and mismatches") {
  nn::ParamMap pm = sample_params(8);
  std::stringstream ss;
  ckpt::write_manifest(ss, pm);
  std::string blob = ss.str();

  SUBCASE("bad magic") {
    std::string bad = blob;
    bad[0] = 'X';
    std::stringstream in(bad);
    CHECK_THROWS_AS(ckpt::read_manifest(in), relsem::CheckpointError);
  }
  SUBCASE("truncated stream") {
    std::stringstream in(blob.substr(0, blob.size() / 2));
    CHECK_THROWS_AS(ckpt::read_manifest(in), relsem::CheckpointError);
  }
  SUBCASE("unknown parameter name") {
    std::stringstream in(blob);
    auto entries = ckpt::read_manifest(in);
    nn::ParamMap other;
    other.add("different", Tensor::zeros({3, 4}));
    CHECK_THROWS_AS(ckpt::load_into(other, entries), relsem::CheckpointError);
  }
  SUBCASE("shape mismatch") {
    std::stringstream in(blob);
    auto entries = ckpt::read_manifest(in);
    relsem::Rng rng(1);
    nn::ParamMap other;
    other.add("layer.w", Tensor::zeros({4, 3}));
    other.add("layer.b", Tensor::zeros({1, 4}));
    other.add("emb", Tensor::zeros({5, 2}));
    CHECK_THROWS_AS(ckpt::load_into(other, entries), relsem::CheckpointError);
  }
  SUBCASE("missing parameter: archive lacks a param the map has") {
    std::stringstream in(blob);
    auto entries = ckpt::read_manifest(in);
    entries.pop_back();
    nn::ParamMap target = sample_params(8);
    CHECK_THROWS_AS(ckpt::load_into(target, entries), relsem::CheckpointError);
  }
}
