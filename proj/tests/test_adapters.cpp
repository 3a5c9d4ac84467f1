// Copyright 2026 The a2asr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include "a2/adapters.hpp"
#include "a2/error.hpp"
#include "a2/gradcheck.hpp"
#include "test_util.hpp"

using namespace a2;
using test::RandomTensor;

TEST_CASE("fresh adapter is an exact identity") {
  Rng rng(1);
  Adapter a = Adapter::Init(8, 3, rng);
  Tensor h = RandomTensor({4, 8}, rng);
  Tensor out = a.Forward(h);
  CHECK(out.data() == h.data());  // W_u = 0 at init
}

TEST_CASE("zero down-projection also keeps the identity") {
  Rng rng(2);
  Adapter a = Adapter::Init(8, 3, rng);
  a.down.w = Tensor::Zeros({8, 3}).WithGrad();
  a.down.b = Tensor::Zeros({3}).WithGrad();
  a.up.w = RandomTensor({3, 8}, rng).WithGrad();  // nonzero up, zero bias
  Tensor h = RandomTensor({2, 8}, rng);
  CHECK(a.Forward(h).data() == h.data());
}

TEST_CASE("adapter matches the step-by-step composition") {
  Rng rng(3);
  Adapter a = Adapter::Init(6, 2, rng);
  a.up.w = RandomTensor({2, 6}, rng, 0.5).WithGrad();
  a.up.b = RandomTensor({6}, rng, 0.1).WithGrad();
  a.ln.gamma = RandomTensor({6}, rng).WithGrad();
  a.ln.beta = RandomTensor({6}, rng).WithGrad();
  Tensor h = RandomTensor({3, 6}, rng);

  Tensor manual = Add(
      AddRowBroadcast(
          MatMul(Relu(AddRowBroadcast(
                     MatMul(LayerNorm(h, a.ln.gamma, a.ln.beta), a.down.w), a.down.b)),
                 a.up.w),
          a.up.b),
      h);
  CHECK(test::MaxAbsDiff(a.Forward(h), manual) < 1e-14);
}

TEST_CASE("adapter rejects a bottleneck as wide as the model") {
  Rng rng(4);
  CHECK_THROWS_AS(Adapter::Init(8, 8, rng), ConfigError);
}

TEST_CASE("dual bank: zero-init pair is the identity") {
  Rng rng(5);
  auto grouping = AdapterGrouping::Individual({"en", "fr"});
  DualAdapterBank bank = DualAdapterBank::Init(grouping, 8, 3, /*use_common=*/true, rng);
  Tensor h = RandomTensor({4, 8}, rng);
  CHECK(bank.Forward(h, "en").data() == h.data());
}

TEST_CASE("dual bank: common zero, language adapter active") {
  Rng rng(6);
  auto grouping = AdapterGrouping::Individual({"en", "fr"});
  DualAdapterBank bank = DualAdapterBank::Init(grouping, 8, 3, true, rng);
  bank.lang_adapters.at("en").up.w = RandomTensor({3, 8}, rng, 0.5).WithGrad();
  Tensor h = RandomTensor({4, 8}, rng);
  Tensor expected = bank.lang_adapters.at("en").Forward(h);
  CHECK(test::MaxAbsDiff(bank.Forward(h, "en"), expected) < 1e-14);
}

TEST_CASE("literal residual form carries h twice") {
  Rng rng(7);
  auto grouping = AdapterGrouping::Individual({"en"});
  DualAdapterBank bank = DualAdapterBank::Init(grouping, 6, 2, true, rng);
  bank.lang_adapters.at("en").up.w = RandomTensor({2, 6}, rng).WithGrad();
  bank.common->up.w = RandomTensor({2, 6}, rng).WithGrad();
  Tensor h = RandomTensor({3, 6}, rng);
  Tensor single = bank.Forward(h, "en");
  bank.literal_residual = true;
  Tensor literal = bank.Forward(h, "en");
  CHECK(test::MaxAbsDiff(Sub(literal, single), h) < 1e-12);
}

TEST_CASE("per-utterance routing matches single-language forwards") {
  Rng rng(8);
  auto grouping = AdapterGrouping::Individual({"en", "ky"});
  DualAdapterBank bank = DualAdapterBank::Init(grouping, 6, 2, true, rng);
  bank.lang_adapters.at("en").up.w = RandomTensor({2, 6}, rng).WithGrad();
  bank.lang_adapters.at("ky").up.w = RandomTensor({2, 6}, rng).WithGrad();
  bank.common->up.w = RandomTensor({2, 6}, rng).WithGrad();

  std::vector<std::string> langs = {"en", "ky", "en"};
  std::vector<Tensor> batch = {RandomTensor({2, 6}, rng), RandomTensor({2, 6}, rng),
                               RandomTensor({2, 6}, rng)};
  for (size_t i = 0; i < batch.size(); ++i) {
    Tensor routed = bank.Forward(batch[i], langs[i]);
    Tensor direct = bank.Forward(batch[i], langs[i] == "en" ? "en" : "ky");
    CHECK(routed.data() == direct.data());
  }
  // Distinct languages produce distinct transforms of the same input.
  Tensor h = RandomTensor({2, 6}, rng);
  CHECK(test::MaxAbsDiff(bank.Forward(h, "en"), bank.Forward(h, "ky")) > 1e-6);
}

TEST_CASE("language mask basics") {
  auto grouping = AdapterGrouping::Individual({"en", "fr", "tr", "ky"});
  auto mask = MakeLanguageMask({"en", "en", "en"}, grouping);
  CHECK(mask == std::vector<std::string>{"en", "en", "en"});

  auto balanced = MakeLanguageMask({"en", "fr", "tr", "ky"}, grouping);
  CHECK(balanced == std::vector<std::string>{"en", "fr", "tr", "ky"});

  CHECK_THROWS_AS(MakeLanguageMask({"en", ""}, grouping), DataError);
  try {
    MakeLanguageMask({"zz"}, grouping);
    CHECK(false);
  } catch (const RoutingError& e) {
    std::string msg = e.what();
    CHECK(msg.find("zz") != std::string::npos);
    CHECK(msg.find("tr") != std::string::npos);  // lists the known keys
  }
}

TEST_CASE("family grouping shares Turkic adapters") {
  auto grouping = AdapterGrouping::ByFamily({"tr", "tt", "ky", "en"});
  auto mask = MakeLanguageMask({"tr", "tt", "ky"}, grouping);
  CHECK(mask[0] == mask[1]);
  CHECK(mask[1] == mask[2]);
  CHECK(grouping.KeyFor("en") != grouping.KeyFor("tr"));
  // 4 languages, 2 distinct keys.
  CHECK(grouping.Keys().size() == 2);

  auto script = AdapterGrouping::ByScript({"tr", "tt", "ky"});
  CHECK(script.KeyFor("tr") != script.KeyFor("tt"));  // latin vs cyrillic
  CHECK(script.KeyFor("tt") == script.KeyFor("ky"));

  CHECK_THROWS_AS(AdapterGrouping::ByFamily({"xx"}), ConfigError);
}

TEST_CASE("routing is invariant under batch permutation") {
  auto grouping = AdapterGrouping::Individual({"a", "b", "c"});
  std::vector<std::string> langs = {"a", "c", "b", "a"};
  auto mask = MakeLanguageMask(langs, grouping);
  std::vector<std::string> permuted = {langs[2], langs[0], langs[3], langs[1]};
  auto mask_p = MakeLanguageMask(permuted, grouping);
  CHECK(mask_p[0] == mask[2]);
  CHECK(mask_p[1] == mask[0]);
  CHECK(mask_p[2] == mask[3]);
  CHECK(mask_p[3] == mask[1]);
}

TEST_CASE("adapter gradients pass finite differences") {
  Rng rng(9);
  auto grouping = AdapterGrouping::Individual({"en"});
  DualAdapterBank bank = DualAdapterBank::Init(grouping, 6, 2, true, rng);
  bank.lang_adapters.at("en").up.w = RandomTensor({2, 6}, rng).WithGrad();
  bank.common->up.w = RandomTensor({2, 6}, rng).WithGrad();
  double err = GradCheck(
      [&](const Tensor& h) { return Sum(Mul(bank.Forward(h, "en"), h)); },
      RandomTensor({3, 6}, rng));
  CHECK(err < 1e-5);
}
