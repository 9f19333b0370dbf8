// tests/frontend_test.cc

// Copyright 2026  The ldelid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"
#include "lde/error.h"
#include "lde/frontend.h"
#include "test_util.h"

namespace lde {

namespace {

ConvSpec TinySpec(Activation act) {
  ConvSpec spec;
  spec.input_dim = 3;
  spec.stem_channels = 4;
  spec.stages = {{4, 1, false}, {4, 1, true}};
  spec.kernel = 3;
  spec.activation = act;
  return spec;
}

double FrontendGradError(Frontend *net, Matrix *x, Rng *rng) {
  FrontendOutput out = net->Forward(*x);
  Matrix upstream = testing::RandomMatrix(rng, out.y.NumRows(), out.y.NumCols());
  auto loss = [&]() { return testing::Contract(upstream, net->Forward(*x).y); };
  net->ZeroGrad();
  Matrix gx = net->Backward(out.saved, upstream);
  double worst = testing::MaxRelError(gx, testing::NumericGradient(loss, x));
  for (auto &[name, p] : net->Params()) {
    Matrix analytic = p->grad;
    worst = std::max(worst, testing::MaxRelError(analytic, testing::NumericGradient(loss, &p->value)));
  }
  return worst;
}

}  // namespace

TEST_CASE("identity-initialized block passes input through") {
  ConvSpec spec;
  spec.input_dim = 4;
  spec.stem_channels = 4;
  spec.stages = {{4, 1, false}};
  spec.activation = Activation::kLinear;
  Frontend net(spec);
  for (std::size_t c = 0; c < 4; ++c) net.stem().weight.value(c, c * 3 + 1) = 1.0;
  Rng rng(1);
  Matrix x = testing::RandomMatrix(&rng, 4, 37);
  CHECK(net.Forward(x).y == x);
}

TEST_CASE("output length contract") {
  ConvSpec two;
  two.input_dim = 2;
  two.stem_channels = 3;
  two.stages = {{3, 1, true}, {4, 1, true}};
  two.kernel = 3;
  Rng rng(2);
  Frontend net(two, &rng);
  CHECK(net.Forward(testing::RandomMatrix(&rng, 2, 200)).y.NumCols() == 50);
  CHECK(two.OutputLength(200) == 50);
  CHECK(two.MinInputLength() == 4);

  ConvSpec tiny;
  tiny.input_dim = 1;
  tiny.stem_channels = 0;
  tiny.stages = {{1, 1, true}, {1, 1, true}};
  tiny.kernel = 3;
  Frontend small(tiny, &rng);
  Matrix x = testing::RandomMatrix(&rng, 1, 4000);
  for (std::size_t L = tiny.MinInputLength(); L <= 4000; ++L) {
    Matrix xl(1, L, std::vector<double>(x.Data().begin(), x.Data().begin() + L));
    const std::size_t expect = ((L + 1) / 2 + 1) / 2;
    CHECK(small.Forward(xl).y.NumCols() == expect);
    CHECK(tiny.OutputLength(L) == expect);
  }
  try {
    small.Forward(Matrix(1, 3));
    FAIL("expected LengthError");
  } catch (const LengthError &e) {
    CHECK(std::string(e.what()).find("minimum of 4") != std::string::npos);
  }
}

TEST_CASE("zero residual branch gives the shortcut") {
  ConvSpec spec;
  spec.input_dim = 2;
  spec.stem_channels = 0;
  spec.stages = {{2, 1, false}, {3, 2, true}};
  spec.activation = Activation::kLinear;
  Frontend net(spec);
  Rng rng(3);
  Matrix x = testing::RandomMatrix(&rng, 2, 9);
  Matrix y = net.Forward(x).y;
  REQUIRE(y.NumRows() == 3);
  REQUIRE(y.NumCols() == 5);
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(y(0, t) == x(0, 2 * t));
    CHECK(y(1, t) == x(1, 2 * t));
    CHECK(y(2, t) == 0.0);
  }
}

TEST_CASE("conv1d as a linear layer") {
  Rng rng(4);
  Conv1d conv(3, 2, 1, 1);
  conv.weight.value = testing::RandomMatrix(&rng, 2, 3);
  conv.bias.value = testing::RandomMatrix(&rng, 2, 1);
  Matrix x = testing::RandomMatrix(&rng, 3, 6);
  Matrix y = conv.Forward(x);
  Matrix ref = MatMul(conv.weight.value, x);
  for (std::size_t o = 0; o < 2; ++o)
    for (double &v : ref.Row(o)) v += conv.bias.value(o, 0);
  CHECK(MaxAbsDiff(y, ref) <= 1e-12);

  Matrix g = testing::RandomMatrix(&rng, 2, 6);
  Matrix gx = conv.Backward(x, g);
  CHECK(MaxAbsDiff(gx, MatMul(Transpose(conv.weight.value), g)) <= 1e-12);
  CHECK(MaxAbsDiff(conv.weight.grad, MatMul(g, Transpose(x))) <= 1e-12);
  for (std::size_t o = 0; o < 2; ++o) {
    double s = 0.0;
    for (double v : g.Row(o)) s += v;
    CHECK(std::abs(conv.bias.grad(o, 0) - s) <= 1e-12);
  }
  CHECK_THROWS_AS(conv.Backward(x, Matrix(2, 5)), ContractError);
}

TEST_CASE("conv1d gradients, stride 1 and 2, odd and even lengths") {
  Rng rng(5);
  for (std::size_t stride : {1, 2})
    for (std::size_t L : {7, 8}) {
      Conv1d conv(2, 3, 3, stride);
      conv.weight.value = testing::RandomMatrix(&rng, 3, 6);
      conv.bias.value = testing::RandomMatrix(&rng, 3, 1);
      Matrix x = testing::RandomMatrix(&rng, 2, L);
      Matrix y = conv.Forward(x);
      CHECK(y.NumCols() == (L + stride - 1) / stride);
      Matrix up = testing::RandomMatrix(&rng, 3, y.NumCols());
      auto loss = [&]() { return testing::Contract(up, conv.Forward(x)); };
      Matrix gx = conv.Backward(x, up);
      Matrix gw = conv.weight.grad, gb = conv.bias.grad;
      CHECK(testing::MaxRelError(gx, testing::NumericGradient(loss, &x)) <= 1e-5);
      CHECK(testing::MaxRelError(gw, testing::NumericGradient(loss, &conv.weight.value)) <= 1e-5);
      CHECK(testing::MaxRelError(gb, testing::NumericGradient(loss, &conv.bias.value)) <= 1e-5);
    }
}

TEST_CASE("activation gradients") {
  Rng rng(6);
  for (Activation a : {Activation::kLinear, Activation::kRelu, Activation::kTanh}) {
    Matrix x = testing::RandomMatrix(&rng, 3, 5);
    Matrix up = testing::RandomMatrix(&rng, 3, 5);
    auto loss = [&]() { return testing::Contract(up, ApplyActivation(a, x)); };
    Matrix g = ActivationBackward(a, x, up);
    CHECK(testing::MaxRelError(g, testing::NumericGradient(loss, &x)) <= 1e-5);
  }
  CHECK(ParseActivation("tanh") == Activation::kTanh);
  CHECK_THROWS_AS(ParseActivation("gelu"), ArgumentError);
}

TEST_CASE("single residual block gradients") {
  Rng rng(7);
  for (bool ds : {false, true}) {
    ConvSpec spec;
    spec.input_dim = 3;
    spec.stem_channels = 0;
    spec.stages = {{4, 1, ds}};
    spec.activation = Activation::kTanh;
    Frontend net(spec, &rng);
    Matrix x = testing::RandomMatrix(&rng, 3, 11);
    CHECK(FrontendGradError(&net, &x, &rng) <= 1e-5);
  }
}

TEST_CASE("tiny two-stage frontend gradients") {
  Rng rng(8);
  for (Activation a : {Activation::kRelu, Activation::kTanh}) {
    Frontend net(TinySpec(a), &rng);
    for (auto &[name, p] : net.Params())
      if (name.find("bias") != std::string::npos)
        p->value = testing::RandomMatrix(&rng, p->value.NumRows(), 1, 0.1);
    Matrix x = testing::RandomMatrix(&rng, 3, 16);
    CHECK(FrontendGradError(&net, &x, &rng) <= 1e-4);
  }
}

TEST_CASE("zero upstream gradient") {
  Rng rng(9);
  Frontend net(TinySpec(Activation::kRelu), &rng);
  Matrix x = testing::RandomMatrix(&rng, 3, 16);
  FrontendOutput out = net.Forward(x);
  net.ZeroGrad();
  Matrix gx = net.Backward(out.saved, Matrix(out.y.NumRows(), out.y.NumCols()));
  for (double v : gx.Data()) CHECK(v == 0.0);
  for (auto &[name, p] : net.Params())
    for (double v : p->grad.Data()) CHECK(v == 0.0);
}

TEST_CASE("spec validation and stage syntax") {
  ConvSpec spec;
  CHECK(ConvSpec::ParseStages(spec.StagesToString()) == spec.stages);
  CHECK(ConvSpec::ParseStages("none").empty());
  CHECK_THROWS_AS(ConvSpec::ParseStages("16:1"), ArgumentError);
  CHECK_THROWS_AS(ConvSpec::ParseStages("a:1:ds"), ArgumentError);
  spec.kernel = 4;
  CHECK_THROWS_AS(spec.Validate(), ArgumentError);
  spec.kernel = 3;
  spec.stages = {{32, 1, false}, {16, 1, true}};
  CHECK_THROWS_AS(spec.Validate(), ArgumentError);

  ConvSpec none;
  none.input_dim = 5;
  none.stem_channels = 0;
  none.stages.clear();
  Frontend id(none);
  Rng rng(10);
  Matrix x = testing::RandomMatrix(&rng, 5, 3);
  CHECK(id.Forward(x).y == x);
}

}  // namespace lde
