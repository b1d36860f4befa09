// Copyright 2026-present the prk project
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

#include <catch2/catch_amalgamated.hpp>

#include "prk/gradcheck.hpp"

using Catch::Matchers::WithinAbs;
using prk::GradCheckReport;
using prk::GradCheckTarget;

TEST_CASE("central differences recover a quadratic gradient", "[gradcheck]") {
  auto f = [](const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) {
      acc += v * v;
    }
    return acc;
  };
  std::vector<double> x = {1.0, -2.0, 0.5};
  std::vector<double> g = prk::finite_difference(f, x);
  REQUIRE(g.size() == 3);
  CHECK_THAT(g[0], WithinAbs(2.0, 1e-8));
  CHECK_THAT(g[1], WithinAbs(-4.0, 1e-8));
  CHECK_THAT(g[2], WithinAbs(1.0, 1e-8));
}

TEST_CASE("relative error is guarded for tiny magnitudes", "[gradcheck]") {
  CHECK(prk::max_relative_error({0.0}, {1e-9}) == 1e-9);
  CHECK_THAT(prk::max_relative_error({100.0}, {90.0}), WithinAbs(0.1, 1e-12));
  CHECK(prk::max_relative_error({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK_THROWS_AS(prk::max_relative_error({1.0}, {1.0, 2.0}), prk::Error);
}

TEST_CASE("target names resolve", "[gradcheck]") {
  CHECK(prk::gradcheck_target_from_name("l1") == GradCheckTarget::l1);
  CHECK(prk::gradcheck_target_from_name("phrase") == GradCheckTarget::phrase);
  CHECK_THROWS_AS(prk::gradcheck_target_from_name("hinge"), prk::Error);
}

TEST_CASE("analytic gradients of every loss match finite differences",
          "[gradcheck]") {
  for (GradCheckTarget target :
       {GradCheckTarget::l1, GradCheckTarget::mse, GradCheckTarget::kl,
        GradCheckTarget::cosine, GradCheckTarget::triplet,
        GradCheckTarget::phrase}) {
    GradCheckReport report = prk::run_gradcheck(target, 20, 1);
    INFO("target " << static_cast<int>(target) << " max rel error "
                   << report.max_rel_error);
    CHECK(report.pass);
    CHECK(report.trials == 20);
    CHECK(report.max_rel_error <= 1e-5);
  }
}

TEST_CASE("gradcheck is deterministic for a fixed seed", "[gradcheck]") {
  GradCheckReport a = prk::run_gradcheck(GradCheckTarget::phrase, 5, 42);
  GradCheckReport b = prk::run_gradcheck(GradCheckTarget::phrase, 5, 42);
  CHECK(a.max_rel_error == b.max_rel_error);
  GradCheckReport c = prk::run_gradcheck(GradCheckTarget::phrase, 5, 43);
  CHECK(a.max_rel_error != c.max_rel_error);
}
