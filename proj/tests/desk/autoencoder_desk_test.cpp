// Copyright 2026 The Percepta Authors
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

#include <gtest/gtest.h>

#include <cstdio>

#include "percepta/autoencoder/autoencoder.hpp"

// Desk-scale training run with the default architecture: 2000 steps per loss.
// Takes several minutes per loss on one core.

namespace {

class DeskTraining : public ::testing::TestWithParam<percepta::MetricKind> {};

TEST_P(DeskTraining, TailLossBelowHeadLoss) {
  percepta::AEConfig c;
  c.loss = GetParam();
  c.steps = 2000;
  const auto r = percepta::ae_train(c, percepta::default_thread_count());
  const std::size_t tenth = c.steps / 10;
  double head = 0, tail = 0;
  for (std::size_t i = 0; i < tenth; ++i) {
    head += r.loss_curve[i];
    tail += r.loss_curve[c.steps - 1 - i];
  }
  head /= static_cast<double>(tenth);
  tail /= static_cast<double>(tenth);
  std::printf("%s: head mean %.6f, tail mean %.6f\n", std::string(percepta::metric_label(c.loss)).c_str(), head,
              tail);
  EXPECT_LT(tail, head);
}

INSTANTIATE_TEST_SUITE_P(AllLosses, DeskTraining,
                         ::testing::Values(percepta::MetricKind::kMse, percepta::MetricKind::kOneMinusMsSsim,
                                           percepta::MetricKind::kNlpd),
                         [](const auto& info) { return std::string(percepta::metric_token(info.param)); });

}  // namespace
