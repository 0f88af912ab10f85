// Copyright 2026 The CoughScreen Authors. All Rights Reserved.
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

#ifndef COUGHSCREEN_PARALLEL_H_
#define COUGHSCREEN_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace coughscreen {

// Worker count: hardware concurrency, capped by COUGHSCREEN_THREADS when set.
int MaxThreads();

// Runs body(i) for i in [0, n). Iterations must be independent; results are
// expected to be written to pre-sized, index-addressed storage so the outcome
// does not depend on scheduling. Nested calls run serially on the caller.
// The first exception thrown by any iteration is rethrown after all workers
// join.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace coughscreen

#endif  // COUGHSCREEN_PARALLEL_H_
