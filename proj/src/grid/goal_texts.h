// Copyright 2026 The slotmem Authors
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

#ifndef SLOTMEM_SRC_GRID_GOAL_TEXTS_H_
#define SLOTMEM_SRC_GRID_GOAL_TEXTS_H_

#include <map>
#include <string>

namespace slotmem::grid {

// Contents of goals/*.goal keyed by file stem, compiled into the library.
const std::map<std::string, std::string>& ShippedGoalTexts();

}  // namespace slotmem::grid

#endif  // SLOTMEM_SRC_GRID_GOAL_TEXTS_H_
