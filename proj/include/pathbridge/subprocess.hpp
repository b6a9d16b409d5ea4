/*
 * Copyright 2026 The pathbridge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <vector>

namespace pathbridge {

// Line protocol used by the external generator, tagger and scorer hooks:
// writes `input` (one element per line) to the command's stdin through a
// temporary file and returns its stdout split into lines. Throws kIo when the
// command cannot be started or exits non-zero.
std::vector<std::string> RunLineProtocol(const std::string& command,
                                         const std::vector<std::string>& input);

}  // namespace pathbridge
