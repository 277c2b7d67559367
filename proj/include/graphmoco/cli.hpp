// Copyright 2026 The GraphMoco Authors. All Rights Reserved.
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

#ifndef GRAPHMOCO_CLI_HPP
#define GRAPHMOCO_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace graphmoco {

// Sets the spdlog level from GRAPHMOCO_LOG (error, info or debug; default
// info) and routes log lines to stderr.
void ConfigureLogging();

// Subcommands: synth, train, embed, search, eval. Returns 0 on success, 1 on
// a runtime failure (one diagnostic line on `err`) and 2 on usage errors.
// `--config FILE` supplies flags from a JSON object; explicit flags win.
int CliMain(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);
int CliMain(int argc, const char* const* argv);

}  // namespace graphmoco

#endif  // GRAPHMOCO_CLI_HPP
