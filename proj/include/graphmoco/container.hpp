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

#ifndef GRAPHMOCO_CONTAINER_HPP
#define GRAPHMOCO_CONTAINER_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace graphmoco {

// File layout: "GMCO", u32 version, u64 manifest length, JSON manifest, then
// the arrays as contiguous little-endian f64 values. The manifest records
// each array's name, shape, memory layout, offset and element count.
inline constexpr std::uint32_t kContainerVersion = 1;

struct NamedArray {
  std::string name;
  std::vector<long> shape;
  bool row_major = false;
  std::vector<double> data;
};

struct Container {
  std::string kind;  // "checkpoint" or "index"
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedArray> arrays;

  const NamedArray& Get(const std::string& name) const;
  bool Has(const std::string& name) const;
};

std::string SerializeContainer(const Container& container);
Container ParseContainer(std::string_view bytes, const std::string& source);

// Writes to a temporary sibling and renames it into place.
void WriteContainer(const std::filesystem::path& path,
                    const Container& container);
// `raw` receives the file bytes when non-null.
Container ReadContainer(const std::filesystem::path& path,
                        std::string* raw = nullptr);

}  // namespace graphmoco

#endif  // GRAPHMOCO_CONTAINER_HPP
