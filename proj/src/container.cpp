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

#include "graphmoco/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "graphmoco/error.hpp"

namespace graphmoco {
namespace {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

constexpr char kMagic[4] = {'G', 'M', 'C', 'O'};

template <typename T>
void AppendPod(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T ReadPod(std::string_view bytes, std::size_t at) {
  T value;
  std::memcpy(&value, bytes.data() + at, sizeof(T));
  return value;
}

std::size_t Product(const std::vector<long>& shape) {
  std::size_t n = 1;
  for (long d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

}  // namespace

const NamedArray& Container::Get(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  Fail(ErrorCode::kFormat, kind + " has no array named '" + name + "'");
}

bool Container::Has(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return true;
  }
  return false;
}

std::string SerializeContainer(const Container& c) {
  nlohmann::json manifest;
  manifest["kind"] = c.kind;
  manifest["meta"] = c.meta;
  manifest["arrays"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& a : c.arrays) {
    Require(Product(a.shape) == a.data.size(),
            "array '" + a.name + "' data does not match its shape");
    manifest["arrays"].push_back({{"name", a.name},
                                  {"shape", a.shape},
                                  {"dtype", "f64"},
                                  {"layout", a.row_major ? "row" : "col"},
                                  {"offset", offset},
                                  {"count", a.data.size()}});
    offset += a.data.size();
  }
  const std::string text = manifest.dump();
  std::string out(kMagic, sizeof(kMagic));
  AppendPod<std::uint32_t>(out, kContainerVersion);
  AppendPod<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& a : c.arrays) {
    out.append(reinterpret_cast<const char*>(a.data.data()),
               a.data.size() * sizeof(double));
  }
  return out;
}

Container ParseContainer(std::string_view bytes, const std::string& source) {
  const std::size_t header = sizeof(kMagic) + 4 + 8;
  if (bytes.size() < header || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    Fail(ErrorCode::kFormat, source + ": not a graphmoco container");
  }
  const auto version = ReadPod<std::uint32_t>(bytes, 4);
  if (version != kContainerVersion) {
    Fail(ErrorCode::kVersionMismatch,
         source + ": container version " + std::to_string(version) +
             ", expected " + std::to_string(kContainerVersion));
  }
  const auto length = ReadPod<std::uint64_t>(bytes, 8);
  if (length > bytes.size() - header) {
    Fail(ErrorCode::kFormat, source + ": truncated manifest");
  }
  Container c;
  std::size_t total = 0;
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(header, length));
    c.kind = manifest.at("kind").get<std::string>();
    c.meta = manifest.value("meta", nlohmann::json::object());
    for (const auto& entry : manifest.at("arrays")) {
      NamedArray a;
      a.name = entry.at("name").get<std::string>();
      a.shape = entry.at("shape").get<std::vector<long>>();
      a.row_major = entry.at("layout").get<std::string>() == "row";
      if (entry.at("dtype").get<std::string>() != "f64") {
        Fail(ErrorCode::kFormat, source + ": unsupported dtype in '" + a.name + "'");
      }
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto count = entry.at("count").get<std::size_t>();
      if (count != Product(a.shape) || offset != total) {
        Fail(ErrorCode::kFormat, source + ": inconsistent entry '" + a.name + "'");
      }
      total += count;
      c.arrays.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, source + ": bad manifest: " + e.what());
  }
  const std::size_t data_start = header + length;
  if (bytes.size() - data_start != total * sizeof(double)) {
    Fail(ErrorCode::kFormat, source + ": array block size mismatch");
  }
  std::size_t at = data_start;
  for (auto& a : c.arrays) {
    a.data.resize(Product(a.shape));
    std::memcpy(a.data.data(), bytes.data() + at, a.data.size() * sizeof(double));
    at += a.data.size() * sizeof(double);
  }
  return c;
}

void WriteContainer(const std::filesystem::path& path, const Container& c) {
  const std::string bytes = SerializeContainer(c);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot rename into " + path.string() + ": " + ec.message());
}

Container ReadContainer(const std::filesystem::path& path, std::string* raw) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  Container c = ParseContainer(bytes, path.string());
  if (raw) *raw = std::move(bytes);
  return c;
}

}  // namespace graphmoco
