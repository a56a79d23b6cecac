/**
 * Copyright 2026 The earcough Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "earcough/config.hpp"

#include <fstream>
#include <istream>

#include "earcough/error.hpp"

namespace earcough::config {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value) {
  throw Error(Errc::InvalidArgument, "bad value for '" + key + "': '" + value + "'");
}

}  // namespace

KeyValues parse(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidArgument, "line " + std::to_string(lineno) + ": expected key = value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  return parse(in);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) bad(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad(key, value);
  }
}

long long to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size()) bad(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad(key, value);
  }
}

std::uint64_t to_uint64(const std::string& key, const std::string& value) {
  if (value.empty() || value.front() == '-' || value.front() == '+') bad(key, value);
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) bad(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad(key, value);
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  bad(key, value);
}

std::pair<double, double> to_range(const std::string& key, const std::string& value) {
  const auto comma = value.find(',');
  if (comma == std::string::npos) bad(key, value);
  return {to_double(key, trim(value.substr(0, comma))), to_double(key, trim(value.substr(comma + 1)))};
}

}  // namespace earcough::config
