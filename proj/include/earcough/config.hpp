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

#ifndef EARCOUGH_CONFIG_HPP_
#define EARCOUGH_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>

namespace earcough::config {

/// `key = value` text; `#` starts a comment, blank lines are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse(std::istream& in);
KeyValues load(const std::filesystem::path& path);

double to_double(const std::string& key, const std::string& value);
long long to_int(const std::string& key, const std::string& value);
std::uint64_t to_uint64(const std::string& key, const std::string& value);
bool to_bool(const std::string& key, const std::string& value);
/// "lo,hi"
std::pair<double, double> to_range(const std::string& key, const std::string& value);

}  // namespace earcough::config

#endif  // EARCOUGH_CONFIG_HPP_
