// Copyright 2026 The Surgeon Authors.
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

#ifndef SURGEON_KEYVALUE_H_
#define SURGEON_KEYVALUE_H_

#include <map>
#include <string>
#include <string_view>

namespace surgeon {

// Line-oriented `key = value` text with optional `[section]` headers and
// '#' comments. Keys before any header land in section "". Surrounding
// double quotes on values are stripped.
struct KeyValueDoc {
  // section -> key -> (value, line number)
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> sections;

  const std::string* Find(const std::string& section, const std::string& key) const;
};

// Throws IoError with `source:line` on malformed lines or duplicate keys.
KeyValueDoc ParseKeyValue(std::string_view text, const std::string& source);

std::string Trim(std::string_view s);

}  // namespace surgeon

#endif  // SURGEON_KEYVALUE_H_
