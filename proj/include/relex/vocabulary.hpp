// Copyright 2026 The Relex Authors.
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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relex {

// Bijection between tokens and contiguous ids starting at 0.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::span<const std::string> tokens) {
    for (const auto &t : tokens) add(t);
  }

  // Returns the id of `token`, assigning the next free id if it is new.
  std::uint32_t add(std::string_view token) {
    if (auto it = ids_.find(token); it != ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(tokens_.size());
    tokens_.emplace_back(token);
    ids_.emplace(tokens_.back(), id);
    return id;
  }

  std::optional<std::uint32_t> find(std::string_view token) const {
    if (auto it = ids_.find(token); it != ids_.end()) return it->second;
    return std::nullopt;
  }

  bool contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }

  std::uint32_t id_of(std::string_view token) const {
    if (auto id = find(token)) return *id;
    throw std::invalid_argument("unknown token '" + std::string(token) + "'");
  }

  const std::string &token_of(std::uint32_t id) const {
    if (id >= tokens_.size()) throw std::invalid_argument("token id " + std::to_string(id) + " out of range");
    return tokens_[id];
  }

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::vector<std::string> &tokens() const { return tokens_; }

  bool operator==(const Vocabulary &o) const { return tokens_ == o.tokens_; }

 private:
  std::map<std::string, std::uint32_t, std::less<>> ids_;
  std::vector<std::string> tokens_;
};

}  // namespace relex
