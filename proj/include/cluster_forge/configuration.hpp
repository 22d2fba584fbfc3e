// Copyright 2026 The cluster-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cluster_forge {

using Length = std::uint32_t;
using Count = std::uint32_t;

enum class Outcome : std::uint8_t { success, failure };

struct Part {
  Length length = 0;
  Count count = 0;

  friend bool operator==(const Part&, const Part&) = default;
  friend auto operator<=>(const Part&, const Part&) = default;
};

/**
 * Anonymous picture of a set of linear chains: how many chains exist of
 * each length. Parts are kept sorted by length; zero counts never appear.
 * The empty configuration is valid and means every chain was destroyed.
 */
class Configuration {
 public:
  Configuration() = default;

  static Configuration epr_pairs(Count n) {
    Configuration c;
    if (n > 0) c.parts_.push_back({1, n});
    return c;
  }

  static Configuration single_chain(Length length) {
    Configuration c;
    c.add(length);
    return c;
  }

  static Configuration from_lengths(std::span<const Length> lengths) {
    Configuration c;
    for (Length l : lengths) c.add(l);
    return c;
  }

  static Configuration from_lengths(std::initializer_list<Length> lengths) {
    return from_lengths(std::span<const Length>(lengths.begin(), lengths.size()));
  }

  std::span<const Part> parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }

  Count count(Length length) const {
    const auto it = find(length);
    return it != parts_.end() && it->length == length ? it->count : 0;
  }

  Count chain_count() const {
    Count n = 0;
    for (const auto& p : parts_) n += p.count;
    return n;
  }

  std::uint64_t total_length() const {
    std::uint64_t total = 0;
    for (const auto& p : parts_) total += std::uint64_t{p.length} * p.count;
    return total;
  }

  std::uint64_t vertex_count() const {
    std::uint64_t total = 0;
    for (const auto& p : parts_) total += (std::uint64_t{p.length} + 1) * p.count;
    return total;
  }

  Length smallest() const { return parts_.empty() ? 0 : parts_.front().length; }
  Length largest() const { return parts_.empty() ? 0 : parts_.back().length; }

  /// Adds `n` chains of `length`; a length of zero is a destroyed chain and is dropped.
  Configuration& add(Length length, Count n = 1) {
    if (length == 0 || n == 0) return *this;
    auto it = find(length);
    if (it != parts_.end() && it->length == length) {
      it->count += n;
    } else {
      parts_.insert(it, Part{length, n});
    }
    return *this;
  }

  Configuration& remove(Length length, Count n = 1) {
    auto it = find(length);
    if (it == parts_.end() || it->length != length || it->count < n) {
      throw std::invalid_argument("configuration holds fewer than " + std::to_string(n) +
                                  " chain(s) of length " + std::to_string(length));
    }
    it->count -= n;
    if (it->count == 0) parts_.erase(it);
    return *this;
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend auto operator<=>(const Configuration& a, const Configuration& b) {
    return a.parts_ <=> b.parts_;
  }

  std::size_t hash() const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (const auto& p : parts_) {
      h = (h ^ p.length) * 0x100000001b3ULL;
      h = (h ^ p.count) * 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::vector<Part>::iterator find(Length length) {
    return std::lower_bound(parts_.begin(), parts_.end(), length,
                            [](const Part& p, Length l) { return p.length < l; });
  }
  std::vector<Part>::const_iterator find(Length length) const {
    return std::lower_bound(parts_.begin(), parts_.end(), length,
                            [](const Part& p, Length l) { return p.length < l; });
  }

  std::vector<Part> parts_;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const { return c.hash(); }
};

inline std::uint64_t total_length(const Configuration& c) { return c.total_length(); }
inline std::uint64_t vertex_count(const Configuration& c) { return c.vertex_count(); }

/// "length^count" pairs in increasing length, comma separated; "" for the empty configuration.
inline std::string canonical_key(const Configuration& c) {
  std::string key;
  for (const auto& p : c.parts()) {
    if (!key.empty()) key.push_back(',');
    key += std::to_string(p.length);
    key.push_back('^');
    key += std::to_string(p.count);
  }
  return key;
}

inline Configuration parse_configuration(std::string_view key) {
  Configuration c;
  Length previous = 0;
  auto parse_uint = [&](std::string_view s) {
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw std::invalid_argument("malformed configuration key '" + std::string(key) + "'");
    }
    return v;
  };
  while (!key.empty()) {
    const auto comma = key.find(',');
    const auto item = key.substr(0, comma);
    const auto caret = item.find('^');
    if (caret == std::string_view::npos) {
      throw std::invalid_argument("malformed configuration key '" + std::string(key) + "'");
    }
    const Length length = parse_uint(item.substr(0, caret));
    const Count count = parse_uint(item.substr(caret + 1));
    if (length == 0 || count == 0 || length <= previous) {
      throw std::invalid_argument("non-canonical configuration key '" + std::string(key) + "'");
    }
    c.add(length, count);
    previous = length;
    key = comma == std::string_view::npos ? std::string_view{} : key.substr(comma + 1);
  }
  return c;
}

/// Fusion request in the anonymous picture: chain lengths, or stop. Unordered, stored with first <= second.
class Action {
 public:
  static Action stop() { return Action(); }
  static Action fuse(Length k, Length l) {
    if (k == 0 || l == 0) throw std::invalid_argument("fusion of a zero-length chain");
    return Action(std::min(k, l), std::max(k, l));
  }

  bool is_stop() const { return first_ == 0; }
  Length first() const { return first_; }
  Length second() const { return second_; }

  friend bool operator==(const Action&, const Action&) = default;

 private:
  Action() = default;
  Action(Length k, Length l) : first_(k), second_(l) {}

  Length first_ = 0;
  Length second_ = 0;
};

/// "k,l" or "stop".
inline std::string format_action(const Action& a) {
  if (a.is_stop()) return "stop";
  return std::to_string(a.first()) + "," + std::to_string(a.second());
}

inline Action parse_action(std::string_view text) {
  if (text == "stop") return Action::stop();
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw std::invalid_argument("malformed action '" + std::string(text) + "'");
  }
  Length k = 0, l = 0;
  const auto a = std::from_chars(text.data(), text.data() + comma, k);
  const auto b = std::from_chars(text.data() + comma + 1, text.data() + text.size(), l);
  if (a.ec != std::errc() || b.ec != std::errc() || b.ptr != text.data() + text.size() ||
      a.ptr != text.data() + comma || k == 0 || l == 0) {
    throw std::invalid_argument("malformed action '" + std::string(text) + "'");
  }
  return Action::fuse(k, l);
}

/// True when `a` names chains that are present in `c` (two of them when k == l).
inline bool is_feasible(const Configuration& c, const Action& a) {
  if (a.is_stop()) return true;
  if (a.first() == a.second()) return c.count(a.first()) >= 2;
  return c.count(a.first()) >= 1 && c.count(a.second()) >= 1;
}

/**
 * Elementary fusion rule. Success glues the two chains into one of length
 * k + l; failure costs each chain one edge, and a chain reduced to zero
 * edges disappears.
 */
inline Configuration apply_fusion(const Configuration& c, Length k, Length l, Outcome outcome) {
  const Action a = Action::fuse(k, l);
  if (!is_feasible(c, a)) {
    throw std::invalid_argument("null fusion: configuration {" + canonical_key(c) +
                                "} lacks chains for " + format_action(a));
  }
  Configuration next = c;
  next.remove(k).remove(l);
  if (outcome == Outcome::success) {
    next.add(k + l);
  } else {
    next.add(k - 1).add(l - 1);
  }
  return next;
}

inline Configuration apply_fusion(const Configuration& c, const Action& a, Outcome outcome) {
  if (a.is_stop()) throw std::invalid_argument("cannot apply a stop action");
  return apply_fusion(c, a.first(), a.second(), outcome);
}

/// Fusion request in the identity picture: chain positions, or stop.
struct IndexedAction {
  bool stop = true;
  std::size_t first = 0;
  std::size_t second = 0;

  static IndexedAction halt() { return {}; }
  static IndexedAction fuse(std::size_t i, std::size_t j) {
    return {false, std::min(i, j), std::max(i, j)};
  }
  friend bool operator==(const IndexedAction&, const IndexedAction&) = default;
};

/**
 * Identity picture: an ordered list of chain lengths. Fusing positions
 * i < j leaves the glued chain at i and removes j; a failure shortens both,
 * and chains that reach zero edges are erased, shifting later positions down.
 */
class IdentityConfiguration {
 public:
  IdentityConfiguration() = default;
  explicit IdentityConfiguration(std::vector<Length> chains) : chains_(std::move(chains)) {
    std::erase(chains_, Length{0});
  }

  static IdentityConfiguration epr_pairs(std::size_t n) {
    return IdentityConfiguration(std::vector<Length>(n, 1));
  }

  /// Expands the anonymous picture in increasing length order.
  static IdentityConfiguration from(const Configuration& c) {
    std::vector<Length> chains;
    for (const auto& p : c.parts()) chains.insert(chains.end(), p.count, p.length);
    return IdentityConfiguration(std::move(chains));
  }

  std::span<const Length> chains() const { return chains_; }
  std::size_t size() const { return chains_.size(); }
  Length operator[](std::size_t i) const { return chains_[i]; }

  std::uint64_t total_length() const {
    std::uint64_t total = 0;
    for (Length l : chains_) total += l;
    return total;
  }

  Configuration anonymous() const { return Configuration::from_lengths(chains_); }

  bool is_feasible(const IndexedAction& a) const {
    return a.stop || (a.first != a.second && a.second < chains_.size());
  }

  IdentityConfiguration apply(const IndexedAction& a, Outcome outcome) const {
    IdentityConfiguration next = *this;
    next.apply_in_place(a, outcome);
    return next;
  }

  void apply_in_place(const IndexedAction& a, Outcome outcome) {
    if (a.stop) throw std::invalid_argument("cannot apply a stop action");
    if (!is_feasible(a)) {
      throw std::invalid_argument("null fusion: positions " + std::to_string(a.first) + "," +
                                  std::to_string(a.second) + " on " +
                                  std::to_string(chains_.size()) + " chains");
    }
    auto& ch = chains_;
    if (outcome == Outcome::success) {
      ch[a.first] += ch[a.second];
      ch.erase(ch.begin() + static_cast<std::ptrdiff_t>(a.second));
    } else {
      --ch[a.first];
      --ch[a.second];
      if (ch[a.second] == 0) ch.erase(ch.begin() + static_cast<std::ptrdiff_t>(a.second));
      if (ch[a.first] == 0) ch.erase(ch.begin() + static_cast<std::ptrdiff_t>(a.first));
    }
  }

  std::string key() const {
    std::string k;
    for (Length l : chains_) {
      k += std::to_string(l);
      k.push_back(' ');
    }
    return k;
  }

  friend bool operator==(const IdentityConfiguration&, const IdentityConfiguration&) = default;

 private:
  std::vector<Length> chains_;
};

/// Outcome history, one entry per attempted fusion.
using Event = std::vector<Outcome>;

inline std::string format_event(const Event& e) {
  if (e.empty()) return "ε";
  std::string s;
  for (Outcome o : e) s.push_back(o == Outcome::success ? 'S' : 'F');
  return s;
}

namespace detail {

inline void partitions_of(Length remaining, Length max_part, std::vector<Length>& current,
                          const std::function<void(const std::vector<Length>&)>& emit) {
  if (remaining == 0) {
    emit(current);
    return;
  }
  for (Length part = std::min(remaining, max_part); part >= 1; --part) {
    current.push_back(part);
    partitions_of(remaining - part, part, current, emit);
    current.pop_back();
  }
}

}  // namespace detail

/// Calls `visit` once for every configuration of total length <= max_total whose chains are all at most `max_length` long.
template <class Visitor>
void for_each_configuration(Length max_total, Length max_length, Visitor&& visit) {
  std::vector<Length> current;
  const std::function<void(const std::vector<Length>&)> emit = [&](const std::vector<Length>& p) {
    visit(Configuration::from_lengths(std::span<const Length>(p)));
  };
  for (Length total = 0; total <= max_total; ++total) {
    detail::partitions_of(total, std::min(total, max_length), current, emit);
  }
}

/**
 * Every configuration with total length <= max_total, the empty one
 * included, ordered by vertex count and then canonical key. Fusion always
 * lowers the vertex count, so successors precede the states that reach them.
 */
inline std::vector<Configuration> enumerate_configurations(Length max_total,
                                                           Length max_length = 0) {
  if (max_length == 0) max_length = std::max<Length>(max_total, 1);
  std::vector<std::pair<std::string, Configuration>> keyed;
  for_each_configuration(max_total, max_length, [&](Configuration c) {
    keyed.emplace_back(canonical_key(c), std::move(c));
  });
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    const auto va = a.second.vertex_count();
    const auto vb = b.second.vertex_count();
    return va != vb ? va < vb : a.first < b.first;
  });
  std::vector<Configuration> out;
  out.reserve(keyed.size());
  for (auto& [key, c] : keyed) out.push_back(std::move(c));
  return out;
}

}  // namespace cluster_forge
