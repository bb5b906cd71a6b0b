// Copyright 2026 The rubricrl Authors.
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

// Machine-checkable criteria. A CheckSpec is a small predicate over the
// answer text; VerifyRule evaluates it deterministically.
//
// Disk encoding is "kind:param", e.g. "max_words:30" or "contains:JSON".
// Parameter-free kinds (all_caps, all_lowercase, valid_json_object) omit the
// colon.
//
// Semantics:
//   words            maximal runs of non-whitespace characters
//   all_caps         at least one ASCII letter and no lowercase letters
//   all_lowercase    at least one ASCII letter and no uppercase letters
//   contains         case-insensitive substring match
//   starts_with      case-insensitive prefix of the whitespace-trimmed text
//   ends_with        case-insensitive suffix of the whitespace-trimmed text
//   valid_json_object  the trimmed text is one JSON object

#ifndef RUBRICRL_RULES_HPP_
#define RUBRICRL_RULES_HPP_

#include <array>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "rubricrl/error.hpp"
#include "rubricrl/text.hpp"

namespace rubricrl {

enum class Verdict { kMet, kNotMet };

inline std::string_view VerdictName(Verdict v) {
  return v == Verdict::kMet ? "met" : "not_met";
}

inline std::optional<Verdict> ParseVerdict(std::string_view s) {
  if (s == "met") return Verdict::kMet;
  if (s == "not_met") return Verdict::kNotMet;
  return std::nullopt;
}

enum class CheckKind {
  kMaxWords,
  kMinWords,
  kAllCaps,
  kAllLowercase,
  kContains,
  kNotContains,
  kStartsWith,
  kEndsWith,
  kWordCountExact,
  kValidJsonObject,
};

inline constexpr std::array<std::pair<CheckKind, std::string_view>, 10>
    kCheckKindNames = {{
        {CheckKind::kMaxWords, "max_words"},
        {CheckKind::kMinWords, "min_words"},
        {CheckKind::kAllCaps, "all_caps"},
        {CheckKind::kAllLowercase, "all_lowercase"},
        {CheckKind::kContains, "contains"},
        {CheckKind::kNotContains, "not_contains"},
        {CheckKind::kStartsWith, "starts_with"},
        {CheckKind::kEndsWith, "ends_with"},
        {CheckKind::kWordCountExact, "word_count_exact"},
        {CheckKind::kValidJsonObject, "valid_json_object"},
    }};

inline std::string_view CheckKindName(CheckKind kind) {
  for (const auto& [k, name] : kCheckKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

constexpr bool IsCountKind(CheckKind k) {
  return k == CheckKind::kMaxWords || k == CheckKind::kMinWords ||
         k == CheckKind::kWordCountExact;
}

constexpr bool IsNeedleKind(CheckKind k) {
  return k == CheckKind::kContains || k == CheckKind::kNotContains ||
         k == CheckKind::kStartsWith || k == CheckKind::kEndsWith;
}

struct CheckSpec {
  CheckKind kind = CheckKind::kAllCaps;
  int64_t count = 0;   // count kinds only
  std::string needle;  // needle kinds only

  static CheckSpec Count(CheckKind kind, int64_t n) {
    CheckSpec c{kind, n, {}};
    c.Validate();
    return c;
  }
  static CheckSpec Needle(CheckKind kind, std::string needle) {
    CheckSpec c{kind, 0, std::move(needle)};
    c.Validate();
    return c;
  }
  static CheckSpec Flag(CheckKind kind) {
    CheckSpec c{kind, 0, {}};
    c.Validate();
    return c;
  }

  void Validate() const {
    if (IsCountKind(kind) && count <= 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(CheckKindName(kind)) +
                      " requires a positive integer parameter");
    }
    if (IsNeedleKind(kind) && needle.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(CheckKindName(kind)) +
                      " requires a non-empty needle");
    }
  }

  // Disk encoding.
  std::string ToString() const {
    std::string out(CheckKindName(kind));
    if (IsCountKind(kind)) {
      out += ":" + std::to_string(count);
    } else if (IsNeedleKind(kind)) {
      out += ":" + needle;
    }
    return out;
  }

  friend bool operator==(const CheckSpec&, const CheckSpec&) = default;
};

// Parses the "kind:param" disk encoding. Throws kInvalidArgument.
inline CheckSpec ParseCheckSpec(std::string_view encoded) {
  std::string_view name = encoded;
  std::optional<std::string_view> param;
  if (size_t colon = encoded.find(':'); colon != std::string_view::npos) {
    name = encoded.substr(0, colon);
    param = encoded.substr(colon + 1);
  }
  for (const auto& [kind, kind_name] : kCheckKindNames) {
    if (kind_name != name) continue;
    if (IsCountKind(kind)) {
      if (!param) break;
      int64_t n = 0;
      auto [ptr, ec] =
          std::from_chars(param->data(), param->data() + param->size(), n);
      if (ec != std::errc() || ptr != param->data() + param->size()) break;
      return CheckSpec::Count(kind, n);
    }
    if (IsNeedleKind(kind)) {
      if (!param) break;
      return CheckSpec::Needle(kind, std::string(*param));
    }
    if (param) break;
    return CheckSpec::Flag(kind);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "malformed check spec '" + std::string(encoded) + "'");
}

inline Verdict VerifyRule(std::string_view answer, const CheckSpec& check) {
  auto verdict = [](bool ok) { return ok ? Verdict::kMet : Verdict::kNotMet; };
  switch (check.kind) {
    case CheckKind::kMaxWords:
      return verdict(int64_t(text::CountWords(answer)) <= check.count);
    case CheckKind::kMinWords:
      return verdict(int64_t(text::CountWords(answer)) >= check.count);
    case CheckKind::kWordCountExact:
      return verdict(int64_t(text::CountWords(answer)) == check.count);
    case CheckKind::kAllCaps:
    case CheckKind::kAllLowercase: {
      bool want_upper = check.kind == CheckKind::kAllCaps;
      bool any_alpha = false;
      for (char c : answer) {
        if (!text::IsAlpha(c)) continue;
        any_alpha = true;
        if (want_upper ? text::IsLower(c) : text::IsUpper(c)) {
          return Verdict::kNotMet;
        }
      }
      return verdict(any_alpha);
    }
    case CheckKind::kContains:
      return verdict(text::ContainsIgnoreCase(answer, check.needle));
    case CheckKind::kNotContains:
      return verdict(!text::ContainsIgnoreCase(answer, check.needle));
    case CheckKind::kStartsWith: {
      std::string_view t = text::Trim(answer);
      return verdict(t.size() >= check.needle.size() &&
                     text::EqualsIgnoreCase(t.substr(0, check.needle.size()),
                                            check.needle));
    }
    case CheckKind::kEndsWith: {
      std::string_view t = text::Trim(answer);
      return verdict(
          t.size() >= check.needle.size() &&
          text::EqualsIgnoreCase(t.substr(t.size() - check.needle.size()),
                                 check.needle));
    }
    case CheckKind::kValidJsonObject: {
      auto parsed = nlohmann::json::parse(text::Trim(answer), nullptr,
                                          /*allow_exceptions=*/false);
      return verdict(!parsed.is_discarded() && parsed.is_object());
    }
  }
  return Verdict::kNotMet;
}

}  // namespace rubricrl

#endif  // RUBRICRL_RULES_HPP_
