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

// Trajectory grammar: a model output is one <rubric> block followed by one
// <answer> block.
//
//   <rubric>
//   1. The response must be in English. [Hard Rule]
//   2. The response should be concise. [Principle]
//   </rubric>
//
//   <answer>
//   ...
//   </answer>
//
// Block tags match case-insensitively and tolerate whitespace inside the
// angle brackets ("< /Rubric >"). Parsing never throws; every structural
// failure is reported as a diagnostic with a character span.

#ifndef RUBRICRL_TRAJECTORY_HPP_
#define RUBRICRL_TRAJECTORY_HPP_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rubricrl/error.hpp"
#include "rubricrl/rules.hpp"
#include "rubricrl/text.hpp"

namespace rubricrl {

enum class Category { kHardRule, kPrinciple };

inline std::string_view CategoryName(Category c) {
  return c == Category::kHardRule ? "hard_rule" : "principle";
}

inline std::string_view CategoryTag(Category c) {
  return c == Category::kHardRule ? "Hard Rule" : "Principle";
}

inline std::optional<Category> ParseCategoryName(std::string_view s) {
  if (s == "hard_rule") return Category::kHardRule;
  if (s == "principle") return Category::kPrinciple;
  return std::nullopt;
}

struct Criterion {
  std::string id;
  std::string text;
  Category category = Category::kPrinciple;
  std::optional<CheckSpec> check;  // absent => judge-routed free text
};

class Rubric {
 public:
  Rubric() = default;

  // Throws kInvalidArgument on blank text or duplicate ids.
  explicit Rubric(std::vector<Criterion> criteria)
      : criteria_(std::move(criteria)) {
    std::set<std::string_view> ids;
    for (const Criterion& c : criteria_) {
      if (text::IsBlank(c.text)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "criterion '" + c.id + "' has empty text");
      }
      if (!ids.insert(c.id).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate criterion id '" + c.id + "'");
      }
    }
  }

  const std::vector<Criterion>& criteria() const { return criteria_; }
  bool empty() const { return criteria_.empty(); }
  size_t n_total() const { return criteria_.size(); }
  size_t n_hard() const {
    return size_t(std::count_if(
        criteria_.begin(), criteria_.end(),
        [](const Criterion& c) { return c.category == Category::kHardRule; }));
  }
  size_t n_principle() const { return n_total() - n_hard(); }

 private:
  std::vector<Criterion> criteria_;
};

struct Answer {
  std::string text;
};

enum class DiagnosticCode {
  // Failures: any of these makes a trajectory unparseable.
  kMissingRubricOpen,
  kMissingRubricClose,
  kMissingAnswerOpen,
  kMissingAnswerClose,
  kWrongOrder,
  kDuplicateBlock,
  // Warnings.
  kOutsideText,
  kUntaggedItem,
  kMalformedItem,
};

inline std::string_view DiagnosticCodeName(DiagnosticCode code) {
  switch (code) {
    case DiagnosticCode::kMissingRubricOpen: return "MISSING_RUBRIC_OPEN";
    case DiagnosticCode::kMissingRubricClose: return "MISSING_RUBRIC_CLOSE";
    case DiagnosticCode::kMissingAnswerOpen: return "MISSING_ANSWER_OPEN";
    case DiagnosticCode::kMissingAnswerClose: return "MISSING_ANSWER_CLOSE";
    case DiagnosticCode::kWrongOrder: return "WRONG_ORDER";
    case DiagnosticCode::kDuplicateBlock: return "DUPLICATE_BLOCK";
    case DiagnosticCode::kOutsideText: return "OUTSIDE_TEXT";
    case DiagnosticCode::kUntaggedItem: return "UNTAGGED_ITEM";
    case DiagnosticCode::kMalformedItem: return "MALFORMED_ITEM";
  }
  return "UNKNOWN";
}

constexpr bool IsFailure(DiagnosticCode code) {
  return code <= DiagnosticCode::kDuplicateBlock;
}

struct Span {
  size_t begin = 0;
  size_t end = 0;
};

struct Diagnostic {
  DiagnosticCode code;
  std::string message;
  Span span;
};

struct ParseResult {
  bool parseable = false;
  std::optional<Rubric> rubric;
  // May be present on an unparseable trajectory when a single well-formed
  // answer block could still be extracted.
  std::optional<Answer> answer;
  std::vector<Diagnostic> diagnostics;

  bool Has(DiagnosticCode code) const {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [code](const Diagnostic& d) { return d.code == code; });
  }
};

struct RubricItems {
  std::vector<Criterion> criteria;
  std::vector<Diagnostic> diagnostics;
};

namespace internal {

// Recognizes "Hard Rule" / "Principle" ignoring case and all whitespace.
inline std::optional<Category> MatchItemTag(std::string_view tag) {
  std::string squashed;
  for (char c : tag) {
    if (!text::IsSpace(c)) squashed.push_back(text::ToLower(c));
  }
  if (squashed == "hardrule") return Category::kHardRule;
  if (squashed == "principle") return Category::kPrinciple;
  return std::nullopt;
}

enum class TagKind { kRubricOpen, kRubricClose, kAnswerOpen, kAnswerClose };

struct Tag {
  TagKind kind;
  Span span;
};

// Matches "<", optional "/", a block name, ">" with optional whitespace
// between every piece.
inline std::optional<Tag> MatchTagAt(std::string_view s, size_t pos) {
  size_t i = pos + 1;
  auto skip_ws = [&] {
    while (i < s.size() && text::IsSpace(s[i])) ++i;
  };
  skip_ws();
  bool closing = false;
  if (i < s.size() && s[i] == '/') {
    closing = true;
    ++i;
    skip_ws();
  }
  auto match_name = [&](std::string_view name) {
    if (i + name.size() > s.size()) return false;
    if (!text::EqualsIgnoreCase(s.substr(i, name.size()), name)) return false;
    i += name.size();
    return true;
  };
  bool rubric = false;
  if (match_name("rubric")) {
    rubric = true;
  } else if (!match_name("answer")) {
    return std::nullopt;
  }
  skip_ws();
  if (i >= s.size() || s[i] != '>') return std::nullopt;
  TagKind kind = rubric ? (closing ? TagKind::kRubricClose : TagKind::kRubricOpen)
                        : (closing ? TagKind::kAnswerClose : TagKind::kAnswerOpen);
  return Tag{kind, Span{pos, i + 1}};
}

inline std::vector<Tag> ScanTags(std::string_view s) {
  std::vector<Tag> tags;
  for (size_t pos = s.find('<'); pos != std::string_view::npos;
       pos = s.find('<', pos + 1)) {
    if (auto tag = MatchTagAt(s, pos)) {
      tags.push_back(*tag);
      pos = tag->span.end - 1;
    }
  }
  return tags;
}

}  // namespace internal

// Parses the inner text of a rubric block. Each "<number>. <text> [<tag>]"
// line becomes one criterion with id "c1", "c2", ... in order. Untagged items
// fall back to principle.
inline RubricItems ParseRubricItems(std::string_view body,
                                    size_t offset = 0) {
  RubricItems out;
  for (size_t pos = 0; pos <= body.size();) {
    size_t nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    Span span{offset + pos, offset + nl};
    std::string_view line = text::Trim(body.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty() || line == "Format:") continue;

    size_t i = 0;
    while (i < line.size() && text::IsDigit(line[i])) ++i;
    if (i == 0 || i >= line.size() || line[i] != '.') {
      out.diagnostics.push_back({DiagnosticCode::kMalformedItem,
                                 "rubric line is not a numbered item", span});
      continue;
    }
    std::string_view rest = text::Trim(line.substr(i + 1));

    std::optional<Category> category;
    if (!rest.empty() && rest.back() == ']') {
      size_t open = rest.rfind('[');
      if (open != std::string_view::npos) {
        category =
            internal::MatchItemTag(rest.substr(open + 1, rest.size() - open - 2));
        if (category) rest = text::Trim(rest.substr(0, open));
      }
    }
    if (rest.empty()) {
      out.diagnostics.push_back(
          {DiagnosticCode::kMalformedItem, "rubric item has no text", span});
      continue;
    }
    if (!category) {
      out.diagnostics.push_back(
          {DiagnosticCode::kUntaggedItem,
           "rubric item has no [Hard Rule]/[Principle] tag; treated as "
           "principle",
           span});
    }
    out.criteria.push_back(
        Criterion{"c" + std::to_string(out.criteria.size() + 1),
                  std::string(rest), category.value_or(Category::kPrinciple),
                  std::nullopt});
  }
  return out;
}

inline ParseResult ParseTrajectory(std::string_view raw) {
  using internal::TagKind;
  ParseResult result;
  auto fail = [&](DiagnosticCode code, std::string message, Span span) {
    result.diagnostics.push_back({code, std::move(message), span});
  };

  std::vector<internal::Tag> tags = internal::ScanTags(raw);
  auto find_all = [&](TagKind kind) {
    std::vector<internal::Tag> found;
    for (const auto& t : tags) {
      if (t.kind == kind) found.push_back(t);
    }
    return found;
  };
  auto ro = find_all(TagKind::kRubricOpen);
  auto rc = find_all(TagKind::kRubricClose);
  auto ao = find_all(TagKind::kAnswerOpen);
  auto ac = find_all(TagKind::kAnswerClose);
  Span whole{0, raw.size()};

  auto check_counts = [&](const std::vector<internal::Tag>& open,
                          const std::vector<internal::Tag>& close,
                          std::string_view name, DiagnosticCode missing_open,
                          DiagnosticCode missing_close) {
    bool ok = true;
    if (open.size() > 1 || close.size() > 1) {
      const auto& extra = open.size() > 1 ? open[1] : close[1];
      fail(DiagnosticCode::kDuplicateBlock,
           "more than one " + std::string(name) + " block", extra.span);
      ok = false;
    }
    if (open.empty()) {
      fail(missing_open, "no <" + std::string(name) + "> tag",
           close.empty() ? whole : close.front().span);
      ok = false;
    }
    if (close.empty()) {
      fail(missing_close, "no </" + std::string(name) + "> tag",
           open.empty() ? whole : open.front().span);
      ok = false;
    }
    if (ok && close.front().span.begin < open.front().span.end) {
      fail(missing_open,
           "</" + std::string(name) + "> appears before <" +
               std::string(name) + ">",
           close.front().span);
      ok = false;
    }
    return ok;
  };
  bool rubric_ok =
      check_counts(ro, rc, "rubric", DiagnosticCode::kMissingRubricOpen,
                   DiagnosticCode::kMissingRubricClose);
  bool answer_ok =
      check_counts(ao, ac, "answer", DiagnosticCode::kMissingAnswerOpen,
                   DiagnosticCode::kMissingAnswerClose);
  if (!rubric_ok || !answer_ok) {
    // Still surface a lone well-formed answer so callers can score it.
    if (answer_ok) {
      size_t b = ao.front().span.end;
      size_t e = ac.front().span.begin;
      bool inside_rubric = ro.size() == 1 && rc.size() == 1 &&
                           ro.front().span.begin < b &&
                           rc.front().span.begin > b;
      if (!inside_rubric) {
        result.answer = Answer{std::string(text::Trim(raw.substr(b, e - b)))};
      }
    }
    return result;
  }

  Span r_open = ro.front().span, r_close = rc.front().span;
  Span a_open = ao.front().span, a_close = ac.front().span;
  if (a_open.begin < r_open.begin) {
    fail(DiagnosticCode::kWrongOrder,
         "<answer> block must follow the <rubric> block", a_open);
    return result;
  }
  if (a_open.begin < r_close.begin) {
    fail(DiagnosticCode::kMissingRubricClose,
         "<answer> opens before </rubric>; blocks must not nest or overlap",
         a_open);
    return result;
  }

  auto note_outside = [&](size_t b, size_t e) {
    if (b < e && !text::IsBlank(raw.substr(b, e - b))) {
      result.diagnostics.push_back({DiagnosticCode::kOutsideText,
                                    "ignored text outside blocks", Span{b, e}});
    }
  };
  note_outside(0, r_open.begin);
  note_outside(r_close.end, a_open.begin);
  note_outside(a_close.end, raw.size());

  std::string_view body =
      raw.substr(r_open.end, r_close.begin - r_open.end);
  RubricItems items = ParseRubricItems(body, r_open.end);
  for (auto& d : items.diagnostics) result.diagnostics.push_back(std::move(d));
  result.rubric = Rubric(std::move(items.criteria));
  result.answer = Answer{std::string(
      text::Trim(raw.substr(a_open.end, a_close.begin - a_open.end)))};
  result.parseable = true;
  return result;
}

inline size_t CriterionCount(const Rubric& rubric) { return rubric.n_total(); }

// Canonical serialization: LF line endings, "{i}. {text} [{Tag}]" items and a
// single blank line between blocks.
inline std::string RenderTrajectory(const Rubric& rubric, const Answer& answer) {
  std::string out = "<rubric>\n";
  size_t i = 1;
  for (const Criterion& c : rubric.criteria()) {
    out += std::to_string(i++) + ". " + std::string(text::Trim(c.text)) +
           " [" + std::string(CategoryTag(c.category)) + "]\n";
  }
  out += "</rubric>\n\n<answer>\n";
  out += answer.text;
  out += "\n</answer>\n";
  return out;
}

}  // namespace rubricrl

#endif  // RUBRICRL_TRAJECTORY_HPP_
