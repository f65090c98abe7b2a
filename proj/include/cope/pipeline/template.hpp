#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "cope/backends/chat.hpp"

namespace cope::pipeline {

/// single_user: the whole body is one user message. system_and_user: the body
/// is split at a line reading exactly "[user]"; text above it becomes the
/// system message.
enum class RoleLayout { single_user, system_and_user };

std::string_view to_string(RoleLayout layout);
RoleLayout parse_role_layout(std::string_view text);

inline constexpr std::string_view kSummaryPlaceholder = "discharge_summary";
inline constexpr std::string_view kReasoningPlaceholder = "reasoning_text";

struct PromptTemplate {
  std::string name;
  std::string body;
  std::set<std::string> placeholders;  // every {{name}} found in body
  RoleLayout role_layout = RoleLayout::single_user;

  /// Scans `body` for placeholders. Throws ConfigError for an unterminated
  /// "{{", an invalid placeholder name, or a system_and_user body without a
  /// "[user]" line.
  static PromptTemplate from_text(std::string name, std::string body,
                                  RoleLayout layout = RoleLayout::single_user);
  /// "reasoning", "extraction" or "single_step" from the embedded assets.
  static PromptTemplate builtin(std::string_view name);
  static PromptTemplate load(const std::filesystem::path& path, RoleLayout layout = RoleLayout::single_user);

  /// SHA-256 of the body.
  std::string hash() const;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Literal, single-pass substitution: bound values are never re-expanded.
/// Throws ConfigError naming any unbound placeholder or any binding the
/// template does not declare.
backends::ChatRequest render_prompt(const PromptTemplate& tpl, const Bindings& bindings,
                                    const backends::SamplingParams& params = {});

}  // namespace cope::pipeline
