#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace riskann {

/// Project outcome, the two classifier classes.
enum class Label { success, failure };

using ClassOrder = std::array<Label, 2>;

inline constexpr ClassOrder kDefaultClassOrder{Label::success, Label::failure};

constexpr std::string_view label_name(Label label) noexcept {
  return label == Label::success ? "success" : "failure";
}

/// Single-letter code used in data files.
constexpr char label_code(Label label) noexcept {
  return label == Label::success ? 'S' : 'F';
}

std::optional<Label> parse_label(std::string_view text) noexcept;

}  // namespace riskann
