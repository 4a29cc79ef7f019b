#pragma once

#include <string_view>

// Shipped defaults compiled in from share/ragdx/ at configure time.
namespace ragdx::defaults {

std::string_view normalization_rules();
std::string_view report_rules();
std::string_view context_relevancy_prompt();
std::string_view answer_relevancy_prompt();
std::string_view context_adherence_prompt();

}  // namespace ragdx::defaults
