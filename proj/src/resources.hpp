#pragma once

#include <string_view>

// Data files compiled into the library (see cmake/embed.cmake).
namespace wscan::resources {

std::string_view rules_json();
std::string_view semantics_json();
std::string_view bip39_english();
std::string_view report_schema();

}  // namespace wscan::resources
