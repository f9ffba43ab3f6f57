#pragma once

#include <string_view>

namespace magspec {

/// Writes "warning: <message>" to stderr unless warnings are muted.
void warn(std::string_view message);
void set_warnings_muted(bool muted);

}  // namespace magspec
