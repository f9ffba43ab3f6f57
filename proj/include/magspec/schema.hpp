#pragma once

namespace magspec {

/// Version stamped into every JSON document as the integer field "schema".
inline constexpr int kSchemaVersion = 1;

}  // namespace magspec
