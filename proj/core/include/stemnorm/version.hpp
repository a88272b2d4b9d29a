#pragma once

#include <string>

namespace stemnorm {

/// Library version and the versions of the numeric backends it was built with.
[[nodiscard]] std::string library_version();
[[nodiscard]] std::string versions_json();

}  // namespace stemnorm
