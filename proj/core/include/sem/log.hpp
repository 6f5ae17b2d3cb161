#pragma once

#include <spdlog/spdlog.h>

namespace sem {

/// Shared stderr logger. Level comes from the SEM_LOG environment variable
/// (trace, debug, info, warn, error, off); default is warn.
spdlog::logger& logger();

}  // namespace sem
