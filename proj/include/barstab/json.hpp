#pragma once

// nlohmann/json, from the vendored single header when present.
#if __has_include(<json.hpp>)
#include <json.hpp>
#else
#include <nlohmann/json.hpp>
#endif
