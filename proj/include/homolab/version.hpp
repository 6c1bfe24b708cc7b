#pragma once

#ifndef HOMOLAB_VERSION
#define HOMOLAB_VERSION "0.1.0"
#endif

namespace homolab {

inline constexpr const char* kVersion = HOMOLAB_VERSION;

} // namespace homolab
