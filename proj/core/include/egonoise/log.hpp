#pragma once

#include <iostream>
#include <string>

namespace egonoise {

inline void log_warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }
inline void log_info(const std::string& msg) { std::cerr << "info: " << msg << "\n"; }

}  // namespace egonoise
