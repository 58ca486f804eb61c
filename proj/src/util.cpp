#include "mlltr/util.hpp"

#include <cstdio>

namespace mlltr {

bool Log::quiet_ = false;

void Log::Warning(const std::string& msg) {
  if (!quiet_) std::fprintf(stderr, "[mlltr warning] %s\n", msg.c_str());
}

void Log::Info(const std::string& msg) {
  if (!quiet_) std::fprintf(stderr, "[mlltr] %s\n", msg.c_str());
}

void Log::set_quiet(bool quiet) { quiet_ = quiet; }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace mlltr
