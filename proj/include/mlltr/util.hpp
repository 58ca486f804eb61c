#ifndef MLLTR_UTIL_HPP_
#define MLLTR_UTIL_HPP_

#include <cstdint>
#include <cstdio>
#include <string>

namespace mlltr {

/*! \brief Minimal logging shim: warnings go to stderr unless silenced. */
class Log {
 public:
  static void Warning(const std::string& msg);
  static void Info(const std::string& msg);
  static void set_quiet(bool quiet);

 private:
  static bool quiet_;
};

/*! \brief Format a double so that it round-trips bit-exactly (%.17g). */
std::string format_double(double v);

}  // namespace mlltr

#endif  // MLLTR_UTIL_HPP_
