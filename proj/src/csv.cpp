#include "mrt/csv.hpp"

#include <cstdio>

namespace mrt {

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace mrt
