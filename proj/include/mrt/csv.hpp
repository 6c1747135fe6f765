#ifndef MRT_CSV_HPP
#define MRT_CSV_HPP

#include <string>

namespace mrt {

// Decimal with 12 significant digits; the single formatting used in every
// CSV artifact so reruns are byte-identical.
std::string csv_num(double v);

}  // namespace mrt

#endif  // MRT_CSV_HPP
