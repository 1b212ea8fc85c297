#ifndef RISLOC_FORMAT_HPP
#define RISLOC_FORMAT_HPP

#include <string>

namespace risloc
{

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

} // namespace risloc

#endif
