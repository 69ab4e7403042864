#ifndef VSRL_TEXTIO_HPP_
#define VSRL_TEXTIO_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace vsrl {

// Shortest-safe decimal form with 17 significant digits (exact round trip).
std::string format_real(double value);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace vsrl

#endif  // VSRL_TEXTIO_HPP_
