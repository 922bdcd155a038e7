#pragma once

#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace cusplab::csv {

/// Shortest-free fixed formatting: 17 significant digits, so runs are byte-reproducible.
std::string fmt(double v);

void header(std::ostream& os, std::initializer_list<std::string_view> cols);
void row(std::ostream& os, std::initializer_list<double> vals);
void row(std::ostream& os, std::span<const double> vals);

} // namespace cusplab::csv
