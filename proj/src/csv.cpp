#include "cusplab/csv.hpp"

#include <cstdio>
#include <ostream>

namespace cusplab::csv {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void header(std::ostream& os, std::initializer_list<std::string_view> cols) {
    bool first = true;
    for (auto c : cols) {
        if (!first) os << ',';
        os << c;
        first = false;
    }
    os << '\n';
}

void row(std::ostream& os, std::span<const double> vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) os << ',';
        os << fmt(vals[i]);
    }
    os << '\n';
}

void row(std::ostream& os, std::initializer_list<double> vals) {
    row(os, std::span<const double>(vals.begin(), vals.size()));
}

} // namespace cusplab::csv
