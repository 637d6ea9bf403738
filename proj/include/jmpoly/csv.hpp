#pragma once

// Plain CSV output with a fixed number format (12 significant digits).

#include <iosfwd>
#include <string>
#include <vector>

namespace jmpoly {

std::string format_number(double v);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);
void write_csv_row(std::ostream& out, const std::vector<double>& values);

}  // namespace jmpoly
