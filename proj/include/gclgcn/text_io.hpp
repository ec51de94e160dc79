// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gclgcn/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gclgcn {

/// Shortest-exact decimal text for a double with 17 significant digits max.
std::string format_double(double value);

/// Parses a full token as a double; throws ParseError mentioning `context`.
double parse_double(std::string_view token, std::string_view context);
long long parse_integer(std::string_view token, std::string_view context);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);
std::vector<int> read_labels(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace gclgcn
