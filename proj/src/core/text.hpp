/*
 * Copyright 2026 The QCAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef QCAD_CORE_TEXT_HPP_
#define QCAD_CORE_TEXT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qcad::text {

// Shortest representation that parses back to the same double.
std::string format_double(double v);
// Fixed notation with the given number of decimals (presentation only).
std::string format_fixed(double v, int decimals);

std::optional<double> parse_double(std::string_view s);

std::string_view trim(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Splits RFC-4180 text into records of fields. Quoted fields may contain
// commas, doubled quotes and line breaks. Returns the physical line number
// on which each record starts through `line_numbers` when non-null.
std::vector<std::vector<std::string>> parse_csv_records(
    std::string_view text, std::vector<std::size_t>* line_numbers = nullptr);

// Quotes a field if it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

}  // namespace qcad::text

#endif  // QCAD_CORE_TEXT_HPP_
