// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eager {

// RFC 4180 CSV with a mandatory header row. Quoted fields may contain commas,
// doubled quotes and newlines.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name; -1 if absent.
    int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::istream& in, const std::string& origin);

std::string csv_quote(const std::string& field);

}  // namespace eager
