#pragma once

#include <iosfwd>
#include <map>
#include <string>

namespace forestz {

// Flat "key = value" text with '#' comments. Later keys overwrite earlier.
std::map<std::string, std::string> parse_key_values(std::istream& in);
std::map<std::string, std::string> load_key_values(const std::string& path);

bool parse_bool(const std::string& value);

}  // namespace forestz
