#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace kwt {

// One parsed line-delimited record file. Output files produced by this
// toolkit start with a {"_header": {...}} line carrying tool name, version,
// seed and a config fingerprint; input files may omit it.
struct JsonlFile {
  std::optional<nlohmann::json> header;
  std::vector<nlohmann::json> records;
};

// Reads one JSON object per line. Blank lines are skipped. A {"_header": ...}
// object on the first non-blank line is split off into header; a header
// anywhere else is an error. Malformed lines raise ParseError with the
// 1-based line number.
JsonlFile read_jsonl(const std::string& path);

// read_jsonl with the header (if any) discarded.
std::vector<nlohmann::json> read_jsonl_records(const std::string& path);

// Writes header (when present) then one record per line. nlohmann::json
// orders object keys lexicographically, so output bytes are deterministic.
void write_jsonl(const std::string& path, const std::optional<nlohmann::json>& header,
                 const std::vector<nlohmann::json>& records);

// Fetches a required field, raising ParseError when missing.
const nlohmann::json& require_field(const nlohmann::json& record, const std::string& key,
                                    const std::string& context);

}  // namespace kwt
