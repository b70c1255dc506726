#include "kwt/jsonl.hpp"

#include <fstream>

#include "kwt/errors.hpp"

namespace kwt {

JsonlFile read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path + " for reading");

  JsonlFile file;
  std::string line;
  std::size_t line_no = 0;
  bool seen_record = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path + ": " + e.what(), line_no);
    }
    if (!j.is_object()) {
      throw ParseError(path + ": expected a JSON object", line_no);
    }
    if (j.contains("_header")) {
      if (seen_record || file.header.has_value()) {
        throw ParseError(path + ": _header allowed only on the first line", line_no);
      }
      if (!j["_header"].is_object()) {
        throw ParseError(path + ": _header must be an object", line_no);
      }
      file.header = j["_header"];
      continue;
    }
    seen_record = true;
    file.records.push_back(std::move(j));
  }
  return file;
}

std::vector<nlohmann::json> read_jsonl_records(const std::string& path) {
  return read_jsonl(path).records;
}

void write_jsonl(const std::string& path, const std::optional<nlohmann::json>& header,
                 const std::vector<nlohmann::json>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  if (header.has_value()) {
    nlohmann::json wrapper;
    wrapper["_header"] = *header;
    out << wrapper.dump() << '\n';
  }
  for (const auto& record : records) {
    out << record.dump() << '\n';
  }
  if (!out) throw ValidationError("write failed for " + path);
}

const nlohmann::json& require_field(const nlohmann::json& record, const std::string& key,
                                    const std::string& context) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError(context + ": missing required field '" + key + "'");
  }
  return *it;
}

}  // namespace kwt
