#include "kwt/dataset.hpp"

#include <unordered_set>

#include "kwt/errors.hpp"
#include "kwt/jsonl.hpp"
#include "kwt/text_norm.hpp"

namespace kwt {

DatasetFormat dataset_format_from_string(const std::string& text) {
  if (text == "native") return DatasetFormat::native;
  throw ValidationError("unknown dataset format: '" + text + "'");
}

std::vector<QaInstance> load_dataset(const std::string& path, DatasetFormat format) {
  (void)format;
  auto records = read_jsonl_records(path);

  std::vector<QaInstance> instances;
  instances.reserve(records.size());
  std::unordered_set<std::string> seen_ids;
  std::size_t with_label = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    QaInstance inst;
    try {
      inst = qa_instance_from_json(records[i]);
    } catch (const Error& e) {
      throw ValidationError(path + ": record " + std::to_string(i + 1) + ": " + e.what());
    }
    if (!seen_ids.insert(inst.id).second) {
      throw ValidationError(path + ": duplicate instance id '" + inst.id + "'");
    }
    if (contains_idk(inst.gold_response)) {
      throw ValidationError(path + ": gold_response of '" + inst.id +
                            "' contains the reserved <IDK> literal");
    }
    if (inst.answerable.has_value()) ++with_label;
    instances.push_back(std::move(inst));
  }

  if (with_label != 0 && with_label != instances.size()) {
    throw ValidationError(path + ": answerable label present on " + std::to_string(with_label) +
                          " of " + std::to_string(instances.size()) +
                          " records; it must be all or none");
  }
  return instances;
}

void save_dataset(const std::string& path, const std::vector<QaInstance>& instances) {
  std::vector<nlohmann::json> records;
  records.reserve(instances.size());
  for (const auto& inst : instances) records.push_back(to_json(inst));
  write_jsonl(path, std::nullopt, records);
}

}  // namespace kwt
