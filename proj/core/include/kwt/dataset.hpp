#pragma once

#include <string>
#include <vector>

#include "kwt/types.hpp"

namespace kwt {

// On-disk dataset format. Only the native record layout is parsed here;
// converters for third-party corpora are documented schemas, not code.
enum class DatasetFormat { native };

DatasetFormat dataset_format_from_string(const std::string& text);

// Loads and validates a dataset file, preserving input order. Rejects
// duplicate ids, empty question/gold fields, gold responses containing the
// reserved "<IDK>" literal, and files where only some records carry the
// answerable label.
std::vector<QaInstance> load_dataset(const std::string& path,
                                     DatasetFormat format = DatasetFormat::native);

// Writes instances one record per line, in order.
void save_dataset(const std::string& path, const std::vector<QaInstance>& instances);

}  // namespace kwt
