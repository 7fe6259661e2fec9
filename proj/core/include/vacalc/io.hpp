#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vacalc/dataset.hpp"

namespace vacalc {

/// Column roles for delimited input. Columns not mentioned are symptoms.
struct Schema {
  std::optional<std::string> cause_column = "cause";
  std::optional<std::string> site_column;
  // Explicit symptom columns; empty means every remaining column.
  std::vector<std::string> symptom_columns;
  // Supplied cause labels fix the index order; otherwise order of first
  // appearance in the data.
  std::vector<std::string> cause_labels;
  std::vector<std::string> ignored_columns;

  // Reads a key-value file mapping column name -> role
  // (cause | symptom | site | ignore).
  static Schema from_config(const std::string& path);
};

// Delimiter is detected from the header row (tab wins over comma).
Dataset load_dataset(std::istream& in, const Schema& schema = Schema{});
Dataset load_dataset_file(const std::string& path, const Schema& schema = Schema{});

void write_dataset(const Dataset& d, std::ostream& out, char delimiter = ',');
void write_dataset_file(const Dataset& d, const std::string& path, char delimiter = ',');

/// Plain `key = value` config text; '#' starts a comment.
using KeyValueConfig = std::map<std::string, std::string>;
KeyValueConfig read_key_value(std::istream& in);
KeyValueConfig read_key_value_file(const std::string& path);
void write_key_value(const std::vector<std::pair<std::string, std::string>>& entries,
                     std::ostream& out);

}  // namespace vacalc
