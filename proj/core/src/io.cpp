#include "vacalc/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace vacalc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_row(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, delim)) cells.push_back(cell);
  if (!line.empty() && line.back() == delim) cells.push_back("");
  return cells;
}

bool is_missing_cell(const std::string& v) {
  return v.empty() || v == "NA" || v == "na" || v == "Na";
}

}  // namespace

Schema Schema::from_config(const std::string& path) {
  Schema s;
  s.cause_column.reset();
  auto kv = read_key_value_file(path);
  for (const auto& [column, role] : kv) {
    if (role == "cause") {
      if (s.cause_column) throw ParseError("schema names two cause columns");
      s.cause_column = column;
    } else if (role == "symptom") {
      s.symptom_columns.push_back(column);
    } else if (role == "site") {
      if (s.site_column) throw ParseError("schema names two site columns");
      s.site_column = column;
    } else if (role == "ignore") {
      s.ignored_columns.push_back(column);
    } else if (column == "cause_labels") {
      // Comma-separated fixed label order.
      for (auto& l : split_row(role, ',')) {
        std::string t = trim(l);
        if (!t.empty()) s.cause_labels.push_back(t);
      }
    } else {
      throw ParseError("unknown schema role '" + role + "' for column '" + column + "'");
    }
  }
  return s;
}

Dataset load_dataset(std::istream& in, const Schema& schema) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty input");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  char delim = header.find('\t') != std::string::npos ? '\t' : ',';

  std::vector<std::string> columns = split_row(header, delim);
  int cause_col = -1, site_col = -1;
  std::vector<int> symptom_cols;
  std::vector<std::string> symptom_names;
  for (int c = 0; c < static_cast<int>(columns.size()); ++c) {
    std::string name = trim(columns[c]);
    if (schema.cause_column && name == *schema.cause_column) {
      cause_col = c;
    } else if (schema.site_column && name == *schema.site_column) {
      site_col = c;
    } else if (std::find(schema.ignored_columns.begin(), schema.ignored_columns.end(), name) !=
               schema.ignored_columns.end()) {
      // skip
    } else if (schema.symptom_columns.empty() ||
               std::find(schema.symptom_columns.begin(), schema.symptom_columns.end(), name) !=
                   schema.symptom_columns.end()) {
      symptom_cols.push_back(c);
      symptom_names.push_back(name);
    }
  }
  if (!schema.symptom_columns.empty() &&
      symptom_cols.size() != schema.symptom_columns.size())
    throw ParseError("schema symptom column missing from header");
  if (symptom_cols.empty()) throw ParseError("no symptom columns in header");

  Dataset d;
  d.symptom_count = static_cast<int>(symptom_cols.size());
  d.symptom_names = symptom_names;

  std::vector<std::string> cause_labels = schema.cause_labels;
  std::vector<std::optional<int>> causes;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_row(line, delim);
    if (cells.size() != columns.size())
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(columns.size()) + " cells, got " +
                       std::to_string(cells.size()));

    SymptomRecord rec;
    rec.symptoms.reserve(symptom_cols.size());
    for (int c : symptom_cols) {
      std::string v = trim(cells[c]);
      if (v == "1")
        rec.symptoms.push_back(Symptom::Present);
      else if (v == "0")
        rec.symptoms.push_back(Symptom::Absent);
      else if (is_missing_cell(v))
        rec.symptoms.push_back(Symptom::Missing);
      else
        throw ParseError("line " + std::to_string(lineno) + ": bad symptom value '" + v + "'");
    }

    if (cause_col >= 0) {
      std::string v = trim(cells[cause_col]);
      if (is_missing_cell(v))
        throw ParseError("line " + std::to_string(lineno) + ": record with missing cause");
      auto it = std::find(cause_labels.begin(), cause_labels.end(), v);
      int idx;
      if (it == cause_labels.end()) {
        if (!schema.cause_labels.empty())
          throw ParseError("line " + std::to_string(lineno) + ": cause label '" + v +
                           "' not in the supplied cause set");
        cause_labels.push_back(v);
        idx = static_cast<int>(cause_labels.size()) - 1;
      } else {
        idx = static_cast<int>(it - cause_labels.begin());
      }
      rec.cause = idx;
    }
    causes.push_back(rec.cause);
    if (site_col >= 0) {
      try {
        d.sites.push_back(std::stoi(trim(cells[site_col])));
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad site value");
      }
    }
    d.records.push_back(std::move(rec));
  }
  if (d.records.empty()) throw ParseError("dataset has no data rows");

  if (cause_col >= 0) {
    if (cause_labels.size() < 2) {
      // A single observed cause cannot form a cause set; pad from schema only.
      throw ParseError("labeled dataset has fewer than 2 distinct causes");
    }
    d.cause_set = CauseSet(cause_labels);
    d.kind = DatasetKind::Labeled;
  } else {
    d.kind = DatasetKind::Unlabeled;
  }
  d.validate();
  return d;
}

Dataset load_dataset_file(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return load_dataset(in, schema);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_dataset(const Dataset& d, std::ostream& out, char delimiter) {
  bool labeled = d.kind == DatasetKind::Labeled || d.causes_hidden;
  if (labeled) out << "cause" << delimiter;
  if (!d.sites.empty()) out << "site" << delimiter;
  for (int k = 0; k < d.symptom_count; ++k) {
    if (k) out << delimiter;
    out << (k < static_cast<int>(d.symptom_names.size()) ? d.symptom_names[k]
                                                         : "s" + std::to_string(k + 1));
  }
  out << "\n";
  for (int i = 0; i < d.size(); ++i) {
    const auto& r = d.records[i];
    if (labeled) out << d.cause_set.label(r.cause.value()) << delimiter;
    if (!d.sites.empty()) out << d.sites[i] << delimiter;
    for (int k = 0; k < d.symptom_count; ++k) {
      if (k) out << delimiter;
      switch (r.symptoms[k]) {
        case Symptom::Present: out << '1'; break;
        case Symptom::Absent: out << '0'; break;
        case Symptom::Missing: out << "NA"; break;
      }
    }
    out << "\n";
  }
}

void write_dataset_file(const Dataset& d, const std::string& path, char delimiter) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  write_dataset(d, out, delimiter);
}

KeyValueConfig read_key_value(std::istream& in) {
  KeyValueConfig kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

KeyValueConfig read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_key_value(in);
}

void write_key_value(const std::vector<std::pair<std::string, std::string>>& entries,
                     std::ostream& out) {
  for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

}  // namespace vacalc
