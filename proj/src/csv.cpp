#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "comet/tabular.hpp"

namespace comet {

std::vector<std::string> parse_csv_record(std::istream& in, bool& ok, std::size_t& line) {
  std::vector<std::string> fields;
  ok = false;
  if (in.peek() == std::char_traits<char>::eof()) return fields;
  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  const std::size_t start_line = line;
  int ch;
  while ((ch = in.get()) != std::char_traits<char>::eof()) {
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty() || field_started_quoted) {
        throw ParseError("line " + std::to_string(start_line) + ": stray quote inside field");
      }
      quoted = true;
      field_started_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started_quoted = false;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      ++line;
      fields.push_back(std::move(field));
      ok = true;
      return fields;
    } else if (c == '\n') {
      ++line;
      fields.push_back(std::move(field));
      ok = true;
      return fields;
    } else {
      if (field_started_quoted) {
        throw ParseError("line " + std::to_string(start_line) + ": text after closing quote");
      }
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("line " + std::to_string(start_line) + ": unterminated quoted field");
  fields.push_back(std::move(field));
  ok = true;
  return fields;
}

Schema parse_schema(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
  Schema s;
  try {
    s.label = j.at("label").get<std::string>();
    for (const auto& [name, spec] : j.at("columns").items()) {
      ColumnSchema col;
      col.name = name;
      if (spec.is_string()) {
        col.kind = parse_feature_kind(spec.get<std::string>());
      } else {
        col.kind = parse_feature_kind(spec.at("kind").get<std::string>());
        if (spec.contains("categories")) col.categories = spec["categories"].get<std::vector<std::string>>();
      }
      s.columns.push_back(std::move(col));
    }
    if (j.contains("missing_tokens")) s.missing_tokens = j["missing_tokens"].get<std::vector<std::string>>();
    if (j.contains("classes")) s.classes = j["classes"].get<std::vector<std::string>>();
    if (j.contains("positive_class")) s.positive_class = j["positive_class"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
  return s;
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open schema " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

namespace {

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

Dataset read_csv(std::istream& in, const Schema& schema) {
  std::size_t line = 1;
  bool ok = false;
  std::vector<std::string> header = parse_csv_record(in, ok, line);
  if (!ok) throw ParseError("empty CSV: missing header");

  std::map<std::string, const ColumnSchema*> declared;
  for (const ColumnSchema& c : schema.columns) declared[c.name] = &c;

  int label_col = -1;
  std::vector<int> col_to_feature(header.size(), -1);
  std::vector<Feature> features;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == schema.label) {
      label_col = static_cast<int>(i);
      continue;
    }
    auto it = declared.find(header[i]);
    if (it == declared.end()) throw ParseError("column '" + header[i] + "' is not declared in the schema");
    Feature f;
    f.name = header[i];
    f.kind = it->second->kind;
    f.categories = it->second->categories;
    col_to_feature[i] = static_cast<int>(features.size());
    features.push_back(std::move(f));
    declared.erase(it);
  }
  if (label_col < 0) throw ParseError("label column '" + schema.label + "' not found in header");
  if (!declared.empty()) {
    throw ParseError("declared column '" + declared.begin()->first + "' not found in header");
  }

  std::vector<std::string> classes = schema.classes;
  std::vector<int> labels;
  auto is_missing_token = [&](const std::string& t) {
    return std::find(schema.missing_tokens.begin(), schema.missing_tokens.end(), t) !=
           schema.missing_tokens.end();
  };

  while (true) {
    const std::size_t row_line = line;
    std::vector<std::string> record = parse_csv_record(in, ok, line);
    if (!ok) break;
    if (record.size() == 1 && record[0].empty()) continue;  // blank line
    const std::size_t row = labels.size();
    if (record.size() != header.size()) {
      throw ParseError("row " + std::to_string(row + 1) + " (line " + std::to_string(row_line) +
                       "): expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(record.size()));
    }
    const std::string& label = record[static_cast<std::size_t>(label_col)];
    if (is_missing_token(label)) {
      throw ParseError("row " + std::to_string(row + 1) + ": missing label");
    }
    auto cls = std::find(classes.begin(), classes.end(), label);
    if (cls == classes.end()) {
      if (!schema.classes.empty()) {
        throw ParseError("row " + std::to_string(row + 1) + ": label '" + label + "' not in declared classes");
      }
      classes.push_back(label);
      cls = classes.end() - 1;
    }
    labels.push_back(static_cast<int>(cls - classes.begin()));

    for (std::size_t i = 0; i < record.size(); ++i) {
      if (col_to_feature[i] < 0) continue;
      Feature& f = features[static_cast<std::size_t>(col_to_feature[i])];
      const std::string& token = record[i];
      if (is_missing_token(token)) {
        f.cells.values.push_back(0.0);
        f.cells.missing.push_back(1);
        f.cells.provenance.push_back(Provenance::kDirtyPrePollution);
        continue;
      }
      double value = 0.0;
      if (f.categorical()) {
        auto it = std::find(f.categories.begin(), f.categories.end(), token);
        if (it == f.categories.end()) {
          f.categories.push_back(token);
          it = f.categories.end() - 1;
        }
        value = static_cast<double>(it - f.categories.begin());
      } else if (!parse_double(token, value)) {
        throw ParseError("row " + std::to_string(row + 1) + ", column '" + f.name +
                         "': non-numeric value '" + token + "'");
      }
      f.cells.values.push_back(value);
      f.cells.missing.push_back(0);
      f.cells.provenance.push_back(Provenance::kClean);
    }
  }

  // Label codes follow sorted class names unless the schema declares an order.
  if (schema.classes.empty()) {
    std::vector<std::string> sorted = classes;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> remap(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) {
      remap[i] = static_cast<int>(std::find(sorted.begin(), sorted.end(), classes[i]) - sorted.begin());
    }
    for (int& y : labels) y = remap[static_cast<std::size_t>(y)];
    classes = std::move(sorted);
  }

  Dataset data(std::move(features), schema.label, classes, std::move(labels));
  if (schema.positive_class) {
    auto it = std::find(classes.begin(), classes.end(), *schema.positive_class);
    if (it == classes.end()) throw ParseError("positive class '" + *schema.positive_class + "' not present");
    data.set_positive_class(static_cast<int>(it - classes.begin()));
  }
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_csv(in, schema);
}

namespace {

void write_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void write_csv(const Dataset& data, std::ostream& out, const std::string& missing_token) {
  for (const Feature& f : data.features()) {
    write_field(out, f.name);
    out << ',';
  }
  write_field(out, data.label_name());
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    for (const Feature& f : data.features()) {
      if (f.cells.missing[r]) {
        write_field(out, missing_token);
      } else if (f.categorical()) {
        write_field(out, f.categories[static_cast<std::size_t>(f.cells.values[r])]);
      } else {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, f.cells.values[r]);
        out.write(buf, ptr - buf);
      }
      out << ',';
    }
    write_field(out, data.classes()[static_cast<std::size_t>(data.labels()[r])]);
    out << '\n';
  }
}

}  // namespace comet
