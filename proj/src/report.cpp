#include "geowarp/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "geowarp/error.hpp"

namespace geowarp {

namespace {

using Json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  const std::string str(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(str.c_str(), &end);
  // ERANGE also flags subnormal results, which are exact; only overflow is an error
  const bool overflow = errno == ERANGE && std::isinf(v);
  if (str.empty() || end != str.c_str() + str.size() || overflow) {
    throw Error(ErrorCode::InvalidInput, "malformed number in report: '" + str + "'");
  }
  return v;
}

void add_pose(ReportDocument& doc, const std::string& prefix, const Pose& p) {
  const Vec3& t = p.position();
  const Quat& q = p.orientation();
  doc.scalars.emplace_back(prefix + "_tx", t.x());
  doc.scalars.emplace_back(prefix + "_ty", t.y());
  doc.scalars.emplace_back(prefix + "_tz", t.z());
  doc.scalars.emplace_back(prefix + "_qw", q.w());
  doc.scalars.emplace_back(prefix + "_qx", q.x());
  doc.scalars.emplace_back(prefix + "_qy", q.y());
  doc.scalars.emplace_back(prefix + "_qz", q.z());
}

void add_loss(ReportDocument& doc, const LossBreakdown& l) {
  doc.scalars.emplace_back("l_d", l.l_d);
  doc.scalars.emplace_back("l_p", l.l_p);
  doc.scalars.emplace_back("l_s", l.l_s);
  doc.scalars.emplace_back("total", l.total);
  doc.scalars.emplace_back("valid_pixel_count", static_cast<double>(l.valid_pixel_count));
  doc.scalars.emplace_back("gated_pixel_count", static_cast<double>(l.gated_pixel_count));
  doc.scalars.emplace_back("rejected_pixel_count", static_cast<double>(l.rejected_pixel_count));
  doc.scalars.emplace_back("degenerate", l.degenerate ? 1.0 : 0.0);
  doc.scalars.emplace_back("ssim_degenerate", l.ssim_degenerate ? 1.0 : 0.0);
}

template <typename Pairs>
auto find_named(const Pairs& pairs, std::string_view name) {
  return std::find_if(pairs.begin(), pairs.end(), [&](const auto& p) { return p.first == name; });
}

std::string serialize_csv(const ReportDocument& doc) {
  std::ostringstream out;
  out << "# kind=" << doc.kind << '\n';
  for (const auto& [k, v] : doc.config) out << "# config." << k << '=' << v << '\n';
  for (const auto& [k, v] : doc.labels) out << "# label." << k << '=' << v << '\n';
  for (const auto& [k, v] : doc.scalars) out << "# scalar." << k << '=' << format_double(v) << '\n';
  for (std::size_t c = 0; c < doc.columns.size(); ++c) out << (c ? "," : "") << doc.columns[c];
  out << '\n';
  for (const auto& row : doc.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  return out.str();
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    parts.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

ReportDocument parse_csv(std::string_view text) {
  ReportDocument doc;
  bool header_seen = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::InvalidInput, "malformed metadata line: " + line);
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "kind") {
        doc.kind = value;
      } else if (key.rfind("config.", 0) == 0) {
        doc.config.emplace_back(key.substr(7), value);
      } else if (key.rfind("label.", 0) == 0) {
        doc.labels.emplace_back(key.substr(6), value);
      } else if (key.rfind("scalar.", 0) == 0) {
        doc.scalars.emplace_back(key.substr(7), parse_double(value));
      } else {
        throw Error(ErrorCode::InvalidInput, "unknown metadata key: " + key);
      }
    } else if (!header_seen) {
      header_seen = true;
      if (!line.empty()) doc.columns = split(line, ',');
    } else {
      std::vector<double> row;
      for (const std::string& cell : split(line, ',')) row.push_back(parse_double(cell));
      if (row.size() != doc.columns.size()) throw Error(ErrorCode::InvalidInput, "csv row width mismatch");
      doc.rows.push_back(std::move(row));
    }
  }
  if (!header_seen) throw Error(ErrorCode::InvalidInput, "csv report has no header row");
  return doc;
}

std::string serialize_json(const ReportDocument& doc) {
  Json j;
  j["kind"] = doc.kind;
  j["config"] = Json::object();
  for (const auto& [k, v] : doc.config) j["config"][k] = v;
  j["labels"] = Json::object();
  for (const auto& [k, v] : doc.labels) j["labels"][k] = v;
  j["scalars"] = Json::object();
  for (const auto& [k, v] : doc.scalars) j["scalars"][k] = v;
  j["columns"] = Json::object();
  for (std::size_t c = 0; c < doc.columns.size(); ++c) {
    Json col = Json::array();
    for (const auto& row : doc.rows) col.push_back(row[c]);
    j["columns"][doc.columns[c]] = std::move(col);
  }
  return j.dump(2) + "\n";
}

ReportDocument parse_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
    ReportDocument doc;
    doc.kind = j.at("kind").get<std::string>();
    for (const auto& [k, v] : j.at("config").items()) doc.config.emplace_back(k, v.get<std::string>());
    for (const auto& [k, v] : j.at("labels").items()) doc.labels.emplace_back(k, v.get<std::string>());
    for (const auto& [k, v] : j.at("scalars").items()) doc.scalars.emplace_back(k, v.get<double>());
    std::size_t rows = 0;
    bool first = true;
    for (const auto& [k, v] : j.at("columns").items()) {
      if (!first && v.size() != rows) throw Error(ErrorCode::InvalidInput, "json columns differ in length");
      rows = v.size();
      first = false;
      doc.columns.push_back(k);
    }
    doc.rows.assign(rows, std::vector<double>(doc.columns.size()));
    std::size_t c = 0;
    for (const auto& [k, v] : j.at("columns").items()) {
      for (std::size_t r = 0; r < rows; ++r) doc.rows[r][c] = v[r].get<double>();
      ++c;
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed json report: ") + e.what());
  }
}

}  // namespace

double lower_median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidInput, "median of an empty list");
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  return values[mid];
}

ErrorTable pose_errors(const std::vector<Pose>& pred, const std::vector<Pose>& gt) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::InvalidInput, "pose lists differ in length (" + std::to_string(pred.size()) + " vs " +
                                             std::to_string(gt.size()) + ")");
  }
  if (pred.empty()) throw Error(ErrorCode::InvalidInput, "pose lists are empty");
  ErrorTable table;
  table.frame_count = pred.size();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    table.translation_errors.push_back((pred[i].position() - gt[i].position()).norm());
    table.rotation_errors.push_back(rotation_angle_deg(pred[i].orientation(), gt[i].orientation()));
  }
  table.median_t = lower_median(table.translation_errors);
  table.median_r = lower_median(table.rotation_errors);
  return table;
}

std::string_view to_string(ReportFormat f) { return f == ReportFormat::Csv ? "csv" : "json"; }

ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw Error(ErrorCode::InvalidInput, "format must be csv or json, got '" + std::string(s) + "'");
}

double ReportDocument::scalar(std::string_view name) const {
  const auto it = find_named(scalars, name);
  if (it == scalars.end()) throw Error(ErrorCode::InvalidInput, "report has no scalar " + std::string(name));
  return it->second;
}

const std::string& ReportDocument::label(std::string_view name) const {
  const auto it = find_named(labels, name);
  if (it == labels.end()) throw Error(ErrorCode::InvalidInput, "report has no label " + std::string(name));
  return it->second;
}

std::vector<double> ReportDocument::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(ErrorCode::InvalidInput, "report has no column " + std::string(name));
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

ReportDocument to_document(const ErrorTable& table, const ConfigEcho& config) {
  ReportDocument doc;
  doc.kind = "pose_errors";
  doc.config = config;
  doc.scalars = {{"frame_count", static_cast<double>(table.frame_count)},
                 {"median_t", table.median_t},
                 {"median_r", table.median_r}};
  doc.columns = {"frame", "translation_error_m", "rotation_error_deg"};
  for (std::size_t i = 0; i < table.translation_errors.size(); ++i) {
    doc.rows.push_back({static_cast<double>(i), table.translation_errors[i], table.rotation_errors[i]});
  }
  return doc;
}

ReportDocument to_document(const AlignReport& report, const ConfigEcho& config) {
  ReportDocument doc;
  doc.kind = "align";
  doc.config = config;
  doc.labels = {{"termination", std::string(to_string(report.termination))}};
  doc.scalars = {{"converged", report.converged ? 1.0 : 0.0},
                 {"iterations", static_cast<double>(report.iterations)},
                 {"parameter_count", static_cast<double>(report.parameter_count)},
                 {"final_gradient_norm", report.final_gradient_norm}};
  add_loss(doc, report.final_loss);
  add_pose(doc, "prev", report.pose_prev);
  add_pose(doc, "curr", report.pose_curr);
  doc.columns = {"iteration", "total_loss"};
  for (std::size_t i = 0; i < report.trajectory.size(); ++i) {
    doc.rows.push_back({static_cast<double>(i), report.trajectory[i]});
  }
  return doc;
}

ReportDocument to_document(const LossBreakdown& loss, const ConfigEcho& config) {
  ReportDocument doc;
  doc.kind = "loss";
  doc.config = config;
  add_loss(doc, loss);
  return doc;
}

std::string serialize(const ReportDocument& doc, ReportFormat format) {
  for (const auto& row : doc.rows) {
    if (row.size() != doc.columns.size()) throw Error(ErrorCode::InvalidInput, "report row width mismatch");
  }
  return format == ReportFormat::Csv ? serialize_csv(doc) : serialize_json(doc);
}

ReportDocument parse_document(std::string_view text, ReportFormat format) {
  return format == ReportFormat::Csv ? parse_csv(text) : parse_json(text);
}

}  // namespace geowarp
