#pragma once

// Pose-error tables and serialization of run results.
//
// Every report is first flattened into a ReportDocument (labels, scalars and
// equal-length numeric columns) so CSV and JSON carry identical numbers.
// CSV layout: "# key=value" metadata lines, then one header row and the
// column rows. Numbers are printed with 17 significant digits.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geowarp/align.hpp"
#include "geowarp/geometry.hpp"
#include "geowarp/loss.hpp"

namespace geowarp {

struct ErrorTable {
  std::vector<double> translation_errors;  // meters
  std::vector<double> rotation_errors;     // degrees
  double median_t = 0.0;
  double median_r = 0.0;
  std::size_t frame_count = 0;
};

/// Lower-middle order statistic: sorted[(n - 1) / 2]. Throws InvalidInput on
/// an empty list.
double lower_median(std::vector<double> values);

/// Throws InvalidInput on length mismatch or empty input.
ErrorTable pose_errors(const std::vector<Pose>& pred, const std::vector<Pose>& gt);

enum class ReportFormat { Csv, Json };

std::string_view to_string(ReportFormat f);
/// Accepts "csv" / "json"; throws InvalidInput otherwise.
ReportFormat parse_report_format(std::string_view s);

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

struct ReportDocument {
  std::string kind;
  ConfigEcho config;
  std::vector<std::pair<std::string, std::string>> labels;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // each row has columns.size() entries

  /// Scalar lookup; throws InvalidInput when absent.
  double scalar(std::string_view name) const;
  const std::string& label(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;
};

ReportDocument to_document(const ErrorTable& table, const ConfigEcho& config = {});
ReportDocument to_document(const AlignReport& report, const ConfigEcho& config = {});
ReportDocument to_document(const LossBreakdown& loss, const ConfigEcho& config = {});

std::string serialize(const ReportDocument& doc, ReportFormat format);
/// Inverse of serialize. Throws InvalidInput on malformed text.
ReportDocument parse_document(std::string_view text, ReportFormat format);

template <typename T>
std::string emit_report(const T& value, ReportFormat format, const ConfigEcho& config = {}) {
  return serialize(to_document(value, config), format);
}

}  // namespace geowarp
