#pragma once

// Accuracy tables in the layout of the usual few-shot results tables: one
// table per dataset, one row per head (Method | Training Method), one column
// per K-way N-shot setting, cells as "mean ± ci95" in percent.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fsk/eval_runner.hpp"

namespace fsk {

enum class ReportFormat { text, markdown, json };

inline std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "text") return ReportFormat::text;
  if (text == "markdown") return ReportFormat::markdown;
  if (text == "json") return ReportFormat::json;
  return std::nullopt;
}

inline std::string_view method_name(HeadKind head) {
  switch (head) {
    case HeadKind::protonet: return "ProtoNet";
    case HeadKind::simpleshot: return "SimpleShot";
    case HeadKind::laplacianshot: return "LaplacianShot";
    case HeadKind::deepemd: return "DeepEMD";
    case HeadKind::deepbdc: return "DeepBDC";
  }
  return "";
}

/// Episodic-training heads versus heads on a standard cross-entropy backbone.
inline std::string_view training_method(HeadKind head) {
  return (head == HeadKind::simpleshot || head == HeadKind::laplacianshot) ? "Standard" : "Episodic";
}

namespace detail {

// Table row order.
inline constexpr HeadKind kReportOrder[] = {HeadKind::protonet, HeadKind::deepemd, HeadKind::deepbdc,
                                            HeadKind::simpleshot, HeadKind::laplacianshot};

using Setting = std::pair<std::uint32_t, std::uint32_t>;  // (ways, shots)

struct DatasetTable {
  std::string name;
  std::vector<Setting> columns;
  std::vector<HeadKind> heads;
  std::map<std::pair<HeadKind, Setting>, const BenchmarkResult*> cells;
};

inline std::vector<DatasetTable> group(const std::vector<BenchmarkResult>& results) {
  std::vector<DatasetTable> tables;
  for (const auto& r : results) {
    auto it = std::find_if(tables.begin(), tables.end(), [&](const auto& t) { return t.name == r.dataset; });
    if (it == tables.end()) {
      tables.push_back({r.dataset, {}, {}, {}});
      it = std::prev(tables.end());
    }
    const Setting s{r.spec.ways, r.spec.shots};
    if (std::find(it->columns.begin(), it->columns.end(), s) == it->columns.end()) it->columns.push_back(s);
    if (std::find(it->heads.begin(), it->heads.end(), r.head) == it->heads.end()) it->heads.push_back(r.head);
    it->cells[{r.head, s}] = &r;  // later results win
  }
  for (auto& t : tables) {
    std::sort(t.columns.begin(), t.columns.end());
    std::vector<HeadKind> ordered;
    for (auto h : kReportOrder)
      if (std::find(t.heads.begin(), t.heads.end(), h) != t.heads.end()) ordered.push_back(h);
    t.heads = std::move(ordered);
  }
  return tables;
}

inline std::string column_title(const Setting& s) {
  return std::to_string(s.first) + "-way " + std::to_string(s.second) + "-shot";
}

inline std::string cell_text(const BenchmarkResult* r) {
  if (r == nullptr) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f ± %.1f", 100.0 * r->mean_accuracy, 100.0 * r->ci95_halfwidth);
  return buf;
}

// Display width, counting UTF-8 code points.
inline std::size_t width(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

inline std::vector<std::vector<std::string>> rows_of(const DatasetTable& t) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Method", "Training Method"};
  for (const auto& c : t.columns) header.push_back(column_title(c));
  rows.push_back(std::move(header));
  for (auto h : t.heads) {
    std::vector<std::string> row{std::string(method_name(h)), std::string(training_method(h))};
    for (const auto& c : t.columns) {
      const auto it = t.cells.find({h, c});
      row.push_back(cell_text(it == t.cells.end() ? nullptr : it->second));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline std::string emit_report(const std::vector<BenchmarkResult>& results, ReportFormat format) {
  const auto tables = detail::group(results);
  std::ostringstream out;

  if (format == ReportFormat::json) {
    nlohmann::ordered_json doc;
    doc["datasets"] = nlohmann::ordered_json::array();
    for (const auto& t : tables) {
      nlohmann::ordered_json jt;
      jt["name"] = t.name;
      jt["columns"] = nlohmann::ordered_json::array();
      for (const auto& c : t.columns) jt["columns"].push_back(detail::column_title(c));
      jt["rows"] = nlohmann::ordered_json::array();
      for (auto h : t.heads) {
        nlohmann::ordered_json row;
        row["head"] = std::string(head_name(h));
        row["method"] = std::string(method_name(h));
        row["training"] = std::string(training_method(h));
        row["cells"] = nlohmann::ordered_json::array();
        for (const auto& c : t.columns) {
          const auto it = t.cells.find({h, c});
          if (it == t.cells.end()) {
            row["cells"].push_back(nullptr);
            continue;
          }
          const auto& r = *it->second;
          nlohmann::ordered_json cell;
          cell["ways"] = c.first;
          cell["shots"] = c.second;
          cell["episodes"] = r.episodes;
          cell["mean_pct"] = 100.0 * r.mean_accuracy;
          cell["ci95_pct"] = 100.0 * r.ci95_halfwidth;
          row["cells"].push_back(std::move(cell));
        }
        jt["rows"].push_back(std::move(row));
      }
      doc["datasets"].push_back(std::move(jt));
    }
    return doc.dump(2) + "\n";
  }

  for (std::size_t ti = 0; ti < tables.size(); ++ti) {
    const auto rows = detail::rows_of(tables[ti]);
    if (ti > 0) out << '\n';
    if (format == ReportFormat::markdown) {
      out << "### " << tables[ti].name << "\n\n";
      for (std::size_t r = 0; r < rows.size(); ++r) {
        out << '|';
        for (const auto& cell : rows[r]) out << ' ' << cell << " |";
        out << '\n';
        if (r == 0) {
          out << '|';
          for (std::size_t c = 0; c < rows[r].size(); ++c) out << (c < 2 ? " --- |" : " ---: |");
          out << '\n';
        }
      }
      continue;
    }
    std::vector<std::size_t> widths(rows.front().size(), 0);
    for (const auto& row : rows)
      for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], detail::width(row[c]));
    out << "Dataset: " << tables[ti].name << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        if (c > 0) out << " | ";
        out << rows[r][c];
        if (c + 1 < rows[r].size()) out << std::string(widths[c] - detail::width(rows[r][c]), ' ');
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace fsk
