// Copyright 2026 The TRIQA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "triqa/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "triqa/errors.hpp"
#include "triqa/metrics.hpp"
#include "triqa/plot.hpp"

namespace triqa {

using nlohmann::json;

namespace {

template <typename F>
std::vector<double> collect(const DatasetResult& d, F field) {
  std::vector<double> out;
  for (const auto& it : d.iterations) out.push_back(field(it));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("invalid number '" + s + "' in report");
  }
  return v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text(const std::filesystem::path& out, const std::string& text) {
  if (out.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(out.parent_path(), ec);
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw DataError("cannot write " + out.string());
  f << text;
  if (!f) throw DataError("failed writing " + out.string());
}

std::string fixed3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

std::string pad(const std::string& s, size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

double DatasetResult::median_srcc() const {
  return median(collect(*this, [](const EvalIteration& i) { return i.srcc; }));
}
double DatasetResult::median_plcc() const {
  return median(collect(*this, [](const EvalIteration& i) { return i.plcc; }));
}
double DatasetResult::std_srcc() const {
  return stddev(collect(*this, [](const EvalIteration& i) { return i.srcc; }));
}
double DatasetResult::std_plcc() const {
  return stddev(collect(*this, [](const EvalIteration& i) { return i.plcc; }));
}
std::optional<double> DatasetResult::median_plcc_logistic() const {
  std::vector<double> v;
  for (const auto& it : iterations) {
    if (it.plcc_logistic) v.push_back(*it.plcc_logistic);
  }
  if (v.empty()) return std::nullopt;
  return median(v);
}

std::optional<double> EvalReport::average_srcc() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& d : datasets) {
    if (d.iterations.empty()) continue;
    sum += d.median_srcc();
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<double> EvalReport::average_plcc() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& d : datasets) {
    if (d.iterations.empty()) continue;
    sum += d.median_plcc();
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

void EvalReport::validate() const {
  if (datasets.empty()) throw UsageError("report contains no datasets");
  for (const auto& d : datasets) {
    if (d.iterations.empty() && d.degenerate.empty()) {
      throw UsageError("report for dataset '" + d.dataset +
                       "' has no iterations; nothing to summarize");
    }
    for (const auto& it : d.iterations) {
      if (it.predictions.size() != it.targets.size()) {
        throw UsageError("report for dataset '" + d.dataset +
                         "' has mismatched prediction and target lists");
      }
    }
  }
}

DatasetResult evaluate_features(const FeatureMatrix& features, const std::vector<double>& mos,
                                const std::string& dataset, const SplitProtocol& protocol,
                                const SvrGrid& grid, const FitObserver* observer) {
  const ProtocolResult pr = run_protocol(features.values, mos, protocol, grid, observer);
  DatasetResult d;
  d.dataset = dataset;
  d.rows = static_cast<int64_t>(mos.size());
  for (const auto& r : pr.iterations) {
    EvalIteration it;
    it.srcc = r.srcc;
    it.plcc = r.plcc;
    it.plcc_logistic = r.plcc_logistic;
    it.c = r.c;
    it.epsilon = r.epsilon;
    it.predictions = r.predictions;
    for (int64_t row : r.test_rows) it.targets.push_back(mos[static_cast<size_t>(row)]);
    d.iterations.push_back(std::move(it));
  }
  return d;
}

EvalReport evaluate_nr(const DatasetTable& table, const Checkpoint& ckpt,
                       const ContentEncoder& content, const SplitProtocol& protocol,
                       const SvrGrid& grid, QualityScales scales) {
  const FeatureMatrix features =
      extract_feature_matrix(table.paths(), table.names(), ckpt, content, scales);
  EvalReport report;
  report.kind = "nr";
  report.protocol = protocol;
  report.checkpoint_fingerprint = ckpt.fingerprint();
  report.content_fingerprint = content.fingerprint();
  report.features_fingerprint = features.fingerprint();
  report.datasets.push_back(evaluate_features(features, table.mos(), table.name, protocol, grid));
  return report;
}

EvalReport evaluate_fr_report(const std::vector<DatasetTable>& tables, const Checkpoint& ckpt,
                              const FROptions& options) {
  EvalReport report;
  report.kind = "fr";
  report.protocol.iterations = 1;
  report.protocol.logistic_fit = options.logistic_fit;
  report.checkpoint_fingerprint = ckpt.fingerprint();
  for (const auto& table : tables) {
    const FRDatasetResult r = evaluate_fr(table, ckpt, options);
    if (r.checkpoint_after != r.checkpoint_before) {
      throw NumericalError("checkpoint changed during full-reference evaluation");
    }
    DatasetResult d;
    d.dataset = table.name;
    d.rows = static_cast<int64_t>(r.scores.size());
    if (r.degenerate()) {
      d.degenerate = r.degenerate_reason;
    } else {
      EvalIteration it;
      it.srcc = *r.srcc;
      it.plcc = *r.plcc;
      it.plcc_logistic = r.plcc_logistic;
      for (const auto& s : r.scores) it.predictions.push_back(s.value);
      it.targets = r.mos;
      d.iterations.push_back(std::move(it));
    }
    report.datasets.push_back(std::move(d));
  }
  return report;
}

double percent_delta(double with, double without) {
  if (without == 0.0) throw NumericalError("percentage change relative to zero");
  return 100.0 * (with - without) / without;
}

AblationReport compare_reports(const EvalReport& with, const EvalReport& without) {
  with.validate();
  without.validate();
  const auto& a = with.protocol;
  const auto& b = without.protocol;
  if (a.train_fraction != b.train_fraction || a.iterations != b.iterations ||
      a.seed != b.seed || a.large != b.large || a.logistic_fit != b.logistic_fit ||
      with.kind != without.kind) {
    throw UsageError("ablation reports were produced under different protocols");
  }
  if (with.datasets.size() != without.datasets.size()) {
    throw UsageError("ablation reports cover different datasets");
  }
  AblationReport out{with, without, {}};
  for (size_t i = 0; i < with.datasets.size(); ++i) {
    const auto& dw = with.datasets[i];
    const auto& dn = without.datasets[i];
    if (dw.dataset != dn.dataset) throw UsageError("ablation reports cover different datasets");
    if (!dw.degenerate.empty() || !dn.degenerate.empty()) continue;
    AblationRow row;
    row.dataset = dw.dataset;
    row.srcc_with = dw.median_srcc();
    row.srcc_without = dn.median_srcc();
    row.srcc_delta = percent_delta(row.srcc_with, row.srcc_without);
    row.plcc_with = dw.median_plcc();
    row.plcc_without = dn.median_plcc();
    row.plcc_delta = percent_delta(row.plcc_with, row.plcc_without);
    out.rows.push_back(row);
  }
  return out;
}

AblationReport run_ablation(const DatasetTable& table, const Checkpoint& ckpt_with,
                            const Checkpoint& ckpt_without, const ContentEncoder& content,
                            const SplitProtocol& protocol, const SvrGrid& grid,
                            QualityScales scales) {
  return compare_reports(evaluate_nr(table, ckpt_with, content, protocol, grid, scales),
                         evaluate_nr(table, ckpt_without, content, protocol, grid, scales));
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "table-text") return ReportFormat::kTableText;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  if (name == "plots") return ReportFormat::kPlots;
  throw UsageError("unknown report format '" + std::string(name) +
                   "' (expected json, csv, table-text or plots)");
}

std::string_view to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::kTableText:
      return "table-text";
    case ReportFormat::kCsv:
      return "csv";
    case ReportFormat::kJson:
      return "json";
    case ReportFormat::kPlots:
      return "plots";
  }
  return "json";
}

// ---- JSON ----

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json protocol_json(const SplitProtocol& p) {
  return {{"train_fraction", p.train_fraction},
          {"iterations", p.iterations},
          {"seed", p.seed},
          {"large", p.large},
          {"logistic_fit", p.logistic_fit}};
}

SplitProtocol protocol_from(const json& j) {
  SplitProtocol p;
  p.train_fraction = j.at("train_fraction").get<double>();
  p.iterations = j.at("iterations").get<int>();
  p.seed = j.at("seed").get<uint64_t>();
  p.large = j.at("large").get<bool>();
  p.logistic_fit = j.at("logistic_fit").get<bool>();
  return p;
}

json report_json(const EvalReport& r) {
  json datasets = json::array();
  for (const auto& d : r.datasets) {
    json iters = json::array();
    for (const auto& it : d.iterations) {
      iters.push_back({{"srcc", it.srcc},
                       {"plcc", it.plcc},
                       {"plcc_logistic", opt(it.plcc_logistic)},
                       {"c", opt(it.c)},
                       {"epsilon", opt(it.epsilon)},
                       {"predictions", it.predictions},
                       {"targets", it.targets}});
    }
    json entry{{"name", d.dataset}, {"rows", d.rows}, {"iterations", iters}};
    if (!d.degenerate.empty()) {
      entry["degenerate"] = d.degenerate;
      entry["srcc"] = nullptr;
      entry["plcc"] = nullptr;
    } else {
      entry["srcc"] = {{"median", d.median_srcc()}, {"std", d.std_srcc()}};
      entry["plcc"] = {{"median", d.median_plcc()}, {"std", d.std_plcc()}};
      entry["plcc_logistic_median"] = opt(d.median_plcc_logistic());
    }
    datasets.push_back(entry);
  }
  return {{"format", "triqa-report"},
          {"schema_version", EvalReport::kSchemaVersion},
          {"method", r.method},
          {"kind", r.kind},
          {"protocol", protocol_json(r.protocol)},
          {"checkpoint_fingerprint", r.checkpoint_fingerprint},
          {"content_fingerprint", r.content_fingerprint},
          {"features_fingerprint", r.features_fingerprint},
          {"datasets", datasets},
          {"average", {{"srcc", opt(r.average_srcc())}, {"plcc", opt(r.average_plcc())}}}};
}

EvalReport report_from(const json& j) {
  if (j.at("format").get<std::string>() != "triqa-report") {
    throw DataError("not a triqa report");
  }
  if (j.at("schema_version").get<int>() != EvalReport::kSchemaVersion) {
    throw DataError("unsupported report schema version");
  }
  EvalReport r;
  r.method = j.at("method").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.protocol = protocol_from(j.at("protocol"));
  r.checkpoint_fingerprint = j.at("checkpoint_fingerprint").get<std::string>();
  r.content_fingerprint = j.at("content_fingerprint").get<std::string>();
  r.features_fingerprint = j.at("features_fingerprint").get<std::string>();
  for (const auto& e : j.at("datasets")) {
    DatasetResult d;
    d.dataset = e.at("name").get<std::string>();
    d.rows = e.at("rows").get<int64_t>();
    if (e.contains("degenerate")) d.degenerate = e.at("degenerate").get<std::string>();
    for (const auto& i : e.at("iterations")) {
      EvalIteration it;
      it.srcc = i.at("srcc").get<double>();
      it.plcc = i.at("plcc").get<double>();
      it.plcc_logistic = opt_from(i, "plcc_logistic");
      it.c = opt_from(i, "c");
      it.epsilon = opt_from(i, "epsilon");
      it.predictions = i.at("predictions").get<std::vector<double>>();
      it.targets = i.at("targets").get<std::vector<double>>();
      d.iterations.push_back(std::move(it));
    }
    if (!d.iterations.empty() &&
        (e.at("srcc").at("median").get<double>() != d.median_srcc() ||
         e.at("plcc").at("median").get<double>() != d.median_plcc())) {
      throw DataError("report medians for '" + d.dataset +
                      "' do not match the stored iterations");
    }
    r.datasets.push_back(std::move(d));
  }
  return r;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  report.validate();
  return report_json(report).dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  try {
    return report_from(json::parse(text));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

// ---- CSV ----
//
// Long format, one value per line:
//   dataset,iteration,field,index,value
// Report metadata has an empty dataset; per-dataset facts an empty
// iteration; summaries use iteration "median" / "std" and are checked
// against the iterations on read.

std::string report_to_csv(const EvalReport& r) {
  r.validate();
  std::ostringstream out;
  out << "dataset,iteration,field,index,value\n";
  auto meta = [&](const std::string& field, const std::string& value) {
    out << ",," << field << ",," << csv_field(value) << '\n';
  };
  meta("format", "triqa-report");
  meta("schema_version", std::to_string(EvalReport::kSchemaVersion));
  meta("method", r.method);
  meta("kind", r.kind);
  meta("train_fraction", format_double(r.protocol.train_fraction));
  meta("iterations", std::to_string(r.protocol.iterations));
  meta("seed", std::to_string(r.protocol.seed));
  meta("large", r.protocol.large ? "1" : "0");
  meta("logistic_fit", r.protocol.logistic_fit ? "1" : "0");
  meta("checkpoint_fingerprint", r.checkpoint_fingerprint);
  meta("content_fingerprint", r.content_fingerprint);
  meta("features_fingerprint", r.features_fingerprint);
  for (const auto& d : r.datasets) {
    const std::string name = csv_field(d.dataset);
    out << name << ",,rows,," << d.rows << '\n';
    if (!d.degenerate.empty()) out << name << ",,degenerate,," << csv_field(d.degenerate) << '\n';
    for (size_t k = 0; k < d.iterations.size(); ++k) {
      const auto& it = d.iterations[k];
      auto row = [&](const std::string& field, double v) {
        out << name << ',' << k << ',' << field << ",," << format_double(v) << '\n';
      };
      row("srcc", it.srcc);
      row("plcc", it.plcc);
      if (it.plcc_logistic) row("plcc_logistic", *it.plcc_logistic);
      if (it.c) row("c", *it.c);
      if (it.epsilon) row("epsilon", *it.epsilon);
      for (size_t i = 0; i < it.predictions.size(); ++i) {
        out << name << ',' << k << ",prediction," << i << ','
            << format_double(it.predictions[i]) << '\n';
        out << name << ',' << k << ",target," << i << ',' << format_double(it.targets[i])
            << '\n';
      }
    }
    if (!d.iterations.empty()) {
      out << name << ",median,srcc,," << format_double(d.median_srcc()) << '\n';
      out << name << ",median,plcc,," << format_double(d.median_plcc()) << '\n';
      out << name << ",std,srcc,," << format_double(d.std_srcc()) << '\n';
      out << name << ",std,plcc,," << format_double(d.std_plcc()) << '\n';
    }
  }
  return out.str();
}

EvalReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "dataset,iteration,field,index,value") {
    throw DataError("report CSV lacks the expected header");
  }
  EvalReport r;
  std::map<std::string, std::string> meta;
  std::map<std::string, size_t> index_of;
  std::vector<std::pair<std::string, double>> checks;  // "dataset\x1fmedian\x1fsrcc"
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) {
      throw DataError("report CSV line " + std::to_string(line_no) + " has " +
                      std::to_string(f.size()) + " fields");
    }
    const auto& [ds, iter, field, idx, value] = std::tie(f[0], f[1], f[2], f[3], f[4]);
    if (ds.empty()) {
      meta[field] = value;
      continue;
    }
    if (!index_of.contains(ds)) {
      index_of[ds] = r.datasets.size();
      r.datasets.push_back({});
      r.datasets.back().dataset = ds;
    }
    DatasetResult& d = r.datasets[index_of[ds]];
    if (iter.empty()) {
      if (field == "rows") {
        d.rows = std::stoll(value);
      } else if (field == "degenerate") {
        d.degenerate = value;
      }
      continue;
    }
    if (iter == "median" || iter == "std") {
      checks.emplace_back(ds + '\x1f' + iter + '\x1f' + field, parse_double(value));
      continue;
    }
    const size_t k = std::stoul(iter);
    if (k >= d.iterations.size()) d.iterations.resize(k + 1);
    EvalIteration& it = d.iterations[k];
    const double v = parse_double(value);
    if (field == "srcc") {
      it.srcc = v;
    } else if (field == "plcc") {
      it.plcc = v;
    } else if (field == "plcc_logistic") {
      it.plcc_logistic = v;
    } else if (field == "c") {
      it.c = v;
    } else if (field == "epsilon") {
      it.epsilon = v;
    } else if (field == "prediction" || field == "target") {
      auto& vec = field == "prediction" ? it.predictions : it.targets;
      const size_t i = std::stoul(idx);
      if (i >= vec.size()) vec.resize(i + 1);
      vec[i] = v;
    } else {
      throw DataError("unknown report field '" + field + "'");
    }
  }
  try {
    if (meta.at("format") != "triqa-report") throw DataError("not a triqa report");
    if (std::stoi(meta.at("schema_version")) != EvalReport::kSchemaVersion) {
      throw DataError("unsupported report schema version");
    }
    r.method = meta.at("method");
    r.kind = meta.at("kind");
    r.protocol.train_fraction = parse_double(meta.at("train_fraction"));
    r.protocol.iterations = std::stoi(meta.at("iterations"));
    r.protocol.seed = std::stoull(meta.at("seed"));
    r.protocol.large = meta.at("large") == "1";
    r.protocol.logistic_fit = meta.at("logistic_fit") == "1";
    r.checkpoint_fingerprint = meta.at("checkpoint_fingerprint");
    r.content_fingerprint = meta.at("content_fingerprint");
    r.features_fingerprint = meta.at("features_fingerprint");
  } catch (const std::out_of_range&) {
    throw DataError("report CSV is missing metadata");
  }
  for (const auto& [key, value] : checks) {
    const auto a = key.find('\x1f'), b = key.rfind('\x1f');
    const DatasetResult& d = r.datasets[index_of[key.substr(0, a)]];
    const std::string stat = key.substr(a + 1, b - a - 1), metric = key.substr(b + 1);
    const double expect = stat == "median" ? (metric == "srcc" ? d.median_srcc() : d.median_plcc())
                                           : (metric == "srcc" ? d.std_srcc() : d.std_plcc());
    if (expect != value) {
      throw DataError("report " + stat + " for '" + d.dataset +
                      "' does not match the stored iterations");
    }
  }
  return r;
}

// ---- Table text ----

std::string report_to_table(const EvalReport& r) {
  r.validate();
  const bool show_std = r.kind == "nr" && r.protocol.effective_iterations() > 1;
  const size_t cell = show_std ? 30 : 16;
  std::vector<std::string> names;
  for (const auto& d : r.datasets) names.push_back(d.dataset);
  names.push_back("Average");

  std::ostringstream out;
  out << pad("Method", 10);
  for (const auto& n : names) out << "| " << pad(n, cell);
  out << '\n' << pad("", 10);
  for (size_t i = 0; i < names.size(); ++i) {
    out << "| " << pad(pad("SRCC", cell / 2) + "PLCC", cell);
  }
  out << '\n' << std::string(10 + names.size() * (cell + 2), '-') << '\n';
  out << pad(r.method, 10);
  for (const auto& d : r.datasets) {
    std::string s, p;
    if (!d.degenerate.empty()) {
      s = p = "n/a";
    } else {
      s = fixed3(d.median_srcc());
      p = fixed3(d.median_plcc());
      if (show_std) {
        s += " (" + fixed3(d.std_srcc()) + ")";
        p += " (" + fixed3(d.std_plcc()) + ")";
      }
    }
    out << "| " << pad(pad(s, cell / 2) + p, cell);
  }
  const auto as = r.average_srcc(), ap = r.average_plcc();
  out << "| " << pad(as ? fixed3(*as) : "n/a", cell / 2) << (ap ? fixed3(*ap) : "n/a") << '\n';
  for (const auto& d : r.datasets) {
    if (!d.degenerate.empty()) out << "note: " << d.dataset << " is degenerate (" << d.degenerate << ")\n";
  }
  if (r.kind == "nr") {
    out << "protocol: " << r.protocol.effective_iterations() << " x "
        << static_cast<int>(std::lround(100 * r.protocol.train_fraction)) << "/"
        << static_cast<int>(std::lround(100 * (1 - r.protocol.train_fraction)))
        << " splits, seed " << r.protocol.seed << ", medians with standard deviations\n";
  }
  return out.str();
}

EvalReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open report " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return path.extension() == ".csv" ? report_from_csv(buf.str()) : report_from_json(buf.str());
}

namespace {

std::string safe_name(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
  return out.empty() ? "dataset" : out;
}

// The iteration whose SRCC is closest to the median, first on ties.
const EvalIteration& representative(const DatasetResult& d) {
  const double m = d.median_srcc();
  size_t best = 0;
  for (size_t i = 1; i < d.iterations.size(); ++i) {
    if (std::abs(d.iterations[i].srcc - m) < std::abs(d.iterations[best].srcc - m)) best = i;
  }
  return d.iterations[best];
}

void emit_plots(const EvalReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create plot directory " + dir.string());
  BarChart bars;
  bars.title = r.method + " (" + r.kind + ")";
  bars.series = {"SRCC", "PLCC"};
  for (const auto& d : r.datasets) {
    if (!d.degenerate.empty()) continue;
    const auto& it = representative(d);
    ScatterPlot sp;
    sp.title = d.dataset + " SRCC " + fixed3(it.srcc) + " PLCC " + fixed3(it.plcc);
    sp.x_label = "MOS";
    sp.y_label = r.kind == "fr" ? "cosine score" : "predicted";
    sp.x = it.targets;
    sp.y = it.predictions;
    render_scatter(sp, dir / (safe_name(d.dataset) + "_scatter.png"));
    bars.groups.push_back(d.dataset);
    bars.values.push_back({d.median_srcc(), d.median_plcc()});
  }
  if (!bars.groups.empty()) render_bars(bars, dir / "summary_bars.png");
}

}  // namespace

void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& out) {
  report.validate();
  switch (format) {
    case ReportFormat::kJson:
      write_text(out, report_to_json(report));
      break;
    case ReportFormat::kCsv:
      write_text(out, report_to_csv(report));
      break;
    case ReportFormat::kTableText:
      write_text(out, report_to_table(report));
      break;
    case ReportFormat::kPlots:
      emit_plots(report, out);
      break;
  }
}

void emit_ablation(const AblationReport& report, ReportFormat format,
                   const std::filesystem::path& out) {
  report.with.validate();
  report.without.validate();
  switch (format) {
    case ReportFormat::kJson: {
      json rows = json::array();
      for (const auto& row : report.rows) {
        rows.push_back({{"dataset", row.dataset},
                        {"srcc_with", row.srcc_with},
                        {"srcc_without", row.srcc_without},
                        {"srcc_delta_percent", row.srcc_delta},
                        {"plcc_with", row.plcc_with},
                        {"plcc_without", row.plcc_without},
                        {"plcc_delta_percent", row.plcc_delta}});
      }
      json j{{"format", "triqa-ablation"},
             {"schema_version", EvalReport::kSchemaVersion},
             {"with_combined", report_json(report.with)},
             {"without_combined", report_json(report.without)},
             {"rows", rows}};
      write_text(out, j.dump(2) + "\n");
      break;
    }
    case ReportFormat::kCsv: {
      std::ostringstream s;
      s << "dataset,metric,with,without,delta_percent\n";
      for (const auto& row : report.rows) {
        s << csv_field(row.dataset) << ",srcc," << format_double(row.srcc_with) << ','
          << format_double(row.srcc_without) << ',' << format_double(row.srcc_delta) << '\n';
        s << csv_field(row.dataset) << ",plcc," << format_double(row.plcc_with) << ','
          << format_double(row.plcc_without) << ',' << format_double(row.plcc_delta) << '\n';
      }
      write_text(out, s.str());
      break;
    }
    case ReportFormat::kTableText: {
      std::ostringstream s;
      const size_t cell = 22;
      s << pad("Method", 26);
      for (const auto& row : report.rows) s << "| " << pad(row.dataset, cell);
      s << '\n' << pad("", 26);
      for (size_t i = 0; i < report.rows.size(); ++i) s << "| " << pad("SRCC       PLCC", cell);
      s << '\n' << std::string(26 + report.rows.size() * (cell + 2), '-') << '\n';
      auto line = [&](const std::string& label, auto pick_s, auto pick_p, bool pct) {
        s << pad(label, 26);
        for (const auto& row : report.rows) {
          auto fmt = [&](double v) {
            if (!pct) return fixed3(v);
            std::ostringstream t;
            t << std::showpos << std::fixed << std::setprecision(2) << v << '%';
            return t.str();
          };
          s << "| " << pad(pad(fmt(pick_s(row)), 11) + fmt(pick_p(row)), cell);
        }
        s << '\n';
      };
      line("without combined triplets", [](const AblationRow& r) { return r.srcc_without; },
           [](const AblationRow& r) { return r.plcc_without; }, false);
      line("with combined triplets", [](const AblationRow& r) { return r.srcc_with; },
           [](const AblationRow& r) { return r.plcc_with; }, false);
      line("improvement", [](const AblationRow& r) { return r.srcc_delta; },
           [](const AblationRow& r) { return r.plcc_delta; }, true);
      write_text(out, s.str());
      break;
    }
    case ReportFormat::kPlots: {
      std::error_code ec;
      std::filesystem::create_directories(out, ec);
      if (ec) throw DataError("cannot create plot directory " + out.string());
      BarChart bars;
      bars.title = "combined-triplet ablation";
      bars.series = {"SRCC without", "SRCC with", "PLCC without", "PLCC with"};
      for (const auto& row : report.rows) {
        bars.groups.push_back(row.dataset);
        bars.values.push_back({row.srcc_without, row.srcc_with, row.plcc_without, row.plcc_with});
      }
      if (!bars.groups.empty()) render_bars(bars, out / "ablation_bars.png");
      break;
    }
  }
}

}  // namespace triqa
