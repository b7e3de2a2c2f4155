#include "s3fn/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "s3fn/error.hpp"
#include "s3fn/text.hpp"

namespace s3fn {

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < classes; ++i) t += at(i, i);
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> preds, std::span<const std::size_t> truths,
                                 std::size_t classes) {
  if (preds.size() != truths.size()) {
    throw Error(Errc::shape, "confusion matrix: " + std::to_string(preds.size()) + " predictions vs " +
                                 std::to_string(truths.size()) + " truths");
  }
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(classes * classes, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= classes || truths[i] >= classes) throw Error(Errc::index, "class index out of range in confusion matrix");
    ++cm.counts[truths[i] * classes + preds[i]];
  }
  return cm;
}

EvalReport summarize(const ConfusionMatrix& cm, std::span<const std::string> names) {
  const std::size_t total = cm.total();
  if (cm.classes == 0 || total == 0) throw Error(Errc::data, "cannot summarize an empty confusion matrix");
  EvalReport r;
  r.confusion = cm;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  for (std::size_t k = 0; k < cm.classes; ++k) {
    ClassMetrics m;
    m.name = k < names.size() ? names[k] : std::to_string(k);
    const std::size_t tp = cm.at(k, k);
    for (std::size_t j = 0; j < cm.classes; ++j) {
      m.support += cm.at(k, j);
      m.predicted += cm.at(j, k);
    }
    m.precision_undefined = m.predicted == 0;
    m.recall_undefined = m.support == 0;
    m.precision = m.precision_undefined ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.predicted);
    m.recall = m.recall_undefined ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.support);
    const double pr = m.precision + m.recall;
    m.f1 = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
    r.per_class.push_back(std::move(m));
  }
  const double u = static_cast<double>(cm.classes);
  r.macro_precision /= u;
  r.macro_recall /= u;
  r.macro_f1 /= u;
  r.metadata["averaging"] = "macro";
  return r;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * v);
  return buf;
}

std::string flags(const ClassMetrics& m) {
  std::string f;
  if (m.precision_undefined) f += "precision_undefined";
  if (m.recall_undefined) f += std::string(f.empty() ? "" : "|") + "recall_undefined";
  return f.empty() ? "-" : f;
}

}  // namespace

std::string percent_row(const EvalReport& r) {
  return pct(r.macro_precision) + " " + pct(r.macro_recall) + " " + pct(r.macro_f1) + " " + pct(r.accuracy);
}

std::string format_report(const EvalReport& r, ReportFormat format) {
  std::ostringstream os;
  if (format == ReportFormat::text) {
    for (const auto& [k, v] : r.metadata) os << "# " << k << ": " << v << "\n";
    os << "PR Recall F1 ACC\n" << percent_row(r) << "\n\n";
    os << "class precision recall f1 support\n";
    for (const auto& m : r.per_class) {
      os << m.name << " " << pct(m.precision) << " " << pct(m.recall) << " " << pct(m.f1) << " " << m.support;
      if (m.precision_undefined || m.recall_undefined) os << " (" << flags(m) << ")";
      os << "\n";
    }
    os << "\nconfusion (rows = truth, cols = prediction)\n";
    for (std::size_t t = 0; t < r.confusion.classes; ++t) {
      for (std::size_t p = 0; p < r.confusion.classes; ++p) os << (p ? " " : "") << r.confusion.at(t, p);
      os << "\n";
    }
    return os.str();
  }
  os << "s3fn-report v1\n";
  for (const auto& [k, v] : r.metadata) os << "meta." << k << "=" << v << "\n";
  os << "classes=" << r.confusion.classes << "\n";
  os << "total=" << r.confusion.total() << "\n";
  os << "accuracy=" << text::format_double(r.accuracy) << "\n";
  os << "macro_precision=" << text::format_double(r.macro_precision) << "\n";
  os << "macro_recall=" << text::format_double(r.macro_recall) << "\n";
  os << "macro_f1=" << text::format_double(r.macro_f1) << "\n";
  for (const auto& m : r.per_class) {
    os << "class=" << m.name << "," << text::format_double(m.precision) << "," << text::format_double(m.recall) << ","
       << text::format_double(m.f1) << "," << m.support << "," << m.predicted << "," << flags(m) << "\n";
  }
  for (std::size_t t = 0; t < r.confusion.classes; ++t) {
    os << "confusion=";
    for (std::size_t p = 0; p < r.confusion.classes; ++p) os << (p ? "," : "") << r.confusion.at(t, p);
    os << "\n";
  }
  return os.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format) {
  text::write_file(path, format_report(report, format));
}

EvalReport read_report(const std::filesystem::path& path) {
  const auto lines = text::read_lines(path);
  if (lines.empty() || lines[0] != "s3fn-report v1") throw Error(Errc::format, path.string() + ": not an s3fn-report v1 file");
  EvalReport r;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::format, path.string() + ": malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string_view value = std::string_view(line).substr(eq + 1);
    if (key.starts_with("meta.")) {
      r.metadata[key.substr(5)] = std::string(value);
    } else if (key == "classes") {
      r.confusion.classes = static_cast<std::size_t>(text::parse_int(value));
    } else if (key == "total") {
      // derived from the confusion rows
    } else if (key == "accuracy") {
      r.accuracy = text::parse_double(value);
    } else if (key == "macro_precision") {
      r.macro_precision = text::parse_double(value);
    } else if (key == "macro_recall") {
      r.macro_recall = text::parse_double(value);
    } else if (key == "macro_f1") {
      r.macro_f1 = text::parse_double(value);
    } else if (key == "class") {
      const auto f = text::split(value, ',');
      if (f.size() != 7) throw Error(Errc::format, path.string() + ": malformed class row");
      ClassMetrics m;
      m.name = std::string(f[0]);
      m.precision = text::parse_double(f[1]);
      m.recall = text::parse_double(f[2]);
      m.f1 = text::parse_double(f[3]);
      m.support = static_cast<std::size_t>(text::parse_int(f[4]));
      m.predicted = static_cast<std::size_t>(text::parse_int(f[5]));
      m.precision_undefined = f[6].find("precision_undefined") != std::string_view::npos;
      m.recall_undefined = f[6].find("recall_undefined") != std::string_view::npos;
      r.per_class.push_back(std::move(m));
    } else if (key == "confusion") {
      for (auto tok : text::split(value, ',')) r.confusion.counts.push_back(static_cast<std::size_t>(text::parse_int(tok)));
    } else {
      throw Error(Errc::format, path.string() + ": unknown key '" + key + "'");
    }
  }
  if (r.confusion.counts.size() != r.confusion.classes * r.confusion.classes) {
    throw Error(Errc::format, path.string() + ": confusion matrix size does not match class count");
  }
  return r;
}

}  // namespace s3fn
