#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace s3fn {

/// Rows are truth, columns are prediction.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::size_t> counts;

  std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * classes + pred]; }
  std::size_t total() const;
  std::size_t trace() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const std::size_t> preds, std::span<const std::size_t> truths,
                                 std::size_t classes);

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;    // actual count
  std::size_t predicted = 0;  // predicted count
  // Zero-division cases are scored 0 and flagged here.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

struct EvalReport {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  ConfusionMatrix confusion;
  /// mode, encoder, seed, averaging, ...
  std::map<std::string, std::string> metadata;
};

/// Macro-averaged precision / recall / F1 and accuracy = trace / total.
/// `names` (optional) labels the per-class rows.
EvalReport summarize(const ConfusionMatrix& cm, std::span<const std::string> names = {});

enum class ReportFormat { text, machine };

/// Text: one-decimal percentages in the column order PR, Recall, F1, ACC.
/// Machine: `s3fn-report v1` key=value lines plus per-class rows; exact round trip.
void write_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format);
std::string format_report(const EvalReport& report, ReportFormat format);
EvalReport read_report(const std::filesystem::path& path);

/// "PR Recall F1 ACC" row, e.g. "94.7 95.0 94.8 94.7".
std::string percent_row(const EvalReport& report);

}  // namespace s3fn
