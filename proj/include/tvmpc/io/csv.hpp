#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace tvmpc {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Comma-separated table with a header row. Numbers are written with
/// `format_number`, so identical inputs give byte-identical files. `close`
/// appends the `# manifest-hash: <hex>` trailer.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  /// A cell is either a number or text; text must not contain commas or newlines.
  struct Cell {
    Cell(double v) : text(format_number(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(long v) : text(std::to_string(v)) {}
    Cell(std::size_t v) : text(std::to_string(v)) {}
    Cell(bool v) : text(v ? "1" : "0") {}
    Cell(std::string v) : text(std::move(v)) {}
    Cell(const char* v) : text(v) {}
    std::string text;
  };

  void row(const std::vector<Cell>& cells);
  void close(const std::string& manifest_hash);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
  bool closed_ = false;
};

}  // namespace tvmpc
