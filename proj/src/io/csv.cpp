#include "tvmpc/io/csv.hpp"

#include <charconv>
#include <cmath>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> columns)
    : path_(path), out_(path, std::ios::binary), columns_(columns.size()) {
  if (!out_) throw ConfigError("cannot write '" + path + "'");
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

CsvWriter::~CsvWriter() {
  if (!closed_) out_.flush();
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  require(cells.size() == columns_, "csv: row has " + std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(columns_));
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i].text;
  out_ << '\n';
}

void CsvWriter::close(const std::string& manifest_hash) {
  if (closed_) return;
  out_ << "# manifest-hash: " << manifest_hash << '\n';
  out_.close();
  closed_ = true;
}

}  // namespace tvmpc
