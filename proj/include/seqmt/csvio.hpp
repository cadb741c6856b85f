#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqmt {

// Shortest round-trippable decimal form, '.' separator, no locale surprises.
inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// CSV emitter with '# key: value' metadata lines ahead of the header row.
// Output is LF-only and depends only on the written values, so identical
// inputs reproduce files byte for byte.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  void metadata(const std::string& key, const std::string& value) {
    if (header_written_)
      throw std::logic_error("CsvWriter: metadata must precede the header");
    out_ << "# " << key << ": " << value << "\n";
  }

  void header(const std::vector<std::string>& columns) {
    header_written_ = true;
    write_row(columns);
  }

  void row(const std::vector<std::string>& cells) {
    if (!header_written_)
      throw std::logic_error("CsvWriter: header before rows");
    write_row(cells);
  }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("CsvWriter: write failure on close");
  }

 private:
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
  bool header_written_ = false;
};

}  // namespace seqmt
