#include "equil/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace equil {

namespace {

[[noreturn]] void parse_fail(long line, const std::string& msg) {
  throw std::runtime_error("matrix market: line " + std::to_string(line) +
                           ": " + msg);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct LineReader {
  std::istream& in;
  long line_no = 0;

  bool next(std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      if (!out.empty() && out.back() == '\r') out.pop_back();
      return true;
    }
    return false;
  }
};

bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && tok.size() > 0;
}

bool parse_index(const std::string& tok, long long& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtoll(begin, &end, 10);
  return end == begin + tok.size() && tok.size() > 0;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

}  // namespace

ExplicitMatrix read_matrix_market(std::istream& in) {
  LineReader reader{in};
  std::string line;
  if (!reader.next(line)) parse_fail(1, "empty input");

  auto header = tokens(line);
  if (header.size() != 5 || lower(header[0]) != "%%matrixmarket") {
    parse_fail(reader.line_no,
               "expected header '%%MatrixMarket matrix <format> real general'");
  }
  if (lower(header[1]) != "matrix") {
    parse_fail(reader.line_no, "unsupported object '" + header[1] + "'");
  }
  std::string format = lower(header[2]);
  if (format != "coordinate" && format != "array") {
    parse_fail(reader.line_no, "unsupported format '" + header[2] + "'");
  }
  if (lower(header[3]) != "real") {
    parse_fail(reader.line_no, "unsupported field '" + header[3] +
                                   "' (only real is accepted)");
  }
  if (lower(header[4]) != "general") {
    parse_fail(reader.line_no, "unsupported symmetry '" + header[4] +
                                   "' (only general is accepted)");
  }

  // Skip comments, then read the size line.
  for (;;) {
    if (!reader.next(line)) parse_fail(reader.line_no + 1, "missing size line");
    if (!line.empty() && line[0] == '%') continue;
    if (tokens(line).empty()) continue;
    break;
  }
  auto size_toks = tokens(line);

  if (format == "coordinate") {
    if (size_toks.size() != 3) {
      parse_fail(reader.line_no, "coordinate size line needs 'rows cols nnz'");
    }
    long long m = 0, n = 0, nnz = 0;
    if (!parse_index(size_toks[0], m) || !parse_index(size_toks[1], n) ||
        !parse_index(size_toks[2], nnz) || m <= 0 || n <= 0 || nnz < 0) {
      parse_fail(reader.line_no, "invalid size line '" + line + "'");
    }

    std::vector<ExplicitMatrix::Entry> entries;
    std::vector<long> entry_lines;
    entries.reserve(static_cast<std::size_t>(nnz));
    while (static_cast<long long>(entries.size()) < nnz) {
      if (!reader.next(line)) {
        parse_fail(reader.line_no + 1,
                   "unexpected end of file: expected " + std::to_string(nnz) +
                       " entries, found " + std::to_string(entries.size()));
      }
      if (!line.empty() && line[0] == '%') continue;
      auto toks = tokens(line);
      if (toks.empty()) continue;
      if (toks.size() != 3) {
        parse_fail(reader.line_no, "entry line needs 'row col value'");
      }
      long long i = 0, j = 0;
      double v = 0.0;
      if (!parse_index(toks[0], i) || !parse_index(toks[1], j) ||
          !parse_double(toks[2], v)) {
        parse_fail(reader.line_no, "malformed entry '" + line + "'");
      }
      if (i < 1 || i > m || j < 1 || j > n) {
        parse_fail(reader.line_no, "index (" + std::to_string(i) + ", " +
                                       std::to_string(j) + ") out of range");
      }
      entries.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1),
                         v});
      entry_lines.push_back(reader.line_no);
    }
    while (reader.next(line)) {
      if (line.empty() || line[0] == '%' || tokens(line).empty()) continue;
      parse_fail(reader.line_no, "trailing data after " + std::to_string(nnz) +
                                     " declared entries");
    }

    // Report duplicates with the line of the later occurrence.
    std::vector<std::size_t> order(entries.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (entries[a].row != entries[b].row)
        return entries[a].row < entries[b].row;
      if (entries[a].col != entries[b].col)
        return entries[a].col < entries[b].col;
      return entry_lines[a] < entry_lines[b];
    });
    for (std::size_t k = 1; k < order.size(); ++k) {
      const auto& prev = entries[order[k - 1]];
      const auto& cur = entries[order[k]];
      if (prev.row == cur.row && prev.col == cur.col) {
        parse_fail(entry_lines[order[k]],
                   "duplicate entry (" + std::to_string(cur.row + 1) + ", " +
                       std::to_string(cur.col + 1) + ")");
      }
    }
    return ExplicitMatrix::sparse(static_cast<Index>(m),
                                  static_cast<Index>(n), std::move(entries));
  }

  // Array format: column-major dense values, one per line.
  if (size_toks.size() != 2) {
    parse_fail(reader.line_no, "array size line needs 'rows cols'");
  }
  long long m = 0, n = 0;
  if (!parse_index(size_toks[0], m) || !parse_index(size_toks[1], n) ||
      m <= 0 || n <= 0) {
    parse_fail(reader.line_no, "invalid size line '" + line + "'");
  }
  Mat values(m, n);
  long long count = 0;
  const long long total = m * n;
  while (count < total) {
    if (!reader.next(line)) {
      parse_fail(reader.line_no + 1,
                 "unexpected end of file: expected " + std::to_string(total) +
                     " values, found " + std::to_string(count));
    }
    if (!line.empty() && line[0] == '%') continue;
    auto toks = tokens(line);
    if (toks.empty()) continue;
    for (const auto& tok : toks) {
      if (count >= total) {
        parse_fail(reader.line_no, "more values than rows*cols");
      }
      double v = 0.0;
      if (!parse_double(tok, v)) {
        parse_fail(reader.line_no, "malformed value '" + tok + "'");
      }
      values(count % m, count / m) = v;
      ++count;
    }
  }
  while (reader.next(line)) {
    if (line.empty() || line[0] == '%' || tokens(line).empty()) continue;
    parse_fail(reader.line_no, "trailing data after rows*cols values");
  }
  return ExplicitMatrix::dense(std::move(values));
}

ExplicitMatrix read_matrix_market_file(const std::string& path) {
  std::ifstream in(path);
  detail::check(in.good(), "matrix market: cannot open '" + path + "'");
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const ExplicitMatrix& A) {
  char buf[64];
  if (A.is_sparse()) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.rows() << " " << A.cols() << " " << A.stored_entries() << "\n";
    A.for_each_entry([&](Index i, Index j, double v) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << (i + 1) << " " << (j + 1) << " " << buf << "\n";
    });
  } else {
    out << "%%MatrixMarket matrix array real general\n";
    out << A.rows() << " " << A.cols() << "\n";
    const Mat dense = A.to_dense();
    for (Index j = 0; j < A.cols(); ++j) {
      for (Index i = 0; i < A.rows(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", dense(i, j));
        out << buf << "\n";
      }
    }
  }
  detail::check(out.good(), "matrix market: write failed");
}

void write_matrix_market_file(const std::string& path,
                              const ExplicitMatrix& A) {
  std::ofstream out(path);
  detail::check(out.good(), "matrix market: cannot open '" + path +
                                "' for writing");
  write_matrix_market(out, A);
}

}  // namespace equil
