#include "medshift/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "medshift/error.hpp"

namespace medshift {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t row, const std::string& column,
                             const std::string& msg) {
  throw Error(ErrorCode::parse_error, "row " + std::to_string(row) +
                                          ", column '" + column + "': " + msg);
}

double parse_real(const std::string& field, std::size_t row,
                  const std::string& column) {
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    parse_fail(row, column, "not a finite number: '" + field + "'");
  }
  return v;
}

int parse_binary(const std::string& field, std::size_t row,
                 const std::string& column) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  parse_fail(row, column, "expected 0 or 1, got '" + field + "'");
}

}  // namespace

Dataset::Dataset(std::vector<Record> records, double sigma_u, std::string label)
    : records_(std::move(records)), sigma_u_(sigma_u), label_(std::move(label)) {
  if (!(sigma_u_ >= 0.0) || !std::isfinite(sigma_u_)) {
    throw Error(ErrorCode::validation, "sigma_u must be finite and >= 0");
  }
  if (records_.empty()) {
    throw Error(ErrorCode::validation, "dataset has no records");
  }
  bool any_y0 = false;
  bool any_y1 = false;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    Record& r = records_[i];
    const std::string where = "record " + std::to_string(i + 1) + ": ";
    if (r.y != 0 && r.y != 1) throw Error(ErrorCode::validation, where + "y not binary");
    if (r.c != 0 && r.c != 1) throw Error(ErrorCode::validation, where + "c not binary");
    if (!std::isfinite(r.assay_limit)) {
      throw Error(ErrorCode::validation, where + "assay limit not finite");
    }
    if (r.m_star) {
      if (!std::isfinite(*r.m_star)) {
        throw Error(ErrorCode::validation, where + "m_star not finite");
      }
      if (*r.m_star <= r.assay_limit) {
        r.m_star.reset();
        ++n_reclassified_;
      }
    }
    any_y0 |= r.y == 0;
    any_y1 |= r.y == 1;
  }
  if (!any_y0 || !any_y1) {
    throw Error(ErrorCode::validation,
                "outcome y must take both values 0 and 1 (probit fit is degenerate)");
  }
}

std::size_t Dataset::n_censored() const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.detected() ? 0 : 1;
  return n;
}

Dataset read_csv(std::istream& in, double sigma_u, std::string label) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::parse_error, "empty input: missing header");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_fields(line);
  const std::array<std::string, 4> names{"y", "m_star", "assay_limit", "c"};
  std::array<std::size_t, 4> col{};
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::size_t found = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == names[k]) found = j;
    }
    if (found == header.size()) {
      throw Error(ErrorCode::parse_error, "missing column '" + names[k] + "'");
    }
    col[k] = found;
  }

  std::vector<Record> records;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) {
      parse_fail(row, "*", "expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(f.size()));
    }
    Record r;
    r.y = parse_binary(f[col[0]], row, names[0]);
    const std::string& m = f[col[1]];
    if (!m.empty() && m != "NA") r.m_star = parse_real(m, row, names[1]);
    r.assay_limit = parse_real(f[col[2]], row, names[2]);
    r.c = parse_binary(f[col[3]], row, names[3]);
    records.push_back(r);
  }
  return Dataset(std::move(records), sigma_u, std::move(label));
}

Dataset load_csv(const std::string& path, double sigma_u) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
  return read_csv(in, sigma_u, path);
}

void write_csv(std::ostream& out, const Dataset& d) {
  out << "y,m_star,assay_limit,c\n";
  char buf[32];
  auto put = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
  };
  for (const auto& r : d.records()) {
    out << r.y << ',';
    if (r.m_star) {
      put(*r.m_star);
    } else {
      out << "NA";
    }
    out << ',';
    put(r.assay_limit);
    out << ',' << r.c << '\n';
  }
}

CommonCauseDist empirical_common_cause_dist(const Dataset& d) {
  std::size_t n1 = 0;
  for (const auto& r : d.records()) n1 += static_cast<std::size_t>(r.c);
  const double p1 = static_cast<double>(n1) / static_cast<double>(d.size());
  return CommonCauseDist::from_p_c1(p1);
}

Dataset apply_assay_limit_override(const Dataset& d, double assay_limit) {
  if (!std::isfinite(assay_limit)) {
    throw Error(ErrorCode::validation, "assay limit override must be finite");
  }
  std::vector<Record> out = d.records();
  for (std::size_t i = 0; i < out.size(); ++i) {
    Record& r = out[i];
    if (!r.detected() && r.assay_limit > assay_limit) {
      throw Error(ErrorCode::validation,
                  "record " + std::to_string(i + 1) +
                      " is censored at a higher limit than the override; "
                      "censoring cannot be refined");
    }
    r.assay_limit = assay_limit;
  }
  return Dataset(std::move(out), d.sigma_u(), d.label());
}

}  // namespace medshift
