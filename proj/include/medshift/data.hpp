#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace medshift {

/// One participant. The mediator is on the log10 scale; m_star is absent
/// when the measurement fell at or below the record's assay limit.
struct Record {
  int y = 0;
  std::optional<double> m_star;
  double assay_limit = 0.0;
  int c = 0;

  bool detected() const { return m_star.has_value(); }
};

/// Validated, immutable collection of records plus the externally supplied
/// measurement-error SD (log10 scale).
class Dataset {
 public:
  /// Validates records. Detected values at or below their assay limit are
  /// reclassified as censored and counted in n_reclassified().
  Dataset(std::vector<Record> records, double sigma_u, std::string label = {});

  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const Record& operator[](std::size_t i) const { return records_[i]; }
  double sigma_u() const { return sigma_u_; }
  double sigma_u2() const { return sigma_u_ * sigma_u_; }
  const std::string& label() const { return label_; }
  std::size_t n_reclassified() const { return n_reclassified_; }
  std::size_t n_censored() const;

 private:
  std::vector<Record> records_;
  double sigma_u_;
  std::string label_;
  std::size_t n_reclassified_ = 0;
};

/// Sample distribution of the binary common cause, indexed by c.
struct CommonCauseDist {
  std::array<double, 2> p{1.0, 0.0};

  double p_c1() const { return p[1]; }
  static CommonCauseDist from_p_c1(double p_c1) { return {{1.0 - p_c1, p_c1}}; }
};

/// Reads `y,m_star,assay_limit,c` (any column order). Empty or "NA"
/// m_star means censored.
Dataset read_csv(std::istream& in, double sigma_u, std::string label = {});
Dataset load_csv(const std::string& path, double sigma_u);

/// Writes the same schema with round-trip precision.
void write_csv(std::ostream& out, const Dataset& d);

CommonCauseDist empirical_common_cause_dist(const Dataset& d);

/// Coarsens every record to a single assay limit. Detected values at or
/// below the new limit become censored; a censored record whose own limit
/// exceeds the new one cannot be refined and is rejected.
Dataset apply_assay_limit_override(const Dataset& d, double assay_limit);

}  // namespace medshift
