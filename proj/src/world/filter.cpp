#include "impflow/world/filter.hpp"

#include <cmath>

namespace impflow {

QualityReport quality_filter(const std::vector<QualityRecord>& records,
                             double energy_threshold,
                             double identity_threshold) {
  QualityReport report;
  report.total = static_cast<int>(records.size());
  report.keep.reserve(records.size());
  for (const auto& rec : records) {
    if (!std::isfinite(rec.energy) || !std::isfinite(rec.identity_similarity)) {
      throw NumericError("quality_filter: non-finite record");
    }
    bool ok = true;
    if (rec.energy < energy_threshold) {
      ++report.rejected_energy;
      ok = false;
    } else if (rec.identity_similarity <= identity_threshold) {
      ++report.rejected_identity;
      ok = false;
    }
    report.kept += ok ? 1 : 0;
    report.keep.push_back(ok);
  }
  return report;
}

}  // namespace impflow
