#pragma once

#include <filesystem>
#include <vector>

#include "irsbm/channel.hpp"
#include "irsbm/scenario.hpp"

namespace irsbm {

struct FingerprintRecord {
    Vec3 position;
    AccessPointId label = AccessPointId::outage();
    double se_bits_per_hz = 0.0;
};

/// Brute-force best server: evaluates the perfectly aligned SE of every
/// reachable candidate and keeps the argmax (Direct first, then lowest IRS id
/// on ties). Outage with SE 0 when nothing is reachable.
FingerprintRecord label_position(const Scenario& s, const LinkBudget& link, const Vec3& ue);

/// Cell-centre grid points at ue_height, row-major (y outer, x inner).
std::vector<Vec3> grid_points(const Scenario& s, double resolution);

struct FingerprintDataset {
    std::vector<FingerprintRecord> train;
    std::vector<FingerprintRecord> holdout;
};

/// Labels every grid point, drops outage points and splits the rest with a
/// seeded draw. Both splits keep grid order. Throws DatasetError when fewer
/// than 100 non-outage points exist.
FingerprintDataset build_fingerprint_dataset(const Scenario& s, const LinkBudget& link, const GridSpec& grid,
                                             unsigned threads = 1);

/// CSV with header `x,y,z,label,se_bits_per_hz`; outage rows are skipped.
void write_fingerprint_csv(const std::filesystem::path& path, const std::vector<FingerprintRecord>& records);
std::vector<FingerprintRecord> read_fingerprint_csv(const std::filesystem::path& path);

}  // namespace irsbm
