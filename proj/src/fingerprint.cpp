#include "irsbm/fingerprint.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "irsbm/error.hpp"
#include "irsbm/parallel.hpp"
#include "irsbm/random.hpp"

namespace irsbm {

FingerprintRecord label_position(const Scenario& s, const LinkBudget& link, const Vec3& ue) {
    FingerprintRecord best{ue, AccessPointId::outage(), 0.0};
    double best_se = -1.0;
    for (const auto& candidate : access_candidates(s, ue)) {
        if (!candidate.reachable) continue;
        const double se = se_bits(aligned_snr_db(s, link, candidate.access, ue));
        if (se > best_se) {
            best_se = se;
            best.label = candidate.access;
            best.se_bits_per_hz = se;
        }
    }
    return best;
}

std::vector<Vec3> grid_points(const Scenario& s, double resolution) {
    if (!(resolution > 0.0) || !std::isfinite(resolution))
        throw InvalidArgument("grid.resolution: must be positive");
    const Area& a = s.area();
    // Tolerate representation error so that e.g. 100 / 0.1 gives 1000 cells.
    const auto cells = [resolution](double extent) {
        return static_cast<long>(std::floor(extent / resolution + 1e-9));
    };
    const long nx = cells(a.x_max - a.x_min);
    const long ny = cells(a.y_max - a.y_min);
    std::vector<Vec3> points;
    points.reserve(static_cast<std::size_t>(std::max(0L, nx * ny)));
    for (long m = 0; m < ny; ++m)
        for (long k = 0; k < nx; ++k)
            points.push_back({a.x_min + (k + 0.5) * resolution, a.y_min + (m + 0.5) * resolution, s.ue_height()});
    return points;
}

FingerprintDataset build_fingerprint_dataset(const Scenario& s, const LinkBudget& link, const GridSpec& grid,
                                             unsigned threads) {
    if (!(grid.holdout_fraction > 0.0 && grid.holdout_fraction < 1.0))
        throw InvalidArgument("grid.holdout_fraction: must lie in (0, 1)");
    const auto points = grid_points(s, grid.resolution);
    if (points.size() < 100)
        throw DatasetError(fmt::format("grid has {} points, at least 100 are required", points.size()));

    std::vector<FingerprintRecord> labelled(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) { labelled[i] = label_position(s, link, points[i]); });

    std::vector<FingerprintRecord> usable;
    for (auto& r : labelled)
        if (!r.label.is_outage()) usable.push_back(r);
    if (usable.size() < 100)
        throw DatasetError(fmt::format("only {} non-outage grid points, at least 100 are required", usable.size()));

    std::vector<std::size_t> order(usable.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(grid.seed);
    shuffle(order, rng);
    const auto holdout_count = static_cast<std::size_t>(std::llround(grid.holdout_fraction * usable.size()));
    std::vector<bool> in_holdout(usable.size(), false);
    for (std::size_t i = 0; i < holdout_count; ++i) in_holdout[order[i]] = true;

    FingerprintDataset out;
    for (std::size_t i = 0; i < usable.size(); ++i) (in_holdout[i] ? out.holdout : out.train).push_back(usable[i]);
    return out;
}

void write_fingerprint_csv(const std::filesystem::path& path, const std::vector<FingerprintRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
    out << "x,y,z,label,se_bits_per_hz\n";
    for (const auto& r : records) {
        if (r.label.is_outage()) continue;
        out << fmt::format("{:.17g},{:.17g},{:.17g},{},{:.17g}\n", r.position.x, r.position.y, r.position.z,
                           r.label.to_string(), r.se_bits_per_hz);
    }
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

std::vector<FingerprintRecord> read_fingerprint_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("{}: cannot open for reading", path.string()));
    std::string line;
    if (!std::getline(in, line) || line != "x,y,z,label,se_bits_per_hz")
        throw DatasetError(fmt::format("{}: missing header x,y,z,label,se_bits_per_hz", path.string()));
    std::vector<FingerprintRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        if (fields.size() != 5)
            throw DatasetError(fmt::format("{}:{}: expected 5 fields, found {}", path.string(), line_no, fields.size()));
        try {
            FingerprintRecord r;
            r.position = {std::stod(fields[0]), std::stod(fields[1]), std::stod(fields[2])};
            r.label = AccessPointId::parse(fields[3]);
            r.se_bits_per_hz = std::stod(fields[4]);
            records.push_back(r);
        } catch (const std::exception& e) {
            throw DatasetError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        }
    }
    return records;
}

}  // namespace irsbm
