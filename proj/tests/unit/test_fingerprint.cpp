#include <doctest.h>

#include <fstream>

#include "irsbm/config.hpp"
#include "irsbm/engine.hpp"
#include "irsbm/error.hpp"
#include "irsbm/fingerprint.hpp"
#include "test_support.hpp"

using namespace irsbm;
using namespace irsbm::test;

namespace {

const Scenario& study_case() {
    static const Scenario s = build_study_case();
    return s;
}

const FingerprintDataset& study_dataset() {
    static const FingerprintDataset d = build_fingerprint_dataset(study_case(), LinkBudget{}, GridSpec{1.0, 0.2, 7}, 2);
    return d;
}

bool same(const FingerprintRecord& a, const FingerprintRecord& b) {
    return a.position == b.position && a.label == b.label && a.se_bits_per_hz == b.se_bits_per_hz;
}

}  // namespace

TEST_CASE("study-case grid and split sizes") {
    CHECK(grid_points(study_case(), 1.0).size() == 10000);
    const auto& d = study_dataset();
    const std::size_t usable = d.train.size() + d.holdout.size();
    CHECK(usable == 10000 - 416);
    const double expected = 0.2 * static_cast<double>(usable);
    CHECK(std::abs(static_cast<double>(d.holdout.size()) - expected) <= 1.0);
}

TEST_CASE("every exported label matches a fresh evaluation") {
    const auto& d = study_dataset();
    const LinkBudget link;
    for (const auto* split : {&d.train, &d.holdout})
        for (const auto& r : *split) {
            REQUIRE_FALSE(r.label.is_outage());
            const auto fresh = label_position(study_case(), link, r.position);
            REQUIRE(fresh.label == r.label);
            REQUIRE(fresh.se_bits_per_hz == r.se_bits_per_hz);
            if (r.label.is_irs()) REQUIRE(reachable(study_case(), r.label, r.position));
        }
}

TEST_CASE("the split is deterministic and independent of thread count") {
    const auto a = build_fingerprint_dataset(study_case(), LinkBudget{}, GridSpec{2.0, 0.3, 11}, 1);
    const auto b = build_fingerprint_dataset(study_case(), LinkBudget{}, GridSpec{2.0, 0.3, 11}, 3);
    REQUIRE(a.train.size() == b.train.size());
    REQUIRE(a.holdout.size() == b.holdout.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) REQUIRE(same(a.train[i], b.train[i]));
    for (std::size_t i = 0; i < a.holdout.size(); ++i) REQUIRE(same(a.holdout[i], b.holdout[i]));

    const auto c = build_fingerprint_dataset(study_case(), LinkBudget{}, GridSpec{2.0, 0.3, 12}, 1);
    bool differs = c.holdout.size() != a.holdout.size();
    for (std::size_t i = 0; !differs && i < a.holdout.size(); ++i) differs = !same(a.holdout[i], c.holdout[i]);
    CHECK(differs);
}

TEST_CASE("CSV round trip") {
    const auto dir = temp_dir("fingerprint_csv");
    const auto& train = study_dataset().train;
    write_fingerprint_csv(dir / "train.csv", train);
    const auto back = read_fingerprint_csv(dir / "train.csv");
    REQUIRE(back.size() == train.size());
    for (std::size_t i = 0; i < back.size(); ++i) REQUIRE(same(back[i], train[i]));

    std::ifstream in(dir / "train.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,y,z,label,se_bits_per_hz");
}

TEST_CASE("outage rows are never exported") {
    const auto dir = temp_dir("fingerprint_outage");
    write_fingerprint_csv(dir / "x.csv", {FingerprintRecord{{1, 2, 1.5}, AccessPointId::outage(), 0.0},
                                          FingerprintRecord{{3, 4, 1.5}, AccessPointId::irs(1), 0.5}});
    const auto back = read_fingerprint_csv(dir / "x.csv");
    REQUIRE(back.size() == 1);
    CHECK(back[0].label == AccessPointId::irs(1));
}

TEST_CASE("malformed CSV files") {
    const auto dir = temp_dir("fingerprint_bad");
    {
        std::ofstream(dir / "noheader.csv") << "1,2,3,direct,4\n";
        std::ofstream(dir / "fields.csv") << "x,y,z,label,se_bits_per_hz\n1,2,3,direct\n";
        std::ofstream(dir / "label.csv") << "x,y,z,label,se_bits_per_hz\n1,2,3,relay,4\n";
    }
    CHECK_THROWS_AS(read_fingerprint_csv(dir / "noheader.csv"), DatasetError);
    CHECK_THROWS_AS(read_fingerprint_csv(dir / "fields.csv"), DatasetError);
    CHECK_THROWS_AS(read_fingerprint_csv(dir / "label.csv"), DatasetError);
    CHECK_THROWS_AS(read_fingerprint_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("too few usable points") {
    const Scenario tiny(BsSpec{{0, 0, 10}, 64, 0.0}, {}, {}, Area{1, 9, 1, 9}, 1.5);
    CHECK_THROWS_AS(build_fingerprint_dataset(tiny, LinkBudget{}, GridSpec{1.0, 0.2, 1}), DatasetError);
    // 20 x 20 grid fully shadowed by a wall.
    const Scenario dark(BsSpec{{0, 0, 10}, 64, 0.0}, {}, {box({5, -50, 0}, {6, 50, 30})}, Area{10, 30, -10, 10}, 1.5);
    CHECK_THROWS_AS(build_fingerprint_dataset(dark, LinkBudget{}, GridSpec{1.0, 0.2, 1}), DatasetError);
}
