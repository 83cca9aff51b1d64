#include "adkit/dataset.hpp"
#include "adkit/errors.hpp"
#include "adkit/rng.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <string>

using namespace adkit;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// n_patients patients with per_patient records each, all normal, unassigned.
Dataset synthetic_manifest(std::size_t n_patients, std::size_t per_patient,
                           std::size_t n_abnormal_patients = 0) {
    Dataset ds;
    ds.name = "synthetic";
    for (std::size_t p = 0; p < n_patients; ++p) {
        for (std::size_t i = 0; i < per_patient; ++i) {
            ManifestRecord rec;
            rec.path = "p" + std::to_string(p) + "_" + std::to_string(i) + ".pgm";
            rec.patient_id = "p" + std::to_string(p);
            rec.label = p < n_abnormal_patients ? Label::abnormal : Label::normal;
            rec.split = Split::unassigned;
            ds.records.push_back(rec);
        }
    }
    return ds;
}

} // namespace

TEST_CASE("load_manifest parses a minimal file") {
    const auto dir = tmp_dir("manifest_min");
    write_text(dir / "m.csv", "path,label,patient_id,split\nx.pgm,normal,p1,train\n");
    const auto ds = data::load_manifest(dir / "m.csv");
    REQUIRE(ds.records.size() == 1);
    CHECK(ds.records[0].path == "x.pgm");
    CHECK(ds.records[0].label == Label::normal);
    CHECK(ds.records[0].patient_id == "p1");
    CHECK(ds.records[0].split == Split::train);
}

TEST_CASE("abnormal train records are rejected") {
    const auto dir = tmp_dir("manifest_abn_train");
    write_text(dir / "m.csv", "path,label,patient_id,split\nx.pgm,abnormal,p1,train\n");
    CHECK_THROWS_AS(data::load_manifest(dir / "m.csv"), ValidationError);
}

TEST_CASE("unknown tokens raise parse errors naming the line") {
    const auto dir = tmp_dir("manifest_tokens");
    write_text(dir / "m.csv", "path,label,patient_id,split\nx.pgm,weird,p1,train\n");
    try {
        data::load_manifest(dir / "m.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    // a duplicated header line parses as a record with label token "label"
    write_text(dir / "d.csv",
               "path,label,patient_id,split\npath,label,patient_id,split\n");
    CHECK_THROWS_AS(data::load_manifest(dir / "d.csv"), ParseError);
    write_text(dir / "h.csv", "path,label,who,split\n");
    CHECK_THROWS_AS(data::load_manifest(dir / "h.csv"), ParseError);
}

TEST_CASE("save then load round-trips a dataset") {
    const auto dir = tmp_dir("manifest_roundtrip");
    auto ds = synthetic_manifest(3, 2);
    ds.records[0].split = Split::train;
    ds.records[1].split = Split::train;
    ds.records[2].split = Split::val;
    ds.records[3].split = Split::val;
    ds.records[4].split = Split::test;
    ds.records[5].split = Split::test;
    data::save_manifest(ds, dir / "m.csv");
    const auto back = data::load_manifest(dir / "m.csv");
    REQUIRE(back.records.size() == ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(back.records[i].path == ds.records[i].path);
        CHECK(back.records[i].label == ds.records[i].label);
        CHECK(back.records[i].patient_id == ds.records[i].patient_id);
        CHECK(back.records[i].split == ds.records[i].split);
    }
}

TEST_CASE("patient split honors exact divisibility") {
    const auto ds = synthetic_manifest(4, 5);
    const auto split = data::split_by_patient(ds, {0.5, 0.25, 0.25}, 17);
    std::map<Split, std::set<std::string>> patients;
    for (const auto& rec : split.records) patients[rec.split].insert(rec.patient_id);
    CHECK(patients[Split::train].size() == 2);
    CHECK(patients[Split::val].size() == 1);
    CHECK(patients[Split::test].size() == 1);
    CHECK(patients.count(Split::unassigned) == 0);
}

TEST_CASE("records of one patient always share a split") {
    const auto ds = synthetic_manifest(5, 4);
    const auto split = data::split_by_patient(ds, {0.6, 0.2, 0.2}, 3);
    std::map<std::string, std::set<Split>> seen;
    for (const auto& rec : split.records) seen[rec.patient_id].insert(rec.split);
    for (const auto& [patient, splits] : seen) CHECK(splits.size() == 1);
}

TEST_CASE("too few patients for the requested splits is infeasible") {
    const auto ds = synthetic_manifest(2, 3);
    CHECK_THROWS_AS(data::split_by_patient(ds, {0.5, 0.25, 0.25}, 1), InfeasibleError);
}

TEST_CASE("abnormal patients never land in train") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto ds = synthetic_manifest(8, 3, 4);
        const auto split = data::split_by_patient(ds, {0.5, 0.25, 0.25}, seed);
        for (const auto& rec : split.records) {
            if (rec.label == Label::abnormal) CHECK(rec.split != Split::train);
        }
        CHECK_NOTHROW(data::validate_dataset(split));
    }
}

TEST_CASE("patient splits are pure functions of their arguments") {
    const auto ds = synthetic_manifest(7, 2);
    const auto a = data::split_by_patient(ds, {0.5, 0.3, 0.2}, 99);
    const auto b = data::split_by_patient(ds, {0.5, 0.3, 0.2}, 99);
    for (std::size_t i = 0; i < a.records.size(); ++i)
        CHECK(a.records[i].split == b.records[i].split);
    const auto c = data::split_by_patient(ds, {0.5, 0.3, 0.2}, 100);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.records.size(); ++i)
        any_diff = any_diff || a.records[i].split != c.records[i].split;
    CHECK(any_diff);
}

TEST_CASE("random manifests never put a patient in two splits") {
    Rng rng(55);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n_patients = 3 + rng.below(10);
        const std::size_t per_patient = 1 + rng.below(5);
        const std::size_t n_abnormal = rng.below(n_patients / 2 + 1);
        const auto ds = synthetic_manifest(n_patients, per_patient, n_abnormal);
        const auto split = data::split_by_patient(ds, {0.5, 0.25, 0.25}, rng.next_u64());
        std::map<std::string, std::set<Split>> seen;
        for (const auto& rec : split.records) seen[rec.patient_id].insert(rec.split);
        for (const auto& [patient, splits] : seen) CHECK(splits.size() == 1);
        CHECK_NOTHROW(data::validate_dataset(split));
    }
}
