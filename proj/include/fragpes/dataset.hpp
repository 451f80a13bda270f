#pragma once

#include <string>
#include <vector>

#include "fragpes/geometry.hpp"
#include "fragpes/util.hpp"

namespace fragpes {

/// One fragment record of the structured dataset file.
struct FragmentRecord {
    std::string system;
    int frame = 0;
    int rank = 0;
    std::vector<int> node_ids;
    std::string kind;
    int multiplicity = 0;
    Geometry geometry;
};

struct DatasetMeta {
    std::string config_hash;
    std::string system;
    int rank = 0;
};

void write_fragment_dataset(const std::string& path, const std::vector<FragmentRecord>& records,
                            const DatasetMeta& meta);
std::vector<FragmentRecord> read_fragment_dataset(const std::string& path, DatasetMeta* meta_out,
                                                  const std::string& expect_config_hash);

/// One labeled descriptor row: kind, provenance, the n(n-1)/2 distances and
/// the delta-energy label in kcal/mol.
struct LabeledRow {
    std::string kind;
    std::string system;
    int frame = 0;
    int rank = 0;
    int multiplicity = 0;
    std::vector<double> descriptor;
    double delta_e = 0.0;
};

void write_label_dataset(const std::string& path, const std::vector<LabeledRow>& rows,
                         const DatasetMeta& meta);
std::vector<LabeledRow> read_label_dataset(const std::string& path, DatasetMeta* meta_out,
                                           const std::string& expect_config_hash);

/// Per-frame prediction report row.
struct PredictRow {
    int frame = 0;
    double e_ref = 0.0;
    double e_ml = 0.0;
    double e_exact = 0.0;
    double error = 0.0;  // e_ml - e_exact
};

void write_predict_report(const std::string& path, const std::vector<PredictRow>& rows,
                          const DatasetMeta& meta);
std::vector<PredictRow> read_predict_report(const std::string& path, DatasetMeta* meta_out,
                                            const std::string& expect_config_hash);

}  // namespace fragpes
