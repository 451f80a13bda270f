#include "fragpes/dataset.hpp"

#include <fstream>
#include <sstream>

namespace fragpes {

namespace {

void write_meta(std::ofstream& out, const char* tag, const DatasetMeta& meta) {
    out << "# fragpes " << tag << " v1\n";
    out << "# config " << meta.config_hash << "\n";
    out << "# system " << meta.system << "\n";
    out << "# rank " << meta.rank << "\n";
}

bool consume_meta_line(const std::vector<std::string>& tok, DatasetMeta* meta,
                       const std::string& expect_hash, const std::string& path) {
    if (tok.empty() || tok[0] != "#") return false;
    if (tok.size() >= 3 && tok[1] == "config") {
        if (!expect_hash.empty() && tok[2] != expect_hash)
            throw DataError("stale artifact (config hash mismatch): " + path);
        if (meta) meta->config_hash = tok[2];
    } else if (tok.size() >= 3 && tok[1] == "system" && meta) {
        meta->system = tok[2];
    } else if (tok.size() >= 3 && tok[1] == "rank" && meta) {
        meta->rank = static_cast<int>(parse_long(tok[2]));
    }
    return true;
}

}  // namespace

void write_fragment_dataset(const std::string& path, const std::vector<FragmentRecord>& records,
                            const DatasetMeta& meta) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write fragment dataset: " + path);
    write_meta(out, "fragment dataset", meta);
    for (const auto& rec : records) {
        out << "fragment " << rec.system << ' ' << rec.frame << ' ' << rec.rank << ' ' << rec.kind
            << ' ' << rec.multiplicity << ' ' << rec.geometry.size() << ' ';
        for (std::size_t i = 0; i < rec.node_ids.size(); ++i) {
            if (i) out << ',';
            out << rec.node_ids[i];
        }
        out << "\n";
        for (const Atom& a : rec.geometry.atoms)
            out << "atom " << a.element << ' ' << format_double(a.pos[0]) << ' '
                << format_double(a.pos[1]) << ' ' << format_double(a.pos[2]) << "\n";
    }
}

std::vector<FragmentRecord> read_fragment_dataset(const std::string& path, DatasetMeta* meta_out,
                                                  const std::string& expect_config_hash) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open fragment dataset: " + path);
    std::vector<FragmentRecord> records;
    DatasetMeta meta;
    std::string line;
    while (std::getline(in, line)) {
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (consume_meta_line(tok, &meta, expect_config_hash, path)) continue;
        if (tok[0] != "fragment" || tok.size() != 8)
            throw DataError("fragment dataset corrupt (record header): " + path);
        FragmentRecord rec;
        rec.system = tok[1];
        rec.frame = static_cast<int>(parse_long(tok[2]));
        rec.rank = static_cast<int>(parse_long(tok[3]));
        rec.kind = tok[4];
        rec.multiplicity = static_cast<int>(parse_long(tok[5]));
        const auto natoms = static_cast<std::size_t>(parse_long(tok[6]));
        std::stringstream ids(tok[7]);
        std::string id;
        while (std::getline(ids, id, ',')) rec.node_ids.push_back(static_cast<int>(parse_long(id)));
        rec.geometry.frame_id = rec.frame;
        for (std::size_t i = 0; i < natoms; ++i) {
            if (!std::getline(in, line)) throw DataError("fragment dataset truncated: " + path);
            auto at = split_ws(line);
            if (at.size() != 5 || at[0] != "atom")
                throw DataError("fragment dataset corrupt (atom line): " + path);
            Atom a;
            a.element = at[1];
            a.mass = atomic_mass(a.element);
            for (int c = 0; c < 3; ++c) a.pos[static_cast<std::size_t>(c)] = parse_double(at[static_cast<std::size_t>(c) + 2]);
            rec.geometry.atoms.push_back(std::move(a));
        }
        records.push_back(std::move(rec));
    }
    if (meta_out) *meta_out = meta;
    return records;
}

void write_label_dataset(const std::string& path, const std::vector<LabeledRow>& rows,
                         const DatasetMeta& meta) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write label dataset: " + path);
    write_meta(out, "label dataset", meta);
    out << "# columns: kind system frame rank multiplicity n values... delta_e\n";
    for (const auto& row : rows) {
        out << row.kind << ' ' << row.system << ' ' << row.frame << ' ' << row.rank << ' '
            << row.multiplicity << ' ' << row.descriptor.size();
        for (double v : row.descriptor) out << ' ' << format_double(v);
        out << ' ' << format_double(row.delta_e) << "\n";
    }
}

std::vector<LabeledRow> read_label_dataset(const std::string& path, DatasetMeta* meta_out,
                                           const std::string& expect_config_hash) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open label dataset: " + path);
    std::vector<LabeledRow> rows;
    DatasetMeta meta;
    std::string line;
    while (std::getline(in, line)) {
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (consume_meta_line(tok, &meta, expect_config_hash, path)) continue;
        if (tok.size() < 7) throw DataError("label dataset corrupt: " + path);
        LabeledRow row;
        row.kind = tok[0];
        row.system = tok[1];
        row.frame = static_cast<int>(parse_long(tok[2]));
        row.rank = static_cast<int>(parse_long(tok[3]));
        row.multiplicity = static_cast<int>(parse_long(tok[4]));
        const auto n = static_cast<std::size_t>(parse_long(tok[5]));
        if (tok.size() != 7 + n) throw DataError("label dataset row width mismatch: " + path);
        row.descriptor.resize(n);
        for (std::size_t i = 0; i < n; ++i) row.descriptor[i] = parse_double(tok[6 + i]);
        row.delta_e = parse_double(tok[6 + n]);
        rows.push_back(std::move(row));
    }
    if (meta_out) *meta_out = meta;
    return rows;
}

void write_predict_report(const std::string& path, const std::vector<PredictRow>& rows,
                          const DatasetMeta& meta) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write predict report: " + path);
    write_meta(out, "predict report", meta);
    out << "# columns: frame e_ref e_ml e_exact error\n";
    for (const auto& r : rows)
        out << r.frame << ' ' << format_double(r.e_ref) << ' ' << format_double(r.e_ml) << ' '
            << format_double(r.e_exact) << ' ' << format_double(r.error) << "\n";
}

std::vector<PredictRow> read_predict_report(const std::string& path, DatasetMeta* meta_out,
                                            const std::string& expect_config_hash) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open predict report: " + path);
    std::vector<PredictRow> rows;
    DatasetMeta meta;
    std::string line;
    while (std::getline(in, line)) {
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (consume_meta_line(tok, &meta, expect_config_hash, path)) continue;
        if (tok.size() != 5) throw DataError("predict report corrupt: " + path);
        PredictRow r;
        r.frame = static_cast<int>(parse_long(tok[0]));
        r.e_ref = parse_double(tok[1]);
        r.e_ml = parse_double(tok[2]);
        r.e_exact = parse_double(tok[3]);
        r.error = parse_double(tok[4]);
        rows.push_back(r);
    }
    if (meta_out) *meta_out = meta;
    return rows;
}

}  // namespace fragpes
