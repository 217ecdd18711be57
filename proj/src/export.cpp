#include "ghostflow/export.hpp"

#include "ghostflow/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ghostflow {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

constexpr const char* kCsvHeader =
    "t,member_id,kind,qx,qy,px,py,ux,uy,dx,dy,det_lambda,sm_eig1,sm_eig2,q_b\n";

struct CsvRow {
    double t;
    int member_id;
    const char* kind;
    // nullptrs render as empty fields
    const double* qx = nullptr;
    const double* qy = nullptr;
    const double* px = nullptr;
    const double* py = nullptr;
    const double* ux = nullptr;
    const double* uy = nullptr;
    const double* dx = nullptr;
    const double* dy = nullptr;
    const double* det_lambda = nullptr;
    const double* sm1 = nullptr;
    const double* sm2 = nullptr;
    const double* q_b = nullptr;
};

void append_row(std::string& out, const CsvRow& r) {
    out += format_double(r.t);
    out += ',';
    out += std::to_string(r.member_id);
    out += ',';
    out += r.kind;
    const double* fields[12] = {r.qx, r.qy, r.px, r.py, r.ux, r.uy,
                                r.dx, r.dy, r.det_lambda, r.sm1, r.sm2, r.q_b};
    for (const double* f : fields) {
        out += ',';
        if (f) out += format_double(*f);
    }
    out += '\n';
}

}  // namespace

std::string series_to_csv(const SeriesBundle& bundle) {
    std::string out(kCsvHeader);
    const std::size_t nt = bundle.centre.valid_count();
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = bundle.packet.state(i).t;
        for (std::size_t k = 0; k < bundle.bohmian.size(); ++k) {
            if (i >= bundle.bohmian[k].valid_count() || i >= bundle.diag.members[k].size()) {
                continue;
            }
            const Vec2& q = bundle.bohmian[k].positions[i];
            const DiagnosticsSample& d = bundle.diag.members[k][i];
            CsvRow row{t, static_cast<int>(k), "bohmian"};
            row.qx = &q.x();
            row.qy = &q.y();
            row.ux = &d.u.x();
            row.uy = &d.u.y();
            row.dx = &d.delta.x();
            row.dy = &d.delta.y();
            row.q_b = &d.q_b;
            append_row(out, row);
        }
        {
            const PacketState& s = bundle.packet.state(i);
            const Mat2 lambda = curvature_mismatch(s.A, bundle.packet.model());
            const double det_lambda = lambda.determinant();
            const auto sm = sym_eigenvalues(
                symmetrized(-(bundle.packet.model().kinetic() * s.B)));
            const double qb = quantum_potential(s.q_c, s, bundle.packet.model());
            CsvRow row{t, -1, "centre"};
            row.qx = &s.q_c.x();
            row.qy = &s.q_c.y();
            row.px = &s.p_c.x();
            row.py = &s.p_c.y();
            row.det_lambda = &det_lambda;
            row.sm1 = &sm[0];
            row.sm2 = &sm[1];
            row.q_b = &qb;
            append_row(out, row);
        }
        if (i < bundle.classical_ref.valid_count()) {
            const Vec2& q = bundle.classical_ref.positions[i];
            const Vec2& p = bundle.classical_ref.momenta[i];
            CsvRow row{t, -2, "classical"};
            row.qx = &q.x();
            row.qy = &q.y();
            row.px = &p.x();
            row.py = &p.y();
            append_row(out, row);
        }
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << content;
    if (!f) throw IoError("write failed: " + path);
}

void export_series_csv(const SeriesBundle& bundle, const std::string& path) {
    write_text_file(path, series_to_csv(bundle));
}

namespace {

nlohmann::json bohmian_record(double t, int id, const Vec2& q, const DiagnosticsSample& d) {
    return nlohmann::json{{"t", t},       {"member_id", id}, {"kind", "bohmian"},
                          {"qx", q.x()},  {"qy", q.y()},     {"ux", d.u.x()},
                          {"uy", d.u.y()}, {"dx", d.delta.x()}, {"dy", d.delta.y()},
                          {"q_b", d.q_b}};
}

}  // namespace

nlohmann::json series_to_json(const SeriesBundle& bundle, const nlohmann::json& metadata) {
    nlohmann::json records = nlohmann::json::array();
    const std::size_t nt = bundle.centre.valid_count();
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = bundle.packet.state(i).t;
        for (std::size_t k = 0; k < bundle.bohmian.size(); ++k) {
            if (i >= bundle.bohmian[k].valid_count() || i >= bundle.diag.members[k].size()) {
                continue;
            }
            records.push_back(bohmian_record(t, static_cast<int>(k),
                                             bundle.bohmian[k].positions[i],
                                             bundle.diag.members[k][i]));
        }
        {
            const PacketState& s = bundle.packet.state(i);
            const Mat2 lambda = curvature_mismatch(s.A, bundle.packet.model());
            const auto sm = sym_eigenvalues(
                symmetrized(-(bundle.packet.model().kinetic() * s.B)));
            records.push_back(nlohmann::json{
                {"t", t},
                {"member_id", -1},
                {"kind", "centre"},
                {"qx", s.q_c.x()},
                {"qy", s.q_c.y()},
                {"px", s.p_c.x()},
                {"py", s.p_c.y()},
                {"det_lambda", lambda.determinant()},
                {"sm_eig1", sm[0]},
                {"sm_eig2", sm[1]},
                {"q_b", quantum_potential(s.q_c, s, bundle.packet.model())}});
        }
        if (i < bundle.classical_ref.valid_count()) {
            const Vec2& q = bundle.classical_ref.positions[i];
            const Vec2& p = bundle.classical_ref.momenta[i];
            records.push_back(nlohmann::json{{"t", t},
                                             {"member_id", -2},
                                             {"kind", "classical"},
                                             {"qx", q.x()},
                                             {"qy", q.y()},
                                             {"px", p.x()},
                                             {"py", p.y()}});
        }
    }
    return nlohmann::json{{"metadata", metadata}, {"records", records}};
}

void export_series_json(const SeriesBundle& bundle, const nlohmann::json& metadata,
                        const std::string& path) {
    write_text_file(path, series_to_json(bundle, metadata).dump(1) + "\n");
}

std::string biham_rep_to_csv(const BihamComparison& cmp, bool second_rep) {
    const PacketSeries& packet = second_rep ? cmp.packet_2 : cmp.packet_g;
    const auto& reps = second_rep ? cmp.rep_2 : cmp.rep_g;
    std::string out(kCsvHeader);
    const std::size_t nt = packet.size();
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = packet.state(i).t;
        for (std::size_t k = 0; k < reps.size(); ++k) {
            const BihamMemberSeries& ms = reps[k];
            if (i >= ms.delta.size()) continue;
            const Vec2& q = ms.bohmian.positions[i];
            const Vec2 u = q - packet.state(i).q_c;
            CsvRow row{t, static_cast<int>(k), "bohmian"};
            row.qx = &q.x();
            row.qy = &q.y();
            row.ux = &u.x();
            row.uy = &u.y();
            row.dx = &ms.delta[i].x();
            row.dy = &ms.delta[i].y();
            row.q_b = &ms.q_b[i];
            append_row(out, row);
        }
        {
            const PacketState& s = packet.state(i);
            const Mat2 lambda = curvature_mismatch(s.A, packet.model());
            const double det_lambda = lambda.determinant();
            const auto sm = sym_eigenvalues(symmetrized(-(packet.model().kinetic() * s.B)));
            const double qb = quantum_potential(s.q_c, s, packet.model());
            CsvRow row{t, -1, "centre"};
            row.qx = &s.q_c.x();
            row.qy = &s.q_c.y();
            row.px = &s.p_c.x();
            row.py = &s.p_c.y();
            row.det_lambda = &det_lambda;
            row.sm1 = &sm[0];
            row.sm2 = &sm[1];
            row.q_b = &qb;
            append_row(out, row);
        }
    }
    return out;
}

nlohmann::json biham_rep_to_json(const BihamComparison& cmp, bool second_rep,
                                 const nlohmann::json& metadata) {
    const PacketSeries& packet = second_rep ? cmp.packet_2 : cmp.packet_g;
    const auto& reps = second_rep ? cmp.rep_2 : cmp.rep_g;
    nlohmann::json records = nlohmann::json::array();
    const std::size_t nt = packet.size();
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = packet.state(i).t;
        for (std::size_t k = 0; k < reps.size(); ++k) {
            const BihamMemberSeries& ms = reps[k];
            if (i >= ms.delta.size()) continue;
            const Vec2& q = ms.bohmian.positions[i];
            records.push_back(nlohmann::json{{"t", t},
                                             {"member_id", static_cast<int>(k)},
                                             {"kind", "bohmian"},
                                             {"qx", q.x()},
                                             {"qy", q.y()},
                                             {"ux", q.x() - packet.state(i).q_c.x()},
                                             {"uy", q.y() - packet.state(i).q_c.y()},
                                             {"dx", ms.delta[i].x()},
                                             {"dy", ms.delta[i].y()},
                                             {"q_b", ms.q_b[i]}});
        }
        const PacketState& s = packet.state(i);
        records.push_back(nlohmann::json{
            {"t", t},
            {"member_id", -1},
            {"kind", "centre"},
            {"qx", s.q_c.x()},
            {"qy", s.q_c.y()},
            {"px", s.p_c.x()},
            {"py", s.p_c.y()},
            {"det_lambda", curvature_mismatch(s.A, packet.model()).determinant()},
            {"q_b", quantum_potential(s.q_c, s, packet.model())}});
    }
    return nlohmann::json{{"metadata", metadata}, {"records", records}};
}

std::string gap_to_csv(const BihamComparison& cmp) {
    std::string out("t,member_id,gap\n");
    for (std::size_t k = 0; k < cmp.gap.size(); ++k) {
        for (std::size_t i = 0; i < cmp.gap[k].size(); ++i) {
            out += format_double(cmp.packet_g.state(i).t);
            out += ',';
            out += std::to_string(k);
            out += ',';
            out += format_double(cmp.gap[k][i]);
            out += '\n';
        }
    }
    return out;
}

}  // namespace ghostflow
