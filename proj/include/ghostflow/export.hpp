#pragma once

#include "ghostflow/bundle.hpp"
#include "ghostflow/diagnostics.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace ghostflow {

// Serialises a double with 17 significant digits (lossless for binary64).
std::string format_double(double v);

// CSV schema, one row per (t, member): t, member_id, kind, qx, qy, px, py,
// ux, uy, dx, dy, det_lambda, sm_eig1, sm_eig2, q_b. Rows per time: ensemble
// Bohmian members, then the centre (member_id -1), then the classical
// reference (member_id -2). Fields that do not apply to a row kind stay empty.
std::string series_to_csv(const SeriesBundle& bundle);
void export_series_csv(const SeriesBundle& bundle, const std::string& path);

// JSON mirror: {"metadata": ..., "records": [...]} with the same fields.
nlohmann::json series_to_json(const SeriesBundle& bundle, const nlohmann::json& metadata);
void export_series_json(const SeriesBundle& bundle, const nlohmann::json& metadata,
                        const std::string& path);

// Bi-Hamiltonian exports: one file per representation (same schema, u and
// delta relative to that representation's packet/classical reference) plus a
// gap file (t, member_id, gap).
std::string biham_rep_to_csv(const BihamComparison& cmp, bool second_rep);
nlohmann::json biham_rep_to_json(const BihamComparison& cmp, bool second_rep,
                                 const nlohmann::json& metadata);
std::string gap_to_csv(const BihamComparison& cmp);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace ghostflow
