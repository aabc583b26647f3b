#pragma once

#include <json.hpp>  // vendored single-header nlohmann/json

#include <Eigen/Dense>

#include "driftfx/errors.hpp"

namespace driftfx {

using json = nlohmann::json;

inline json vec_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

inline Eigen::VectorXd vec_from_json(const json& arr) {
    if (!arr.is_array()) throw DataError("expected JSON array for vector");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = arr[static_cast<std::size_t>(i)].get<double>();
    return v;
}

inline json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd mat_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw DataError("expected JSON array of rows");
    const auto nr = static_cast<Eigen::Index>(rows.size());
    const auto nc = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd m(nr, nc);
    for (Eigen::Index r = 0; r < nr; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != nc)
            throw DataError("ragged JSON matrix");
        for (Eigen::Index c = 0; c < nc; ++c)
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

}  // namespace driftfx
