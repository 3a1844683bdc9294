#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pipgd/ot.hpp"
#include "pipgd/problems.hpp"
#include "pipgd/types.hpp"

namespace pipgd {

// Instances serialize to JSON fixtures with matrices as row-major nested
// arrays; dimensions and the generator seed ride along so fixtures are
// self-describing.

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("matrix_from_json: expected nested arrays");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != cols)
      throw std::invalid_argument("matrix_from_json: ragged rows");
    for (Index k = 0; k < cols; ++k)
      m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

inline Vector vector_from_json(const nlohmann::json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i)
    v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

inline nlohmann::json to_json(const LassoInstance& inst) {
  return nlohmann::json{{"type", "lasso"},
                        {"n", inst.n()},
                        {"m", inst.m()},
                        {"alpha", inst.alpha},
                        {"seed", inst.seed},
                        {"rho", inst.rho},
                        {"L", inst.L},
                        {"W", matrix_to_json(inst.W)},
                        {"A", matrix_to_json(inst.A)},
                        {"b", vector_to_json(inst.b)}};
}

inline LassoInstance lasso_from_json(const nlohmann::json& j) {
  if (j.at("type").get<std::string>() != "lasso")
    throw std::invalid_argument("lasso_from_json: wrong fixture type");
  LassoInstance inst;
  inst.W = matrix_from_json(j.at("W"));
  inst.A = matrix_from_json(j.at("A"));
  inst.b = vector_from_json(j.at("b"));
  inst.alpha = j.at("alpha").get<double>();
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.rho = j.at("rho").get<double>();
  inst.L = j.at("L").get<double>();
  if (inst.W.rows() != j.at("n").get<Index>() || inst.A.rows() != j.at("m").get<Index>())
    throw std::invalid_argument("lasso_from_json: inconsistent dimensions");
  return inst;
}

inline nlohmann::json to_json(const OTInstance& inst) {
  return nlohmann::json{{"type", "ot"},     {"n", inst.n},
                        {"m", inst.m},      {"eps", inst.eps},
                        {"C", matrix_to_json(inst.C)},
                        {"a", vector_to_json(inst.a)},
                        {"b", vector_to_json(inst.b)}};
}

inline OTInstance ot_from_json(const nlohmann::json& j) {
  if (j.at("type").get<std::string>() != "ot")
    throw std::invalid_argument("ot_from_json: wrong fixture type");
  return make_ot_instance(matrix_from_json(j.at("C")), vector_from_json(j.at("a")),
                          vector_from_json(j.at("b")), j.at("eps").get<double>());
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_json: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace pipgd
