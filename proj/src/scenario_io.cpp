#include "mimoee/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mimoee/errors.hpp"

namespace mimoee {

using nlohmann::json;

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw InvalidInput("matrix: expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidInput("matrix: ragged rows");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& e = row[static_cast<std::size_t>(k)];
      if (e.is_number()) {
        m(i, k) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw InvalidInput("matrix: entries must be [re, im] pairs");
      }
    }
  }
  return m;
}

json real_matrix_to_json(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const RealVector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

json scenario_to_json(const NetworkScenario& s) {
  json j;
  j["Q"] = s.num_players();
  j["nT"] = s.tx_antennas;
  j["nR"] = s.rx_antennas;
  json h = json::array();
  for (const auto& row : s.channels) {
    json hr = json::array();
    for (const auto& m : row) hr.push_back(matrix_to_json(m));
    h.push_back(std::move(hr));
  }
  j["H"] = std::move(h);
  json rn = json::array();
  for (const auto& m : s.noise_cov) rn.push_back(matrix_to_json(m));
  j["Rn"] = std::move(rn);
  j["P"] = s.max_power;
  j["Psi"] = s.circuit_power;
  j["seed"] = s.seed;

  json meta;
  if (s.meta.snr_db) meta["snr_db"] = *s.meta.snr_db;
  if (s.meta.sir_db) {
    // JSON has no infinity; +inf SIR is written as null.
    meta["sir_db"] = std::isfinite(*s.meta.sir_db) ? json(*s.meta.sir_db) : json(nullptr);
  }
  meta["snr_convention"] = to_string(s.meta.snr_convention);
  meta["channel"] = to_string(s.meta.channel);
  meta["sir_ignored"] = s.meta.sir_ignored;
  j["meta"] = std::move(meta);
  return j;
}

NetworkScenario scenario_from_json(const json& j) {
  try {
    NetworkScenario s;
    const auto q = j.at("Q").get<std::size_t>();
    s.tx_antennas = j.at("nT").get<std::vector<std::size_t>>();
    s.rx_antennas = j.at("nR").get<std::vector<std::size_t>>();
    const json& h = j.at("H");
    if (!h.is_array() || h.size() != q) throw InvalidInput("scenario: H must have Q rows");
    for (const auto& row : h) {
      if (!row.is_array() || row.size() != q) throw InvalidInput("scenario: H must be Q x Q");
      std::vector<ComplexMatrix> mats;
      for (const auto& m : row) mats.push_back(matrix_from_json(m));
      s.channels.push_back(std::move(mats));
    }
    for (const auto& m : j.at("Rn")) s.noise_cov.push_back(matrix_from_json(m));
    s.max_power = j.at("P").get<std::vector<double>>();
    s.circuit_power = j.at("Psi").get<std::vector<double>>();
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("meta")) {
      const json& meta = j["meta"];
      if (meta.contains("snr_db") && meta["snr_db"].is_number()) {
        s.meta.snr_db = meta["snr_db"].get<double>();
      }
      if (meta.contains("sir_db")) {
        s.meta.sir_db = meta["sir_db"].is_null() ? std::numeric_limits<double>::infinity()
                                                 : meta["sir_db"].get<double>();
      }
      if (meta.contains("snr_convention")) {
        s.meta.snr_convention = parse_snr_convention(meta["snr_convention"].get<std::string>());
      }
      if (meta.contains("channel")) {
        s.meta.channel = parse_channel_kind(meta["channel"].get<std::string>());
      }
      s.meta.sir_ignored = meta.value("sir_ignored", false);
    }
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("scenario JSON: ") + e.what());
  }
}

json profile_to_json(const StrategyProfile& p) {
  json a = json::array();
  for (const auto& b : p.blocks) a.push_back(matrix_to_json(b));
  return a;
}

StrategyProfile profile_from_json(const json& j) {
  if (!j.is_array()) throw InvalidInput("profile JSON: expected an array of matrices");
  StrategyProfile p;
  for (const auto& m : j) p.blocks.push_back(matrix_from_json(m));
  return p;
}

void write_scenario_file(const NetworkScenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  out << scenario_to_json(s).dump(1) << '\n';
  if (!out) throw InvalidInput("failed writing '" + path.string() + "'");
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("'" + path.string() + "': " + e.what());
  }
}

NetworkScenario read_scenario_file(const std::filesystem::path& path) {
  return scenario_from_json(read_json_file(path));
}

}  // namespace mimoee
