#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pglab/lqr.hpp"
#include "pglab/markov_game.hpp"
#include "pglab/matrix_game.hpp"
#include "pglab/tabular_mdp.hpp"

namespace pglab {

using Json = nlohmann::json;

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_json_file: cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("load_json_file: " + path + ": " + e.what());
  }
}

namespace detail {

inline const Json& require_field(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(std::string(where) + ": missing field '" + key + "'");
  return j.at(key);
}

inline double as_number(const Json& j, const char* where) {
  if (!j.is_number()) throw ConfigError(std::string(where) + ": expected a number");
  return j.get<double>();
}

}  // namespace detail

inline Vec vec_from_json(const Json& j, const char* where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(std::string(where) + ": expected a non-empty array");
  Vec out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = detail::as_number(j[i], where);
  return out;
}

inline Mat mat_from_json(const Json& j, const char* where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(std::string(where) + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw ConfigError(std::string(where) + ": rows must be non-empty arrays");
  const std::size_t cols = j[0].size();
  Mat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError(std::string(where) + ": ragged matrix");
    for (std::size_t c = 0; c < cols; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          detail::as_number(j[r][c], where);
  }
  return out;
}

inline Json json_from_vec(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Json json_from_mat(const Mat& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

// {"gamma": g, "rho": [S], "r": [S][A], "P": [S][A][S]}
inline TabularMdp mdp_from_json(const Json& j) {
  const char* where = "mdp_from_json";
  const double gamma = detail::as_number(detail::require_field(j, "gamma", where), where);
  const Vec rho = vec_from_json(detail::require_field(j, "rho", where), where);
  const Mat r = mat_from_json(detail::require_field(j, "r", where), where);
  const Json& P_json = detail::require_field(j, "P", where);
  if (!P_json.is_array() || static_cast<Eigen::Index>(P_json.size()) != r.rows())
    throw ConfigError("mdp_from_json: P must hold one block per state");
  std::vector<Mat> P;
  P.reserve(P_json.size());
  for (const Json& block : P_json) P.push_back(mat_from_json(block, where));
  return TabularMdp(std::move(P), r, gamma, Distribution(rho));
}

inline Json json_from_mdp(const TabularMdp& mdp) {
  Json P = Json::array();
  for (Eigen::Index s = 0; s < mdp.num_states(); ++s) P.push_back(json_from_mat(mdp.transitions(s)));
  return Json{{"gamma", mdp.gamma()},
              {"rho", json_from_vec(mdp.rho().vec())},
              {"r", json_from_mat(mdp.rewards())},
              {"P", std::move(P)}};
}

// {"payoff": [m][n]}
inline MatrixGame matrix_game_from_json(const Json& j) {
  return MatrixGame(mat_from_json(detail::require_field(j, "payoff", "matrix_game_from_json"),
                                  "matrix_game_from_json"));
}

inline Json json_from_matrix_game(const MatrixGame& game) {
  return Json{{"payoff", json_from_mat(game.payoff())}};
}

// {"gamma": g, "r": [S][m][n], "P": [S][m][n][S]}; the transition block for a
// state flattens the joint action (a, b) row-major into an (m*n) x S matrix.
inline ZeroSumMarkovGame markov_game_from_json(const Json& j) {
  const char* where = "markov_game_from_json";
  const double gamma = detail::as_number(detail::require_field(j, "gamma", where), where);
  const Json& r_json = detail::require_field(j, "r", where);
  const Json& P_json = detail::require_field(j, "P", where);
  if (!r_json.is_array() || r_json.empty() || !P_json.is_array() ||
      P_json.size() != r_json.size())
    throw ConfigError("markov_game_from_json: r and P must hold one block per state");
  const std::size_t S = r_json.size();
  std::vector<Mat> rewards, transitions;
  rewards.reserve(S);
  transitions.reserve(S);
  for (std::size_t s = 0; s < S; ++s) {
    Mat r_s = mat_from_json(r_json[s], where);
    const Eigen::Index m = r_s.rows(), n = r_s.cols();
    const Json& block = P_json[s];
    if (!block.is_array() || static_cast<Eigen::Index>(block.size()) != m)
      throw ConfigError("markov_game_from_json: P block must hold one row-action slice");
    Mat P_s(m * n, static_cast<Eigen::Index>(S));
    for (Eigen::Index a = 0; a < m; ++a) {
      if (!block[static_cast<std::size_t>(a)].is_array() ||
          static_cast<Eigen::Index>(block[static_cast<std::size_t>(a)].size()) != n)
        throw ConfigError("markov_game_from_json: P slice must hold one row per column action");
      for (Eigen::Index b = 0; b < n; ++b)
        P_s.row(a * n + b) =
            vec_from_json(block[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)], where)
                .transpose();
    }
    rewards.push_back(std::move(r_s));
    transitions.push_back(std::move(P_s));
  }
  return ZeroSumMarkovGame(std::move(transitions), std::move(rewards), gamma);
}

inline Json json_from_markov_game(const ZeroSumMarkovGame& game) {
  Json r = Json::array(), P = Json::array();
  for (Eigen::Index s = 0; s < game.n_states(); ++s) {
    r.push_back(json_from_mat(game.reward(s)));
    const Mat& P_s = game.transition(s);
    Json slices = Json::array();
    for (Eigen::Index a = 0; a < game.max_actions(); ++a) {
      Json slice = Json::array();
      for (Eigen::Index b = 0; b < game.min_actions(); ++b)
        slice.push_back(json_from_vec(P_s.row(a * game.min_actions() + b).transpose()));
      slices.push_back(std::move(slice));
    }
    P.push_back(std::move(slices));
  }
  return Json{{"gamma", game.gamma()}, {"r", std::move(r)}, {"P", std::move(P)}};
}

// {"A": [d][d], "B": [d][k], "Q": [d][d], "R": [k][k], "Sigma0": [d][d]}
inline LqrProblem lqr_from_json(const Json& j) {
  const char* where = "lqr_from_json";
  return LqrProblem(mat_from_json(detail::require_field(j, "A", where), where),
                    mat_from_json(detail::require_field(j, "B", where), where),
                    mat_from_json(detail::require_field(j, "Q", where), where),
                    mat_from_json(detail::require_field(j, "R", where), where),
                    mat_from_json(detail::require_field(j, "Sigma0", where), where));
}

inline Json json_from_lqr(const LqrProblem& prob) {
  return Json{{"A", json_from_mat(prob.A())},
              {"B", json_from_mat(prob.B())},
              {"Q", json_from_mat(prob.Q())},
              {"R", json_from_mat(prob.R())},
              {"Sigma0", json_from_mat(prob.sigma0())}};
}

}  // namespace pglab
