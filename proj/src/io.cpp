#include "minimax/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

#include "minimax/errors.hpp"

namespace minimax {

json number_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ValidationError("expected a number, got " + j.dump());
}

json matrix_json(const Mat& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError(what + " must be a non-empty array of rows");
  }
  const size_t rows = j.size();
  size_t cols = 0;
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].empty()) throw ValidationError(what + ": each row must be a non-empty array");
    if (i == 0) cols = j[i].size();
    if (j[i].size() != cols) throw ValidationError(what + ": rows have different lengths");
  }
  Mat M(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    for (size_t k = 0; k < cols; ++k) {
      const json& v = j[i][k];
      if (!v.is_number()) throw ValidationError(what + ": entries must be numbers");
      M(i, k) = v.get<double>();
    }
  }
  if (!M.allFinite()) throw ValidationError(what + ": entries must be finite");
  return M;
}

json vector_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number_json(v(i)));
  return a;
}

json complex_vector_json(const CVec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

json problem_to_json(const MinimaxProblem& problem) {
  static const char* builtins[] = {"bilinear", "scalar_degenerate", "nondegenerate_quadratic",
                                   "strict_nonminimax_demo"};
  for (const char* name : builtins) {
    if (problem.name() == name) {
      json j = {{"kind", "builtin"}, {"name", name}};
      for (const auto& [k, v] : problem.parameters()) j[k] = v;
      return j;
    }
  }
  const auto& q = problem.quadratic_spec();
  if (!q) {
    throw ValidationError("problem '" + problem.name() + "' has no JSON representation");
  }
  return {{"kind", "quadratic"}, {"A", matrix_json(q->A)}, {"B", matrix_json(q->B)}, {"C", matrix_json(q->C)}};
}

MinimaxProblem problem_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ValidationError("problem JSON needs a string field 'kind'");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "quadratic") {
    for (const char* key : {"A", "B", "C"}) {
      if (!j.contains(key)) throw ValidationError(std::string("quadratic problem is missing '") + key + "'");
    }
    QuadraticSpec spec{matrix_from_json(j["A"], "A"), matrix_from_json(j["B"], "B"),
                       matrix_from_json(j["C"], "C")};
    return MinimaxProblem::quadratic(std::move(spec));
  }
  if (kind == "builtin") {
    if (!j.contains("name") || !j["name"].is_string()) {
      throw ValidationError("builtin problem needs a string field 'name'");
    }
    std::map<std::string, double> params;
    for (const auto& [k, v] : j.items()) {
      if (k == "kind" || k == "name") continue;
      if (!v.is_number()) throw ValidationError("builtin parameter '" + k + "' must be a number");
      params[k] = v.get<double>();
    }
    return builtin_problem(j["name"].get<std::string>(), params);
  }
  throw ValidationError("unknown problem kind '" + kind + "'");
}

MinimaxProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open problem file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("problem file '" + path + "' is not valid JSON: " + e.what());
  }
  return problem_from_json(j);
}

void save_problem_file(const MinimaxProblem& problem, const std::string& path) {
  write_json_file(problem_to_json(problem), path);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Index d = traj.points.empty() ? 0 : traj.points.front().z.size();
  os << "step,t";
  for (Index i = 0; i < d; ++i) os << ",z_" << i;
  os << ",F_norm\n";
  os << std::setprecision(17);
  for (const Sample& p : traj.points) {
    os << p.step << ',' << p.t;
    for (Index i = 0; i < d; ++i) os << ',' << p.z(i);
    os << ',' << p.F_norm << '\n';
  }
}

void write_eigencurves_csv(std::ostream& os, const EigenCurves& curves) {
  os << "eps,j,re,im,label\n";
  os << std::setprecision(17);
  for (size_t k = 0; k < curves.eps_grid.size(); ++k) {
    for (Index j = 0; j < curves.size(); ++j) {
      const Complex l = curves.lambda(static_cast<Index>(k), j);
      os << curves.eps_grid[k] << ',' << j << ',' << l.real() << ',' << l.imag() << ','
         << to_string(curves.type[j]) << '\n';
    }
  }
}

json second_order_json(const SecondOrderVerdict& v) {
  return {{"B_nsd", v.B_nsd},
          {"Sres_psd", v.Sres_psd},
          {"B_marginal", v.B_marginal},
          {"Sres_marginal", v.Sres_marginal},
          {"lambda_max_B", number_json(v.lambda_max_B)},
          {"lambda_min_Sres", number_json(v.lambda_min_Sres)}};
}

json classification_json(const EquilibriumReport& rep) {
  json iota = json::array();
  for (double x : rep.iota) iota.push_back(number_json(x));
  json j = {{"r", rep.r},
            {"w", rep.w},
            {"spec_Sres", vector_json(rep.spec_Sres)},
            {"spec_negB", vector_json(rep.spec_negB)},
            {"sigma", vector_json(rep.sigma)},
            {"iota", iota},
            {"s0", number_json(rep.s0)},
            {"B_nsd", rep.second_order.B_nsd},
            {"Sres_psd", rep.second_order.Sres_psd},
            {"strict_non_minimax", rep.strict_non_minimax}};
  if (rep.iota_closed_form) {
    json c = json::array();
    for (double x : *rep.iota_closed_form) c.push_back(number_json(x));
    j["iota_closed_form"] = c;
  }
  if (rep.uSu) {
    json c = json::array();
    for (double x : *rep.uSu) c.push_back(number_json(x));
    j["uSu"] = c;
    j["refined_criterion"] = *rep.refined_criterion;
  }
  return j;
}

json report_json(const EquilibriumReport& rep) {
  json verdicts = json::array();
  for (const MethodVerdict& mv : rep.verdicts) {
    json per_tau = json::array();
    for (Stability s : mv.observed.per_tau) per_tau.push_back(to_string(s));
    verdicts.push_back({{"method", to_string(mv.method)},
                        {"param", mv.param},
                        {"tau_star", number_json(mv.observed.tau_star)},
                        {"stable", to_string(mv.observed.outcome)},
                        {"predicted", to_string(mv.predicted)},
                        {"mismatch", mv.mismatch},
                        {"tau_grid", mv.observed.tau_grid},
                        {"per_tau", per_tau}});
  }
  json j = {{"point", vector_json(rep.point)},
            {"F_norm", rep.F_norm},
            {"L", rep.lipschitz},
            {"second_order", second_order_json(rep.second_order)},
            {"strict_non_minimax", rep.strict_non_minimax},
            {"s0", number_json(rep.s0)},
            {"sigma", vector_json(rep.sigma)},
            {"classification", classification_json(rep)},
            {"s_star", number_json(rep.s_star)},
            {"eta_star", number_json(rep.eta_star)},
            {"verdicts", verdicts},
            {"mismatches", rep.mismatches}};
  json iota = json::array();
  for (double x : rep.iota) iota.push_back(number_json(x));
  j["iota"] = iota;
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace minimax
