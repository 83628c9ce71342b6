#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "minimax/dynamics.hpp"
#include "minimax/problems.hpp"
#include "minimax/spectral.hpp"
#include "minimax/stability.hpp"

namespace minimax {

using json = nlohmann::json;

// Non-finite values become the strings "inf", "-inf", "nan".
json number_json(double x);
double number_from_json(const json& j);

json matrix_json(const Mat& M);
Mat matrix_from_json(const json& j, const std::string& what);
json vector_json(const Vec& v);
json complex_vector_json(const CVec& v);  // [[re, im], ...]

// {"kind":"quadratic","A":[[...]],"B":[[...]],"C":[[...]]} or
// {"kind":"builtin","name":"...", <params>}.
json problem_to_json(const MinimaxProblem& problem);
MinimaxProblem problem_from_json(const json& j);
MinimaxProblem load_problem_file(const std::string& path);
void save_problem_file(const MinimaxProblem& problem, const std::string& path);

// Header `step,t,z_0,...,z_{d-1},F_norm`.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// Header `eps,j,re,im,label`.
void write_eigencurves_csv(std::ostream& os, const EigenCurves& curves);

json second_order_json(const SecondOrderVerdict& v);
json classification_json(const EquilibriumReport& rep);
json report_json(const EquilibriumReport& rep);

void write_json_file(const json& j, const std::string& path);

}  // namespace minimax
