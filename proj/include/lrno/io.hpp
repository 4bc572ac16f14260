#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lrno/instances.hpp"
#include "lrno/solvers.hpp"

namespace lrno {

using Json = nlohmann::json;

// Shortest decimal that parses back to the same double.
std::string format_double(double x);

// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string content_hash(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

// Row-major flattening used by every file format.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, Index rows, Index cols);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

// {version:1, n, r, m, seed, sigma, family, lambda1, lambda_r, m_star, A, w,
//  b_tilde, delta_hat, delta_certified}
Json instance_to_json(const Instance& inst);
Instance instance_from_json(const Json& j);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

void save_instance(const Instance& inst, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);
Json load_json(const std::filesystem::path& path);

// CSV with header iter,objective,grad_norm,dist_ref_fro.
std::string trace_csv(const Trace& trace);
std::vector<TraceRecord> trace_records_from_csv(std::string_view text);

// {x_hat (row-major), termination, grad_norm, hess_min_eig, order,
//  dist_to_mstar_fro, sigma_r_of_m_hat, diverged}
Json point_to_json(const CriticalPoint& p);
CriticalPoint point_from_json(const Json& j, Index n, Index r);

}  // namespace lrno
