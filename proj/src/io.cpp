#include "lrno/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lrno {

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

std::string file_hash(const std::filesystem::path& path) { return content_hash(read_text(path)); }

Json matrix_to_json(const Matrix& m) {
  Json arr = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  }
  return arr;
}

Matrix matrix_from_json(const Json& j, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows * cols) {
    std::ostringstream os;
    os << "expected an array of " << rows * cols << " numbers";
    throw IoError(os.str());
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < cols; ++c) m(i, c) = j.at(static_cast<std::size_t>(i * cols + c)).get<double>();
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

Json instance_to_json(const Instance& inst) {
  Json j;
  j["version"] = 1;
  j["n"] = inst.n;
  j["r"] = inst.r;
  j["m"] = inst.m;
  j["seed"] = inst.meta.seed;
  j["sigma"] = inst.meta.sigma;
  j["family"] = to_string(inst.meta.family);
  j["lambda1"] = inst.meta.lambda1;
  j["lambda_r"] = inst.meta.lambda_r;
  j["m_star"] = matrix_to_json(inst.m_star.mat());
  Json a = Json::array();
  for (Index i = 0; i < inst.m; ++i) a.push_back(matrix_to_json(inst.op->sensing_matrix(i).mat()));
  j["A"] = std::move(a);
  j["w"] = vector_to_json(inst.noise.values);
  j["b_tilde"] = vector_to_json(inst.b_tilde);
  j["delta_hat"] = inst.meta.delta_hat;
  j["delta_certified"] = inst.meta.delta_certified ? Json(*inst.meta.delta_certified) : Json(nullptr);
  return j;
}

Instance instance_from_json(const Json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw IoError("unsupported instance version");
    Instance inst;
    inst.n = j.at("n").get<Index>();
    inst.r = j.at("r").get<Index>();
    inst.m = j.at("m").get<Index>();
    inst.meta.seed = j.at("seed").get<std::uint64_t>();
    inst.meta.sigma = j.at("sigma").get<double>();
    inst.meta.family = parse_noise_family(j.at("family").get<std::string>());
    inst.meta.lambda1 = j.at("lambda1").get<double>();
    inst.meta.lambda_r = j.at("lambda_r").get<double>();
    inst.meta.delta_hat = j.at("delta_hat").get<double>();
    if (!j.at("delta_certified").is_null()) inst.meta.delta_certified = j.at("delta_certified").get<double>();
    inst.m_star = SymMatrix(matrix_from_json(j.at("m_star"), inst.n, inst.n));
    const Json& a = j.at("A");
    if (!a.is_array() || static_cast<Index>(a.size()) != inst.m) throw IoError("A must hold m matrices");
    std::vector<SymMatrix> mats;
    mats.reserve(a.size());
    for (const Json& ai : a) mats.emplace_back(matrix_from_json(ai, inst.n, inst.n));
    inst.op = std::make_shared<MeasurementOperator>(mats);
    inst.noise.values = vector_from_json(j.at("w"));
    inst.noise.q = inst.noise.values.norm();
    inst.noise.sigma = inst.meta.sigma;
    inst.noise.family = inst.meta.family;
    inst.b_tilde = vector_from_json(j.at("b_tilde"));
    if (inst.noise.values.size() != inst.m || inst.b_tilde.size() != inst.m) {
      throw IoError("w and b_tilde must have m entries");
    }
    return inst;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed instance JSON: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
  write_text(path, instance_to_json(inst).dump() + "\n");
}

Json load_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

Instance load_instance(const std::filesystem::path& path) {
  const Json j = load_json(path);
  try {
    return instance_from_json(j);
  } catch (const Json::exception& e) {
    throw IoError("malformed instance " + path.string() + ": " + e.what());
  }
}

std::string trace_csv(const Trace& trace) {
  std::string out = "iter,objective,grad_norm,dist_ref_fro\n";
  for (const TraceRecord& r : trace.records) {
    out += std::to_string(r.iter);
    out += ',';
    out += format_double(r.objective);
    out += ',';
    out += format_double(r.grad_norm);
    out += ',';
    out += format_double(r.dist_ref_fro);
    out += '\n';
  }
  return out;
}

std::vector<TraceRecord> trace_records_from_csv(std::string_view text) {
  std::vector<TraceRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "iter,objective,grad_norm,dist_ref_fro") {
    throw IoError("trace CSV must start with the header iter,objective,grad_norm,dist_ref_fro");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell[4];
    for (auto& c : cell) {
      if (!std::getline(row, c, ',')) throw IoError("trace CSV row has fewer than four fields: " + line);
    }
    try {
      out.push_back({std::stol(cell[0]), std::stod(cell[1]), std::stod(cell[2]), std::stod(cell[3])});
    } catch (const std::exception&) {
      throw IoError("trace CSV row is not numeric: " + line);
    }
  }
  return out;
}

Json point_to_json(const CriticalPoint& p) {
  return Json{{"x_hat", matrix_to_json(p.x)},
              {"termination", to_string(p.termination)},
              {"grad_norm", p.grad_norm},
              {"hess_min_eig", p.hess_min_eig},
              {"order", to_string(p.order)},
              {"dist_to_mstar_fro", p.dist_to_mstar_fro},
              {"sigma_r_of_m_hat", p.sigma_r_of_m_hat},
              {"diverged", p.diverged}};
}

CriticalPoint point_from_json(const Json& j, Index n, Index r) {
  try {
    CriticalPoint p;
    p.x = matrix_from_json(j.at("x_hat"), n, r);
    p.grad_norm = j.at("grad_norm").get<double>();
    p.hess_min_eig = j.at("hess_min_eig").get<double>();
    p.dist_to_mstar_fro = j.value("dist_to_mstar_fro", 0.0);
    p.sigma_r_of_m_hat = j.value("sigma_r_of_m_hat", 0.0);
    p.diverged = j.value("diverged", false);
    const std::string order = j.at("order").get<std::string>();
    if (order == "first") p.order = PointOrder::first;
    else if (order == "second") p.order = PointOrder::second;
    else if (order == "saddle") p.order = PointOrder::saddle;
    else throw IoError("unknown point order '" + order + "'");
    const std::string term = j.at("termination").get<std::string>();
    if (term == "converged") p.termination = Termination::converged;
    else if (term == "max_iters") p.termination = Termination::max_iters;
    else if (term == "diverged") p.termination = Termination::diverged;
    else throw IoError("unknown termination '" + term + "'");
    return p;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed critical point: ") + e.what());
  }
}

}  // namespace lrno
