#include "tsqn/checkpoint.hpp"

#include <charconv>
#include <cmath>

#include "tsqn/error.hpp"

namespace tsqn {

using nlohmann::json;

std::string hex_encode(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double hex_decode(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto res = std::from_chars(first, last, v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorCode::Schema, "invalid hexadecimal float '" + std::string(text) + "'");
  }
  return v;
}

namespace {

constexpr const char* kFormat = "tsqn-checkpoint";
constexpr int kVersion = 1;

json encode(const Matrix& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) rows.push_back(hex_encode(A(i, j)));
  }
  return {{"rows", A.rows()}, {"cols", A.cols()}, {"data", rows}};
}

json encode(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(hex_encode(v(i)));
  return out;
}

Matrix decode_matrix(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw Error(ErrorCode::Schema, "matrix size mismatch");
  Matrix A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) A(i, j2) = hex_decode(data[i * cols + j2].get<std::string>());
  }
  return A;
}

Vector decode_vector(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = hex_decode(j[i].get<std::string>());
  return v;
}

}  // namespace

json save_checkpoint(const TsqnEstimator& est, const std::string& config_hash) {
  const auto& s = est.state();
  const auto& g = s.last_gains;
  return {
      {"format", kFormat},
      {"version", kVersion},
      {"config_hash", config_hash},
      {"k", s.k},
      {"theta_bar", encode(s.theta_bar)},
      {"P_bar", encode(s.P_bar)},
      {"P_bar_inv", encode(s.P_bar_inv)},
      {"theta_hat", encode(s.theta_hat)},
      {"P", encode(s.P)},
      {"P_inv", encode(s.P_inv)},
      {"info_accumulator", encode(s.info_accumulator)},
      {"lambda0", hex_encode(s.lambda0)},
      {"logdet_P_inv", hex_encode(s.logdet_P_inv)},
      {"logdet_P_bar_inv", hex_encode(s.logdet_P_bar_inv)},
      {"last_gains",
       {{"beta_bar", hex_encode(g.beta_bar)},
        {"a_bar", hex_encode(g.a_bar)},
        {"beta", hex_encode(g.beta)},
        {"a", hex_encode(g.a)},
        {"mu", hex_encode(g.mu)},
        {"g_lo", hex_encode(g.g_lo)},
        {"g_hi", hex_encode(g.g_hi)},
        {"M", hex_encode(g.M)},
        {"beta_tie", g.beta_tie}}},
  };
}

void load_checkpoint(TsqnEstimator& est, const json& doc, const std::string& config_hash) {
  try {
    if (doc.at("format").get<std::string>() != kFormat || doc.at("version").get<int>() != kVersion) {
      throw Error(ErrorCode::Schema, "not a version-1 tsqn checkpoint");
    }
    if (doc.at("config_hash").get<std::string>() != config_hash) {
      throw Error(ErrorCode::Config, "checkpoint was written for a different configuration");
    }
    EstimatorState s;
    s.k = doc.at("k").get<std::int64_t>();
    s.theta_bar = decode_vector(doc.at("theta_bar"));
    s.P_bar = decode_matrix(doc.at("P_bar"));
    s.P_bar_inv = decode_matrix(doc.at("P_bar_inv"));
    s.theta_hat = decode_vector(doc.at("theta_hat"));
    s.P = decode_matrix(doc.at("P"));
    s.P_inv = decode_matrix(doc.at("P_inv"));
    s.info_accumulator = decode_matrix(doc.at("info_accumulator"));
    s.lambda0 = hex_decode(doc.at("lambda0").get<std::string>());
    s.logdet_P_inv = hex_decode(doc.at("logdet_P_inv").get<std::string>());
    s.logdet_P_bar_inv = hex_decode(doc.at("logdet_P_bar_inv").get<std::string>());
    const auto& g = doc.at("last_gains");
    auto num = [&g](const char* key) { return hex_decode(g.at(key).get<std::string>()); };
    s.last_gains = {num("beta_bar"), num("a_bar"), num("beta"), num("a"), num("mu"),
                    num("g_lo"), num("g_hi"), num("M"), g.at("beta_tie").get<bool>()};
    est.restore(std::move(s));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace tsqn
