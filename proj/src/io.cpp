#include "bottleneck/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "json.hpp"

namespace bottleneck {

namespace {

std::vector<double> number_array(const nlohmann::json& j, const char* what)
{
  if (!j.is_array())
    throw std::invalid_argument(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number())
      throw std::invalid_argument(std::string(what) + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> number_matrix(const nlohmann::json& j, const char* what)
{
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(std::string(what) + " must be a non-empty array of rows");
  std::vector<std::vector<double>> out;
  for (const auto& row : j)
    out.push_back(number_array(row, what));
  for (const auto& row : out)
    if (row.size() != out.front().size() || row.empty())
      throw std::invalid_argument(std::string(what) + " rows must have equal, nonzero length");
  return out;
}

}  // namespace

JointDistribution parse_joint_json(std::string_view text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("input is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("input must be a JSON object");
  if (j.contains("p_xy"))
    return JointDistribution(number_matrix(j.at("p_xy"), "p_xy"));
  if (j.contains("q") && j.contains("T")) {
    const Distribution q(number_array(j.at("q"), "q"));
    const auto rows = number_matrix(j.at("T"), "T");
    if (rows.front().size() != q.size())
      throw std::invalid_argument("T must have one column per entry of q");
    return JointDistribution::from_marginal_channel(q, Channel::from_rows(rows));
  }
  throw std::invalid_argument("input needs \"p_xy\" or both \"q\" and \"T\"");
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content)
{
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot rename onto '" + path + "'");
  }
}

std::string format_double(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  if (v == 0.0)
    v = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s)
{
  if (s.find_first_of(",\"\n\r") == std::string_view::npos)
    return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string fnv1a64_hex(std::string_view bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::to_json() const
{
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : parameters)
    params[k] = v;
  nlohmann::json j{{"command", command},
                   {"input_digest", input_digest},
                   {"parameters", params},
                   {"tool_version", tool_version},
                   {"seed", seed}};
  return j.dump(2) + "\n";
}

}  // namespace bottleneck
