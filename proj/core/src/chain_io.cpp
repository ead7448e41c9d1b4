#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pdmp/error.hpp"
#include "pdmp/simulation.hpp"

namespace pdmp {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse number '" +
                    std::string(field) + "'");
  }
  return value;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

void write_chain_csv(std::ostream& out, const EmbeddedChain& chain) {
  out << "idx";
  for (std::size_t k = 1; k <= chain.dim; ++k) out << ",z_" << k;
  out << ",s,boundary\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const ChainRecord& r = chain[i];
    out << i;
    for (double v : r.z) out << ',' << format_double(v);
    out << ',' << format_double(r.s) << ',' << (r.boundary ? 1 : 0) << '\n';
  }
}

void write_chain_csv(const std::string& path, const EmbeddedChain& chain) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_chain_csv(out, chain);
  if (!out) throw DataError("failed writing '" + path + "'");
}

EmbeddedChain read_chain_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("chain CSV is empty (missing header)");
  const auto header = split_fields(trim_cr(line));
  if (header.size() < 4 || header.front() != "idx" || header[header.size() - 2] != "s" ||
      header.back() != "boundary") {
    throw DataError("line 1: chain CSV header must be idx,z_1,...,z_d,s,boundary");
  }
  EmbeddedChain chain;
  chain.dim = header.size() - 3;
  if (chain.dim > kMaxDim) throw DataError("line 1: too many state coordinates");
  for (std::size_t k = 0; k < chain.dim; ++k) {
    if (header[k + 1] != "z_" + std::to_string(k + 1)) {
      throw DataError("line 1: expected column z_" + std::to_string(k + 1));
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim_cr(line);
    if (view.empty()) continue;
    const auto fields = split_fields(view);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    ChainRecord rec;
    rec.z = State(chain.dim);
    for (std::size_t k = 0; k < chain.dim; ++k) rec.z[k] = parse_double(fields[k + 1], line_no);
    rec.s = parse_double(fields[chain.dim + 1], line_no);
    const std::string_view flag = fields.back();
    if (flag != "0" && flag != "1") {
      throw DataError("line " + std::to_string(line_no) + ": boundary must be 0 or 1");
    }
    if (!(rec.s >= 0.0)) {
      throw DataError("line " + std::to_string(line_no) + ": interarrival time must be >= 0");
    }
    rec.boundary = flag == "1";
    chain.records.push_back(rec);
  }
  return chain;
}

EmbeddedChain read_chain_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open chain file '" + path + "'");
  return read_chain_csv(in);
}

}  // namespace pdmp
