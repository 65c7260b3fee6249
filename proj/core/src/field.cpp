#include "gpplan/field.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gpplan/errors.hpp"
#include "gpplan/math.hpp"

namespace gpplan {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view token, const char* what) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw IoError(std::string("field csv: bad ") + what + " value '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

FieldGrid sample_field(int width, int height, double cell_size, const GpHyperparams& hyper,
                       std::uint64_t seed, const std::string& units) {
  hyper.validate();
  const Domain domain = Domain::grid(width, height, cell_size);
  const int m = domain.size();
  if (m > 2500) throw ArgumentError("sample_field: grid larger than 2500 cells");

  FieldGrid field;
  field.width = width;
  field.height = height;
  field.cell_size = cell_size;
  field.units = units;
  field.values.assign(m, hyper.prior_mean);
  if (hyper.signal_variance == 0.0) return field;  // degenerate prior: constant field

  Eigen::MatrixXd cov(m, m);
  for (int i = 0; i < m; ++i) {
    const Location a = domain.location(i);
    for (int j = 0; j <= i; ++j) {
      cov(i, j) = kernel_eval(hyper, a, domain.location(j));
      cov(j, i) = cov(i, j);
    }
    cov(i, i) += 1e-10 * hyper.signal_variance;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("sample_field: prior covariance factorization failed");

  GaussianStream stream(seed);
  Eigen::VectorXd xi(m);
  for (int i = 0; i < m; ++i) xi[i] = stream.next();
  const Eigen::VectorXd y = Eigen::MatrixXd(llt.matrixL()) * xi;
  for (int i = 0; i < m; ++i) field.values[i] += y[i];
  return field;
}

FieldGrid read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("field csv: missing header line");
  const auto header = split_csv(line);
  if (header.size() != 4) throw IoError("field csv: header must be width,height,cell_size,units");

  FieldGrid field;
  field.width = static_cast<int>(parse_double(header[0], "width"));
  field.height = static_cast<int>(parse_double(header[1], "height"));
  field.cell_size = parse_double(header[2], "cell_size");
  field.units = std::string(header[3]);
  if (field.width < 1 || field.height < 1 || field.cell_size <= 0.0)
    throw IoError("field csv: invalid header dimensions");

  field.values.reserve(static_cast<std::size_t>(field.width) * field.height);
  for (int row = 0; row < field.height; ++row) {
    if (!std::getline(in, line)) throw IoError("field csv: missing value row");
    const auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != field.width)
      throw IoError("field csv: row width mismatch");
    for (const auto& c : cells) field.values.push_back(parse_double(c, "cell"));
  }
  return field;
}

void write_field_csv(const FieldGrid& field, std::ostream& out) {
  if (field.units.find(',') != std::string::npos)
    throw IoError("field csv: units string must not contain commas");
  if (static_cast<int>(field.values.size()) != field.width * field.height)
    throw IoError("field csv: value count does not match dimensions");
  out << field.width << ',' << field.height << ',' << format_double(field.cell_size) << ','
      << field.units << '\n';
  for (int row = 0; row < field.height; ++row) {
    for (int col = 0; col < field.width; ++col) {
      if (col) out << ',';
      out << format_double(field.values[static_cast<std::size_t>(row) * field.width + col]);
    }
    out << '\n';
  }
}

FieldGrid load_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field csv: " + path);
  return read_field_csv(in);
}

void save_field_csv(const FieldGrid& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write field csv: " + path);
  write_field_csv(field, out);
  if (!out) throw IoError("write failed for field csv: " + path);
}

}  // namespace gpplan
