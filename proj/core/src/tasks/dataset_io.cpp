#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedcvr/error.hpp"
#include "fedcvr/tasks/dataset.hpp"

namespace fedcvr::tasks {

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_split(std::ostream& out, std::size_t client, const char* name, const Dataset& d) {
  for (Eigen::Index r = 0; r < d.x.rows(); ++r) {
    out << client << ',' << name << ',' << format_real(d.y(r));
    for (Eigen::Index c = 0; c < d.x.cols(); ++c) out << ',' << format_real(d.x(r, c));
    out << '\n';
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}

double parse_real(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("dataset csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

struct Rows {
  std::vector<double> y;
  std::vector<std::vector<double>> x;
};

Dataset to_dataset(const Rows& rows, std::size_t features) {
  Dataset d;
  const auto n = static_cast<Eigen::Index>(rows.y.size());
  d.x.resize(n, static_cast<Eigen::Index>(features));
  d.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    d.y(r) = rows.y[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < features; ++c) d.x(r, static_cast<Eigen::Index>(c)) = rows.x[static_cast<std::size_t>(r)][c];
  }
  return d;
}

}  // namespace

void write_datasets_csv(std::ostream& out, const std::vector<ClientData>& clients) {
  const std::size_t features = clients.empty() ? 0 : clients.front().train.features();
  out << "client_id,split,y";
  for (std::size_t c = 0; c < features; ++c) out << ",x_" << c;
  out << '\n';
  for (std::size_t k = 0; k < clients.size(); ++k) {
    write_split(out, k, "train", clients[k].train);
    write_split(out, k, "test", clients[k].test);
  }
}

std::vector<ClientData> read_datasets_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset csv: missing header");
  const auto header = split_fields(line);
  if (header.size() < 3 || header[0] != "client_id" || header[1] != "split" || header[2] != "y") {
    throw ConfigError("dataset csv: unexpected header");
  }
  const std::size_t features = header.size() - 3;

  std::vector<Rows> train;
  std::vector<Rows> test;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ConfigError("dataset csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    std::size_t client = 0;
    const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), client);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size()) {
      throw ConfigError("dataset csv line " + std::to_string(line_no) + ": bad client id");
    }
    if (client >= train.size()) {
      train.resize(client + 1);
      test.resize(client + 1);
    }
    Rows* target = nullptr;
    if (fields[1] == "train") {
      target = &train[client];
    } else if (fields[1] == "test") {
      target = &test[client];
    } else {
      throw ConfigError("dataset csv line " + std::to_string(line_no) + ": unknown split '" + fields[1] + "'");
    }
    target->y.push_back(parse_real(fields[2], line_no));
    std::vector<double> row(features);
    for (std::size_t c = 0; c < features; ++c) row[c] = parse_real(fields[3 + c], line_no);
    target->x.push_back(std::move(row));
  }

  std::vector<ClientData> out(train.size());
  for (std::size_t k = 0; k < train.size(); ++k) {
    out[k].train = to_dataset(train[k], features);
    out[k].test = to_dataset(test[k], features);
  }
  return out;
}

}  // namespace fedcvr::tasks
