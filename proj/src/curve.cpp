// Copyright 2026 The ddsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ddsim/curve.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ddsim {

bool SignalCurve::has_errors() const {
  return std::any_of(stderrs.begin(), stderrs.end(), [](double s) { return s > 0.0; });
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

void write_curve_csv(std::ostream& out, const SignalCurve& curve,
                     std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "tau,mean,stderr,n\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double se = i < curve.stderrs.size() ? curve.stderrs[i] : 0.0;
    out << format_number(curve.taus[i]) << ',' << format_number(curve.means[i]) << ','
        << format_number(se) << ',' << curve.n << '\n';
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  return fields;
}

}  // namespace

SignalCurve read_curve_csv(std::istream& in) {
  SignalCurve curve;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> tau_col, signal_col, stderr_col;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = split(t);
    if (!tau_col) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "tau") tau_col = i;
        if (fields[i] == "signal" || fields[i] == "mean") signal_col = i;
        if (fields[i] == "stderr") stderr_col = i;
      }
      if (!tau_col || !signal_col) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": header must contain `tau` and `signal` (or `mean`)");
      }
      columns = fields.size();
      continue;
    }
    if (fields.size() < columns) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(columns) + " columns");
    }
    auto parse = [&](std::size_t col) {
      const std::string& f = fields[col];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad number '" + f + "'");
      }
      return v;
    };
    curve.taus.push_back(parse(*tau_col));
    curve.means.push_back(parse(*signal_col));
    curve.stderrs.push_back(stderr_col ? parse(*stderr_col) : 0.0);
  }
  if (!tau_col) throw std::runtime_error("curve file has no header");
  return curve;
}

}  // namespace ddsim
