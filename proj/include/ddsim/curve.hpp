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

#pragma once

// Sampled signal curves and their CSV form.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ddsim {

struct SignalCurve {
  std::vector<double> taus;
  std::vector<double> means;
  std::vector<double> stderrs;  // zero for closed-form curves
  std::size_t n = 0;            // trajectories behind each mean, 0 if analytic
  std::vector<std::string> warnings;

  std::size_t size() const { return taus.size(); }
  bool has_errors() const;
};

/// Writes `tau,mean,stderr,n`, preceded by one `# ...` line per comment.
void write_curve_csv(std::ostream& out, const SignalCurve& curve,
                     std::span<const std::string> comments = {});

/// Reads a curve from CSV. The header must name a `tau` column and one of
/// `signal` or `mean`; a `stderr` column is optional. Lines starting with
/// '#' are skipped. Throws std::runtime_error with the offending line number.
SignalCurve read_curve_csv(std::istream& in);

/// Shortest round-trip decimal form of x.
std::string format_number(double x);

}  // namespace ddsim
