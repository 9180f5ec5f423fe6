// Copyright 2026 The iqastack Authors. All Rights Reserved.
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

#include <fstream>
#include <sstream>

#include "iqa/error.hpp"
#include "iqa/format.hpp"
#include "iqa/harness.hpp"

namespace iqa {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string reports_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "dataset,plcc,srocc,rmse,fingerprint\n";
  for (const EvalReport& r : reports) {
    const std::string name = r.variant == "baseline" ? r.dataset : r.dataset + "[" + r.variant + "]";
    out << csv_field(name) << ',' << shortest(r.plcc) << ',' << shortest(r.srocc) << ',' << shortest(r.rmse) << ',' << r.fingerprint << '\n';
  }
  return out.str();
}

std::string residuals_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "id,label,prediction,residual\n";
  for (std::size_t i = 0; i < report.residuals.size(); ++i) {
    out << csv_field(report.ids[i]) << ',' << shortest(report.labels[i]) << ',' << shortest(report.predictions[i]) << ','
        << shortest(report.residuals[i]) << '\n';
  }
  return out.str();
}

std::string plot_data(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ConfigError("plot data columns differ in length");
  std::ostringstream out;
  for (std::size_t i = 0; i < xs.size(); ++i) out << shortest(xs[i]) << ' ' << shortest(ys[i]) << '\n';
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace iqa
