#include "crowdagg/report.hpp"

#include <charconv>
#include <json.hpp>

#include "crowdagg/kernels.hpp"

namespace crowdagg {

std::string format_real(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string report_stem(const std::string& experiment, const std::string& method, const std::string& scope,
                        std::uint64_t seed) {
  return experiment + "_" + method + "_" + scope + "_seed" + std::to_string(seed);
}

std::string folds_csv(const ExperimentReport& report) {
  const bool curve = !report.curve_x.empty();
  std::string out = curve ? report.curve_x + "," : "";
  out += "repeat,fold,emotion,test_size,accuracy\n";
  for (const auto& f : report.folds) {
    if (curve) out += format_real(f.x) + ",";
    out += std::to_string(f.repeat) + "," + std::to_string(f.fold) + ",";
    out += f.emotion ? std::string(to_string(*f.emotion)) : std::string("all");
    out += "," + std::to_string(f.test_size) + "," + format_real(f.accuracy) + "\n";
  }
  return out;
}

std::string curve_csv(const ExperimentReport& report) {
  std::string out = (report.curve_x.empty() ? std::string("x") : report.curve_x) + ",mean,stddev,samples\n";
  for (const auto& p : report.curve) {
    out += format_real(p.x) + "," + format_real(p.mean) + "," + format_real(p.stddev) + "," +
           std::to_string(p.samples) + "\n";
  }
  return out;
}

namespace {

nlohmann::ordered_json settings_json(const Settings& settings) {
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const auto& [k, v] : settings) s[k] = v;
  s["kernels"] = std::string(kernels::active().name);
  return s;
}

}  // namespace

std::string summary_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["method"] = report.method;
  j["scope"] = report.scope;
  j["mean_accuracy"] = report.mean_accuracy;
  j["fold_count"] = report.folds.size();
  j["settings"] = settings_json(report.settings);
  if (!report.curve_x.empty()) {
    auto curve = nlohmann::ordered_json::array();
    for (const auto& p : report.curve) {
      curve.push_back({{report.curve_x, p.x}, {"mean", p.mean}, {"stddev", p.stddev}, {"samples", p.samples}});
    }
    j["curve"] = curve;
  }
  j["audit"] = {{"audited_fits", report.audited_fits}, {"leaked_reads", report.leaked_reads}};
  j["version"] = CROWDAGG_VERSION;
  return j.dump(2) + "\n";
}

std::string transfer_csv(const TransferGrid& grid) {
  std::string out = "train,test,kind,accuracy\n";
  for (const auto r : kAllEmotions) {
    for (const auto c : kAllEmotions) {
      const auto kind = grid.kind[std::size_t(r)][std::size_t(c)] == CellKind::CrossValidated ? "cv" : "transfer";
      out += std::string(to_string(r)) + "," + std::string(to_string(c)) + "," + kind + "," +
             format_real(grid.accuracy[std::size_t(r)][std::size_t(c)]) + "\n";
    }
  }
  return out;
}

std::string transfer_grid_csv(const TransferGrid& grid) {
  std::string out = "train";
  for (const auto c : kAllEmotions) out += "," + std::string(to_string(c));
  out += "\n";
  for (const auto r : kAllEmotions) {
    out += to_string(r);
    for (const auto c : kAllEmotions) {
      out += ",";
      if (grid.kind[std::size_t(r)][std::size_t(c)] == CellKind::CrossValidated) out += "cv:";
      out += format_real(grid.accuracy[std::size_t(r)][std::size_t(c)]);
    }
    out += "\n";
  }
  return out;
}

std::string transfer_summary_json(const TransferGrid& grid) {
  nlohmann::ordered_json j;
  j["experiment"] = "transfer_matrix";
  j["method"] = grid.method;
  j["off_diagonal_mean"] = grid.off_diagonal_mean();
  auto rows = nlohmann::ordered_json::object();
  for (const auto r : kAllEmotions) {
    auto row = nlohmann::ordered_json::object();
    for (const auto c : kAllEmotions) row[std::string(to_string(c))] = grid.accuracy[std::size_t(r)][std::size_t(c)];
    rows[std::string(to_string(r))] = row;
  }
  j["accuracy"] = rows;
  j["diagonal"] = "cv";
  j["settings"] = settings_json(grid.settings);
  j["audit"] = {{"audited_fits", grid.audited_fits}, {"leaked_reads", grid.leaked_reads}};
  j["version"] = CROWDAGG_VERSION;
  return j.dump(2) + "\n";
}

std::string overlap_csv(std::span<const OverlapResult> rows) {
  std::string out = "top_n,overlap_count,overlap_rate,null_probability\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.overlap_count) + "," + format_real(r.overlap_rate) + "," +
           format_real(r.null_probability) + "\n";
  }
  return out;
}

std::string elite_overlap_csv(std::span<const EliteOverlap> rows, std::size_t participants) {
  std::string out = "top_n,intersection_count,rate,random_expected_rate\n";
  for (const auto& r : rows) {
    const auto dist = random_intersection_distribution(participants, r.top_n, 4);
    double expected = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) expected += double(k) * dist[k];
    out += std::to_string(r.top_n) + "," + std::to_string(r.intersection_count) + "," + format_real(r.rate) + "," +
           format_real(expected / double(r.top_n)) + "\n";
  }
  return out;
}

std::string jaccard_csv(std::span<const EliteOverlap> rows) {
  std::string out = "top_n,emotion_a,emotion_b,jaccard\n";
  for (const auto& r : rows) {
    for (const auto& [pair, j] : r.pairwise_jaccard) {
      out += std::to_string(r.top_n) + "," + std::string(to_string(pair.first)) + "," +
             std::string(to_string(pair.second)) + "," + format_real(j) + "\n";
    }
  }
  return out;
}

}  // namespace crowdagg
