#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "crowdagg/evaluation.hpp"

namespace crowdagg {

// "<experiment>_<method>_<scope>_seed<seed>"; every emitted file of a run
// starts with this stem.
std::string report_stem(const std::string& experiment, const std::string& method, const std::string& scope,
                        std::uint64_t seed);

// Shortest text that round-trips the value.
std::string format_real(double v);

// One row per fold: [x,]repeat,fold,emotion,test_size,accuracy
std::string folds_csv(const ExperimentReport& report);
// One row per curve point: <x>,mean,stddev,samples
std::string curve_csv(const ExperimentReport& report);
// Structured summary with the full settings snapshot (JSON).
std::string summary_json(const ExperimentReport& report);

// Long form: train,test,kind,accuracy (kind = transfer | cv).
std::string transfer_csv(const TransferGrid& grid);
// 4x4 grid; diagonal cells are written as "cv:<accuracy>".
std::string transfer_grid_csv(const TransferGrid& grid);
std::string transfer_summary_json(const TransferGrid& grid);

// top_n,overlap_count,overlap_rate,null_probability
std::string overlap_csv(std::span<const OverlapResult> rows);
// top_n,intersection_count,rate,random_expected_rate
std::string elite_overlap_csv(std::span<const EliteOverlap> rows, std::size_t participants);
// top_n,emotion_a,emotion_b,jaccard
std::string jaccard_csv(std::span<const EliteOverlap> rows);

}  // namespace crowdagg
