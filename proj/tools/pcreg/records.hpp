#pragma once

#include <pcreg/geom.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcreg::cli {

/// One stage (coarse or refined) of a registration result line.
struct StageRecord {
  std::optional<double> re_deg, te_m;  // absent without ground truth
  std::optional<bool> success;
  std::optional<double> wall_time;     // absent with --timing off
  std::size_t iterations = 0;
  std::size_t inliers = 0;             // coarse: RANSAC inliers; refined: gated pairs
  std::string status;
  std::optional<double> rmse, fitness;  // refined only
};

/// One JSON line of `pcreg register` output.
struct ResultRecord {
  std::string sequence_id;
  std::size_t src = 0, tgt = 0;
  std::optional<double> overlap, dt, distance, roll, pitch, yaw;
  std::size_t n_corrs = 0, n_filtered = 0;
  bool gpf_fallback = false;
  StageRecord coarse;
  std::optional<StageRecord> refined;
  RigidMotion motion;  // final estimate
};

std::string to_json_line(const ResultRecord& r);

/// Throws FormatError (syntax/invalid) naming the source and line.
ResultRecord parse_record(std::string_view line, const std::string& source, std::size_t line_no);
std::vector<ResultRecord> parse_records(std::string_view text, const std::string& source);

}  // namespace pcreg::cli
