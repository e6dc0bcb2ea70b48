#include "pcreg/records.hpp"

#include <pcreg/io.hpp>

#include <json.hpp>

namespace pcreg::cli {
namespace {

using Json = nlohmann::ordered_json;

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json stage_json(const StageRecord& s, bool refined) {
  Json j;
  j["re_deg"] = opt(s.re_deg);
  j["te_m"] = opt(s.te_m);
  j["success"] = opt(s.success);
  j["wall_time"] = opt(s.wall_time);
  j["iterations"] = s.iterations;
  j["inliers"] = s.inliers;
  j["status"] = s.status;
  if (refined) {
    j["rmse"] = opt(s.rmse);
    j["fitness"] = opt(s.fitness);
  }
  return j;
}

struct Reader {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(FormatErrorKind::invalid, source, line, what);
  }

  template <class T>
  std::optional<T> optional(const Json& obj, const char* key) const {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    try {
      return it->get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(std::string("field '") + key + "' has the wrong type");
    }
  }

  template <class T>
  T required(const Json& obj, const char* key) const {
    auto v = optional<T>(obj, key);
    if (!v) fail(std::string("missing field '") + key + "'");
    return *v;
  }

  StageRecord stage(const Json& j) const {
    if (!j.is_object()) fail("stage is not an object");
    StageRecord s;
    s.re_deg = optional<double>(j, "re_deg");
    s.te_m = optional<double>(j, "te_m");
    s.success = optional<bool>(j, "success");
    s.wall_time = optional<double>(j, "wall_time");
    s.iterations = optional<std::size_t>(j, "iterations").value_or(0);
    s.inliers = optional<std::size_t>(j, "inliers").value_or(0);
    s.status = optional<std::string>(j, "status").value_or("");
    s.rmse = optional<double>(j, "rmse");
    s.fitness = optional<double>(j, "fitness");
    return s;
  }
};

}  // namespace

std::string to_json_line(const ResultRecord& r) {
  Json j;
  j["sequence_id"] = r.sequence_id;
  j["src"] = r.src;
  j["tgt"] = r.tgt;
  j["overlap"] = opt(r.overlap);
  j["dt"] = opt(r.dt);
  j["distance"] = opt(r.distance);
  j["roll"] = opt(r.roll);
  j["pitch"] = opt(r.pitch);
  j["yaw"] = opt(r.yaw);
  j["n_corrs"] = r.n_corrs;
  j["n_filtered"] = r.n_filtered;
  j["gpf_fallback"] = r.gpf_fallback;
  j["coarse"] = stage_json(r.coarse, false);
  j["refined"] = r.refined ? stage_json(*r.refined, true) : Json(nullptr);
  Json m = Json::array();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 4; ++k) {
      m.push_back(k < 3 ? r.motion.rotation()(i, k) : r.motion.translation()[i]);
    }
  }
  j["motion"] = std::move(m);
  return j.dump();
}

ResultRecord parse_record(std::string_view line, const std::string& source, std::size_t line_no) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(FormatErrorKind::syntax, source, line_no, e.what());
  }
  const Reader rd{source, line_no};
  if (!j.is_object()) rd.fail("record is not a JSON object");

  ResultRecord r;
  r.sequence_id = rd.optional<std::string>(j, "sequence_id").value_or("");
  r.src = rd.optional<std::size_t>(j, "src").value_or(0);
  r.tgt = rd.optional<std::size_t>(j, "tgt").value_or(0);
  r.overlap = rd.optional<double>(j, "overlap");
  r.dt = rd.optional<double>(j, "dt");
  r.distance = rd.optional<double>(j, "distance");
  r.roll = rd.optional<double>(j, "roll");
  r.pitch = rd.optional<double>(j, "pitch");
  r.yaw = rd.optional<double>(j, "yaw");
  r.n_corrs = rd.optional<std::size_t>(j, "n_corrs").value_or(0);
  r.n_filtered = rd.optional<std::size_t>(j, "n_filtered").value_or(0);
  r.gpf_fallback = rd.optional<bool>(j, "gpf_fallback").value_or(false);
  if (!j.contains("coarse")) rd.fail("missing field 'coarse'");
  r.coarse = rd.stage(j["coarse"]);
  if (j.contains("refined") && !j["refined"].is_null()) r.refined = rd.stage(j["refined"]);

  if (j.contains("motion")) {
    const auto m = rd.required<std::vector<double>>(j, "motion");
    if (m.size() != 12) rd.fail("motion must hold 12 numbers");
    Matrix3 rot;
    Vector3 t;
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) rot(i, k) = m[std::size_t(4 * i + k)];
      t[i] = m[std::size_t(4 * i + 3)];
    }
    r.motion = RigidMotion(rot, t);
  }
  return r;
}

std::vector<ResultRecord> parse_records(std::string_view text, const std::string& source) {
  std::vector<ResultRecord> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    out.push_back(parse_record(line, source, line_no));
  }
  return out;
}

}  // namespace pcreg::cli
