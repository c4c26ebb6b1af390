#include "inkeval/serialization.hpp"

#include "inkeval/error.hpp"

namespace inkeval {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::SchemaMismatch, std::string("missing key '") + key + "'");
  }
  return j.at(key);
}

std::string require_string(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_string()) throw Error(ErrorKind::SchemaMismatch, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

double require_number(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number()) throw Error(ErrorKind::SchemaMismatch, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

Json to_json(const BoundingBox& box) {
  Json j;
  j["x_min"] = box.x_min();
  j["y_min"] = box.y_min();
  j["x_max"] = box.x_max();
  j["y_max"] = box.y_max();
  return j;
}

Json to_json(const RoiRegion& roi) {
  Json j;
  j["label"] = roi.label;
  j["description"] = roi.description;
  j["bounding_box"] = to_json(roi.box);
  return j;
}

Json to_json(const Theme& theme) {
  Json j;
  j["major"] = std::string(id_name(theme.major()));
  j["sub"] = theme.sub() ? Json(*theme.sub()) : Json(nullptr);
  return j;
}

Json to_json(const ExpertResponse& r) {
  Json j;
  j["caption"] = r.caption;
  j["theme"] = to_json(r.theme);
  Json rois = Json::array();
  for (const auto& roi : r.rois) rois.push_back(to_json(roi));
  j["rois"] = std::move(rois);
  j["theme_eval"] = r.theme_eval;
  j["tier_eval"] = Json{{"brush_ink", r.tier_eval.brush_ink},
                        {"spirit_resonance", r.tier_eval.spirit_resonance},
                        {"artistic_conception", r.tier_eval.artistic_conception}};
  j["final_score"] = r.final_score.value();
  j["raw_text"] = r.raw_text;
  return j;
}

Theme theme_from_json(const Json& j) {
  const std::string major_text = require_string(j, "major");
  const auto major = major_from_string(major_text);
  if (!major) throw Error(ErrorKind::InvalidValue, "Theme: unknown major theme '" + major_text + "'");
  std::optional<std::string> sub;
  if (j.contains("sub") && !j.at("sub").is_null()) {
    if (!j.at("sub").is_string()) throw Error(ErrorKind::SchemaMismatch, "'sub' must be a string");
    sub = j.at("sub").get<std::string>();
  }
  return Theme(*major, std::move(sub));
}

RoiRegion roi_from_json(const Json& j) {
  const Json& b = require(j, "bounding_box");
  return RoiRegion{require_string(j, "label"), require_string(j, "description"),
                   BoundingBox(require_number(b, "x_min"), require_number(b, "y_min"),
                               require_number(b, "x_max"), require_number(b, "y_max"))};
}

ExpertResponse expert_response_from_json(const Json& j) {
  const Json& rois_json = require(j, "rois");
  if (!rois_json.is_array()) throw Error(ErrorKind::SchemaMismatch, "'rois' must be an array");
  std::vector<RoiRegion> rois;
  for (const auto& r : rois_json) rois.push_back(roi_from_json(r));
  const Json& tier = require(j, "tier_eval");
  const Json& score = require(j, "final_score");
  if (!score.is_number()) throw Error(ErrorKind::SchemaMismatch, "'final_score' must be a number");
  return ExpertResponse{
      require_string(j, "caption"),
      theme_from_json(require(j, "theme")),
      std::move(rois),
      require_string(j, "theme_eval"),
      TierEvaluation{require_string(tier, "brush_ink"), require_string(tier, "spirit_resonance"),
                     require_string(tier, "artistic_conception")},
      Score::from_real(score.get<double>()),
      j.contains("raw_text") && j.at("raw_text").is_string() ? j.at("raw_text").get<std::string>()
                                                             : std::string(),
  };
}

std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n";
}

}  // namespace inkeval
