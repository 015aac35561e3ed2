#pragma once

#include <cmath>

#include "json.hpp"
#include "svs/geomeval.hpp"

namespace svs::detail {

using Json = nlohmann::ordered_json;

// JSON has no infinity; the sentinel travels as the string "inf".
inline Json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
    return Json(v);
}

inline Json eval_report_json(const EvalReport& r) {
    Json j;
    j["ard"] = r.ard;
    j["srd"] = r.srd;
    j["rmse"] = r.rmse;
    j["rmse_log"] = r.rmse_log;
    j["accuracy"] = r.accuracy;
    j["pixel_count"] = r.pixel_count;
    j["d1"] = r.d1 ? json_number(*r.d1) : Json(nullptr);
    j["psnr_db"] = r.psnr_db ? json_number(*r.psnr_db) : Json(nullptr);
    return j;
}

}  // namespace svs::detail
