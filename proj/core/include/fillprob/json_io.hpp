#pragma once

#include <string>

#include "fillprob/calibration.hpp"
#include "fillprob/intensity.hpp"

namespace fillprob {

// Intensity model document:
//   {"model":"III","lambda":{"(delta,S)":rate,...},"mu":{"S":rate,...},
//    "theta":{"(delta,S)":rate,...}}
//   {"model":"I","alpha":a,"beta":b,"mu":m,"theta":{"delta":rate,...}}
//   {"model":"II","lambda":{coeffs},"mu":{coeffs},"phi":{coeffs}}
// Custom models do not serialize.
std::string model_to_json(const IntensityModel& model);
IntensityModelPtr model_from_json(const std::string& text);
IntensityModelPtr load_model_file(const std::string& path);

// Rate table document: the Model III fields plus ratios, average depths, the
// raw pooled estimators and calibration warnings. A rate table document is
// also loadable as a plain Model III via model_from_json / load_model_file.
std::string rate_table_to_json(const RateTable& table);
RateTable rate_table_from_json(const std::string& text);

}  // namespace fillprob
