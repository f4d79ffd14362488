#include "fillprob/json_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fillprob/errors.hpp"

namespace fillprob {

namespace {

using nlohmann::json;

std::string grid_key(int delta, int spread) {
    return "(" + std::to_string(delta) + "," + std::to_string(spread) + ")";
}

std::pair<int, int> parse_grid_key(const std::string& raw) {
    std::string s = raw;
    if (!s.empty() && s.front() == '(') s.erase(s.begin());
    if (!s.empty() && s.back() == ')') s.pop_back();
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw InputError("bad grid key '" + raw + "'");
    try {
        return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw InputError("bad grid key '" + raw + "'");
    }
}

json grid_to_json(const ModelIII::Grid& grid) {
    json out = json::object();
    for (const auto& [key, v] : grid) out[grid_key(key.first, key.second)] = v;
    return out;
}

ModelIII::Grid grid_from_json(const json& j, const char* what) {
    if (!j.is_object()) throw InputError(std::string(what) + " must be an object");
    ModelIII::Grid grid;
    for (const auto& [key, v] : j.items()) grid[parse_grid_key(key)] = v.get<double>();
    return grid;
}

json spread_map_to_json(const std::map<int, double>& m) {
    json out = json::object();
    for (const auto& [spread, v] : m) out[std::to_string(spread)] = v;
    return out;
}

std::map<int, double> spread_map_from_json(const json& j, const char* what) {
    if (!j.is_object()) throw InputError(std::string(what) + " must be an object");
    std::map<int, double> m;
    for (const auto& [key, v] : j.items()) {
        try {
            m[std::stoi(key)] = v.get<double>();
        } catch (const std::exception&) {
            throw InputError(std::string("bad spread key '") + key + "'");
        }
    }
    return m;
}

json coeffs_to_json(const LogQuadCoeffs& c) {
    return json{{"c0", c.c0}, {"cS", c.cS},   {"cSS", c.cSS},
                {"cQ", c.cQ}, {"cQQ", c.cQQ}, {"cSQ", c.cSQ}};
}

LogQuadCoeffs coeffs_from_json(const json& j) {
    LogQuadCoeffs c;
    c.c0 = j.value("c0", 0.0);
    c.cS = j.value("cS", 0.0);
    c.cSS = j.value("cSS", 0.0);
    c.cQ = j.value("cQ", 0.0);
    c.cQQ = j.value("cQQ", 0.0);
    c.cSQ = j.value("cSQ", 0.0);
    return c;
}

json parse_document(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InputError("malformed JSON document");
    return j;
}

}  // namespace

std::string model_to_json(const IntensityModel& model) {
    json j;
    if (const auto* m3 = dynamic_cast<const ModelIII*>(&model)) {
        j["model"] = "III";
        j["lambda"] = grid_to_json(m3->lambda_grid());
        j["mu"] = spread_map_to_json(m3->mu_map());
        j["theta"] = grid_to_json(m3->theta_grid());
    } else if (const auto* m1 = dynamic_cast<const ModelI*>(&model)) {
        if (!m1->theta_table()) {
            throw InputError("Model I with a functional theta does not serialize");
        }
        j["model"] = "I";
        j["alpha"] = m1->alpha();
        j["beta"] = m1->beta();
        j["mu"] = m1->mu();
        json theta = json::object();
        for (const auto& [delta, v] : *m1->theta_table()) theta[std::to_string(delta)] = v;
        j["theta"] = theta;
    } else if (const auto* m2 = dynamic_cast<const ModelII*>(&model)) {
        j["model"] = "II";
        j["lambda"] = coeffs_to_json(m2->lambda_coeffs());
        j["mu"] = coeffs_to_json(m2->mu_coeffs());
        j["phi"] = coeffs_to_json(m2->phi_coeffs());
    } else {
        throw InputError("model '" + model.name() + "' does not serialize");
    }
    return j.dump(2);
}

IntensityModelPtr model_from_json(const std::string& text) {
    const json j = parse_document(text);
    const std::string kind = j.value("model", "");
    if (kind == "III") {
        return std::make_shared<ModelIII>(grid_from_json(j.at("lambda"), "lambda"),
                                          spread_map_from_json(j.at("mu"), "mu"),
                                          grid_from_json(j.at("theta"), "theta"));
    }
    if (kind == "I") {
        std::map<int, double> theta;
        for (const auto& [key, v] : j.at("theta").items()) {
            theta[std::stoi(key)] = v.get<double>();
        }
        return std::make_shared<ModelI>(j.at("alpha").get<double>(), j.at("beta").get<double>(),
                                        j.at("mu").get<double>(), std::move(theta));
    }
    if (kind == "II") {
        return std::make_shared<ModelII>(coeffs_from_json(j.at("lambda")),
                                         coeffs_from_json(j.at("mu")),
                                         coeffs_from_json(j.at("phi")));
    }
    throw InputError("unknown model kind '" + kind + "'");
}

IntensityModelPtr load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

std::string rate_table_to_json(const RateTable& table) {
    json j;
    j["model"] = "III";
    j["lambda"] = grid_to_json(table.lambda);
    j["mu"] = spread_map_to_json(table.mu);
    j["theta"] = grid_to_json(table.theta);
    j["ratios"] = json{{"market_to_limit", table.ratios.market_to_limit},
                       {"cancel_to_limit", table.ratios.cancel_to_limit},
                       {"avg_limit_size", table.ratios.avg_limit_size}};
    j["avg_depth"] = grid_to_json(table.avg_depth);
    j["pooled"] = json{{"lambda", grid_to_json(table.lambda_pooled)},
                       {"mu", spread_map_to_json(table.mu_pooled)},
                       {"theta", grid_to_json(table.theta_pooled)}};
    j["events_used"] = table.events_used;
    j["events_overflow"] = table.events_overflow;
    j["warnings"] = table.warnings;
    return j.dump(2);
}

RateTable rate_table_from_json(const std::string& text) {
    const json j = parse_document(text);
    if (j.value("model", "") != "III") throw InputError("rate table must be a Model III document");
    RateTable table;
    table.lambda = grid_from_json(j.at("lambda"), "lambda");
    table.mu = spread_map_from_json(j.at("mu"), "mu");
    table.theta = grid_from_json(j.at("theta"), "theta");
    if (j.contains("avg_depth")) table.avg_depth = grid_from_json(j["avg_depth"], "avg_depth");
    if (j.contains("ratios")) {
        const json& r = j["ratios"];
        table.ratios.market_to_limit = r.value("market_to_limit", 1.0);
        table.ratios.cancel_to_limit = r.value("cancel_to_limit", 1.0);
        table.ratios.avg_limit_size = r.value("avg_limit_size", 1.0);
    }
    if (j.contains("pooled")) {
        const json& p = j["pooled"];
        if (p.contains("lambda")) table.lambda_pooled = grid_from_json(p["lambda"], "pooled lambda");
        if (p.contains("mu")) table.mu_pooled = spread_map_from_json(p["mu"], "pooled mu");
        if (p.contains("theta")) table.theta_pooled = grid_from_json(p["theta"], "pooled theta");
    }
    table.events_used = j.value("events_used", std::uint64_t{0});
    table.events_overflow = j.value("events_overflow", std::uint64_t{0});
    if (j.contains("warnings")) {
        for (const auto& w : j["warnings"]) table.warnings.push_back(w.get<std::string>());
    }
    return table;
}

}  // namespace fillprob
