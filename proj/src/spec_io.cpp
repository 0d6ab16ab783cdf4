#include "polling/spec_io.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "polling/error.hpp"

namespace polling {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::Schema, what); }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) schema_error(where + ": unknown field '" + key + "'");
    }
}

double number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) schema_error(where + ": missing field '" + key + "'");
    const json& v = obj.at(key);
    if (!v.is_number()) schema_error(where + ": field '" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) schema_error(where + ": field '" + key + "' must be finite");
    return x;
}

}  // namespace

json density_mode_to_json(const DensityMode& mode) {
    using Kind = DensityMode::Kind;
    switch (mode.kind) {
        case Kind::TwoMomentApprox: return "two_moment_approx";
        case Kind::ExactH2: return "exact_h2";
        case Kind::ExactMixedErlang: return "exact_mixed_erlang";
        case Kind::ExactExponential: return "exact_exponential";
        case Kind::UserValue: return json{{"user_value", mode.user_value}};
    }
    return "two_moment_approx";
}

DensityMode density_mode_from_json(const json& value) {
    if (value.is_string()) {
        const auto s = value.get<std::string>();
        if (s == "two_moment_approx") return DensityMode::two_moment_approx();
        if (s == "exact_h2") return DensityMode::exact_h2();
        if (s == "exact_mixed_erlang") return DensityMode::exact_mixed_erlang();
        if (s == "exact_exponential") return DensityMode::exact_exponential();
        schema_error("density_mode: unknown mode '" + s + "'");
    }
    if (value.is_object()) {
        reject_unknown(value, {"user_value"}, "density_mode");
        return DensityMode::user(number(value, "user_value", "density_mode"));
    }
    schema_error("density_mode must be a string or {\"user_value\": x}");
}

SystemSpec spec_from_json(const json& doc) {
    if (!doc.is_object()) schema_error("spec must be a JSON object");
    reject_unknown(doc, {"version", "discipline", "rho", "queues"}, "spec");
    if (!doc.contains("version") || doc.at("version") != kSpecSchemaVersion) {
        schema_error(std::string("spec: field 'version' must be \"") + kSpecSchemaVersion + "\"");
    }
    SystemSpec spec;
    if (!doc.contains("discipline") || !doc.at("discipline").is_string()) {
        schema_error("spec: field 'discipline' must be \"exhaustive\" or \"gated\"");
    }
    const auto d = doc.at("discipline").get<std::string>();
    if (d == "exhaustive") spec.discipline = Discipline::Exhaustive;
    else if (d == "gated") spec.discipline = Discipline::Gated;
    else schema_error("spec: field 'discipline' must be \"exhaustive\" or \"gated\", got \"" + d + "\"");
    spec.rho = number(doc, "rho", "spec");

    if (!doc.contains("queues") || !doc.at("queues").is_array() || doc.at("queues").empty()) {
        schema_error("spec: field 'queues' must be a non-empty array");
    }
    std::size_t idx = 0;
    for (const json& jq : doc.at("queues")) {
        const std::string where = "queues[" + std::to_string(idx++) + "]";
        if (!jq.is_object()) schema_error(where + " must be an object");
        reject_unknown(jq,
                       {"mean_service", "scv_service", "mean_interarrival_at_saturation", "scv_interarrival",
                        "mean_switchover", "scv_switchover", "density_mode"},
                       where);
        QueueSpec q;
        q.mean_service = number(jq, "mean_service", where);
        q.scv_service = number(jq, "scv_service", where);
        q.mean_interarrival_at_saturation = number(jq, "mean_interarrival_at_saturation", where);
        q.scv_interarrival = number(jq, "scv_interarrival", where);
        q.mean_switchover = number(jq, "mean_switchover", where);
        q.scv_switchover = number(jq, "scv_switchover", where);
        if (jq.contains("density_mode")) q.density_mode = density_mode_from_json(jq.at("density_mode"));
        spec.queues.push_back(q);
    }
    validate(spec);
    return spec;
}

json spec_to_json(const SystemSpec& spec) {
    json queues = json::array();
    for (const auto& q : spec.queues) {
        queues.push_back({{"mean_service", q.mean_service},
                          {"scv_service", q.scv_service},
                          {"mean_interarrival_at_saturation", q.mean_interarrival_at_saturation},
                          {"scv_interarrival", q.scv_interarrival},
                          {"mean_switchover", q.mean_switchover},
                          {"scv_switchover", q.scv_switchover},
                          {"density_mode", density_mode_to_json(q.density_mode)}});
    }
    return {{"version", kSpecSchemaVersion},
            {"discipline", std::string(to_string(spec.discipline))},
            {"rho", spec.rho},
            {"queues", queues}};
}

SystemSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open spec file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Schema, "spec file '" + path + "' is not valid JSON: " + e.what());
    }
    return spec_from_json(doc);
}

json estimate_to_json(const SimEstimate& est) {
    json queues = json::array();
    for (std::size_t q = 0; q < est.mean_wait_hat.size(); ++q) {
        queues.push_back({{"queue", q + 1},
                          {"mean_wait", est.mean_wait_hat[q]},
                          {"ci_half_width", est.ci_half_width[q]},
                          {"mean_queue_length", est.mean_queue_length_hat[q]},
                          {"customers", est.customers[q]}});
    }
    auto interval = [](const Interval& i) { return json{{"value", i.value}, {"ci_half_width", i.half_width}}; };
    return {{"queues", queues},
            {"realized_load", interval(est.realized_load)},
            {"mean_cycle", interval(est.mean_cycle)},
            {"weighted_wait", interval(est.weighted_wait)},
            {"samples", est.samples},
            {"replications", est.replications},
            {"batch_count", est.batch_count},
            {"events", est.events},
            {"confidence_level", 0.95}};
}

}  // namespace polling
