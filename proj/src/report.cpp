#include "irsbm/report.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "irsbm/error.hpp"

namespace irsbm {

using nlohmann::json;

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

json event_json(const HandoverEvent& h) {
    return {{"slot", h.time_slot}, {"from", h.from.to_string()}, {"to", h.to.to_string()}};
}

}  // namespace

std::string report_to_json(const SimReport& r) {
    json overhead = json::array();
    for (const auto& row : r.overhead)
        overhead.push_back(
            {{"protocol", row.protocol}, {"users", row.users}, {"slots", row.slots}, {"total_seconds", row.total_seconds}});
    json schemes = json::array();
    for (const auto& t : r.schemes) {
        json events = json::array();
        for (const auto& h : t.handovers) events.push_back(event_json(h));
        schemes.push_back({{"scheme", t.scheme},
                           {"effective_se", t.effective_se},
                           {"data_slots", t.data_slots},
                           {"training_slots", t.training_slots},
                           {"handover_slots", t.handover_slots},
                           {"outage_slots", t.outage_slots},
                           {"handovers", events},
                           {"se", t.se}});
    }
    json config = r.config_json.empty() ? json::object() : json::parse(r.config_json);
    const json doc = {{"seed", r.seed},
                      {"config", config},
                      {"overhead", overhead},
                      {"tracking", {{"total_slots", r.total_slots}, {"schemes", schemes}}},
                      {"warnings", r.warnings}};
    return doc.dump(1) + "\n";
}

SimReport report_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        SimReport r;
        r.seed = doc.at("seed").get<std::uint64_t>();
        const json& config = doc.at("config");
        r.config_json = config.empty() ? std::string() : config.dump(2);
        for (const auto& row : doc.at("overhead"))
            r.overhead.push_back({row.at("protocol").get<std::string>(), row.at("users").get<int>(),
                                  row.at("slots").get<long>(), row.at("total_seconds").get<double>()});
        const json& tracking = doc.at("tracking");
        r.total_slots = tracking.at("total_slots").get<long>();
        for (const auto& s : tracking.at("schemes")) {
            SchemeTrace t;
            t.scheme = s.at("scheme").get<std::string>();
            t.effective_se = s.at("effective_se").get<double>();
            t.data_slots = s.at("data_slots").get<long>();
            t.training_slots = s.at("training_slots").get<long>();
            t.handover_slots = s.at("handover_slots").get<long>();
            t.outage_slots = s.at("outage_slots").get<long>();
            t.se = s.at("se").get<std::vector<double>>();
            for (const auto& h : s.at("handovers"))
                t.handovers.push_back({h.at("slot").get<long>(), AccessPointId::parse(h.at("from").get<std::string>()),
                                       AccessPointId::parse(h.at("to").get<std::string>())});
            r.schemes.push_back(std::move(t));
        }
        r.warnings = doc.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception& e) {
        throw DatasetError(fmt::format("report: {}", e.what()));
    } catch (const InvalidArgument& e) {
        throw DatasetError(fmt::format("report: {}", e.what()));
    }
}

SimReport read_report_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("{}: cannot open for reading", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return report_from_json(ss.str());
    } catch (const DatasetError& e) {
        throw DatasetError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void emit_report(const SimReport& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("{}: {}", dir.string(), ec.message()));

    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "protocol,users,total_seconds,slots\n");
    for (const auto& row : r.overhead)
        fmt::format_to(std::back_inserter(buf), "{},{},{:.17g},{}\n", row.protocol, row.users, row.total_seconds,
                       row.slots);
    write_file(dir / "overhead.csv", fmt::to_string(buf));

    buf.clear();
    fmt::format_to(std::back_inserter(buf), "slot,scheme,se_bits_per_hz\n");
    for (long t = 0; t < r.total_slots; ++t)
        for (const auto& s : r.schemes)
            if (static_cast<std::size_t>(t) < s.se.size())
                fmt::format_to(std::back_inserter(buf), "{},{},{:.17g}\n", t, s.scheme,
                               s.se[static_cast<std::size_t>(t)]);
    write_file(dir / "se_trace.csv", fmt::to_string(buf));

    buf.clear();
    fmt::format_to(std::back_inserter(buf), "slot,from,to,scheme\n");
    for (const auto& s : r.schemes)
        for (const auto& h : s.handovers)
            fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", h.time_slot, h.from.to_string(), h.to.to_string(),
                           s.scheme);
    write_file(dir / "handover.csv", fmt::to_string(buf));

    write_file(dir / "report.json", report_to_json(r));
}

}  // namespace irsbm
