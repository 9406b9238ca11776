#include "densflow/record_io.hpp"

#include "densflow/errors.hpp"
#include "densflow/numerics.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace densflow {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

void write_run_csv(const std::string& path, const RunRecord& record) {
    auto out = open_out(path);
    out << "t,sup,mass,interface\n";
    for (const auto& s : record.samples) {
        out << format_double(s.t) << ',' << format_double(s.sup) << ',' << format_double(s.mass)
            << ',' << format_double(s.interface) << '\n';
    }
}

std::vector<RunSample> read_run_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != "t,sup,mass,interface") {
        throw ParseError(1, "expected header t,sup,mass,interface");
    }
    std::vector<RunSample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        double v[4];
        int k = 0;
        while (std::getline(ss, cell, ',')) {
            if (k == 4) {
                throw ParseError(line_no, "more than 4 fields");
            }
            v[k++] = numerics::parse_double(cell, line_no);
        }
        if (k != 4) {
            throw ParseError(line_no, "expected 4 fields");
        }
        samples.push_back({v[0], v[1], v[2], v[3]});
    }
    return samples;
}

void write_run_json(const std::string& path, const RunRecord& record,
                    const std::map<std::string, std::string>& config_echo) {
    nlohmann::ordered_json j;
    j["config_digest"] = record.config_digest;
    j["n_samples"] = record.samples.size();
    j["first_flagged"] = record.flagged() ? nlohmann::ordered_json(record.first_flagged)
                                          : nlohmann::ordered_json(nullptr);
    j["final_state_path"] = record.final_state_path;
    j["config"] = config_echo;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

RunRecord read_run_json(const std::string& path, const std::string& csv_path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, std::string("malformed run sidecar: ") + e.what());
    }
    RunRecord record;
    record.config_digest = j.at("config_digest").get<std::string>();
    if (!j.at("first_flagged").is_null()) {
        record.first_flagged = j.at("first_flagged").get<std::size_t>();
    }
    record.final_state_path = j.at("final_state_path").get<std::string>();
    record.samples = read_run_csv(csv_path);
    if (record.samples.size() != j.at("n_samples").get<std::size_t>()) {
        throw ParseError(1, "sample count differs from the CSV");
    }
    return record;
}

void write_field_csv(const std::string& path, const RadialGrid& grid,
                     std::span<const double> field) {
    auto out = open_out(path);
    out << "r,u\n";
    for (std::size_t i = 0; i < field.size(); ++i) {
        out << format_double(grid.centers()[i]) << ',' << format_double(field[i]) << '\n';
    }
}

} // namespace densflow
