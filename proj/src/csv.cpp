#include "sagtwin/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sagtwin::csv {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

constexpr const char* kHeader =
    "timestamp,u1,u2,u3,u1_sp,u2_sp,u3_sp,y1,y2,sag_running,expert_online";

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v{};
    const char* b = s.data();
    const char* e = b + s.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e)
        throw MalformedRow("bad numeric field '" + s + "'", line_no);
    return v;
}

bool parse_bool(const std::string& s, std::size_t line_no) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw MalformedRow("bad boolean field '" + s + "' (expected 0/1)", line_no);
}

}  // namespace

std::vector<PlantRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);

    std::vector<PlantRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == kHeader) continue;

        auto fields = split(line);
        if (fields.size() != 11)
            throw MalformedRow("expected 11 fields, got " + std::to_string(fields.size()),
                               line_no);
        PlantRecord rec;
        rec.timestamp = parse_double(fields[0], line_no);
        for (int i = 0; i < 3; ++i) rec.u[i] = parse_double(fields[1 + i], line_no);
        for (int i = 0; i < 3; ++i) rec.u_sp[i] = parse_double(fields[4 + i], line_no);
        for (int i = 0; i < 2; ++i) rec.y[i] = parse_double(fields[7 + i], line_no);
        rec.sag_running = parse_bool(fields[9], line_no);
        rec.expert_online = parse_bool(fields[10], line_no);
        records.push_back(rec);
    }
    return records;
}

void write_records(const std::string& path, const SampledSeries& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << kHeader << '\n';
    for (const auto& rec : series.records) {
        out << format_double(rec.timestamp);
        for (int i = 0; i < 3; ++i) out << ',' << format_double(rec.u[i]);
        for (int i = 0; i < 3; ++i) out << ',' << format_double(rec.u_sp[i]);
        for (int i = 0; i < 2; ++i) out << ',' << format_double(rec.y[i]);
        out << ',' << (rec.sag_running ? '1' : '0')
            << ',' << (rec.expert_online ? '1' : '0') << '\n';
    }
}

void write_manifest(const std::string& path, const std::vector<SegmentInfo>& segments) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "segment_id,start_row,length\n";
    for (const auto& s : segments)
        out << s.segment_id << ',' << s.start_row << ',' << s.length << '\n';
}

std::vector<SegmentInfo> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<SegmentInfo> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line_no == 1) continue;
        auto fields = split(line);
        if (fields.size() != 3) throw MalformedRow("expected 3 fields", line_no);
        SegmentInfo s;
        s.segment_id = static_cast<int>(parse_double(fields[0], line_no));
        s.start_row = static_cast<std::size_t>(parse_double(fields[1], line_no));
        s.length = static_cast<std::size_t>(parse_double(fields[2], line_no));
        out.push_back(s);
    }
    return out;
}

}  // namespace sagtwin::csv
