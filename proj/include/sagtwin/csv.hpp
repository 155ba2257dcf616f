#ifndef SAGTWIN_CSV_HPP
#define SAGTWIN_CSV_HPP

#include <string>
#include <vector>

#include "sagtwin/types.hpp"

namespace sagtwin::csv {

struct MalformedRow : Error {
    std::size_t line;
    MalformedRow(const std::string& msg, std::size_t line_no)
        : Error(msg), line(line_no) {}
};

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);

/// Reads `timestamp,u1,u2,u3,u1_sp,u2_sp,u3_sp,y1,y2,sag_running,expert_online`.
std::vector<PlantRecord> read_records(const std::string& path);

void write_records(const std::string& path, const SampledSeries& series);

/// Manifest rows: segment_id,start_row,length (start_row indexes the written
/// 30 s dataset).
struct SegmentInfo {
    int segment_id;
    std::size_t start_row;
    std::size_t length;
};

void write_manifest(const std::string& path, const std::vector<SegmentInfo>& segments);
std::vector<SegmentInfo> read_manifest(const std::string& path);

}  // namespace sagtwin::csv

#endif  // SAGTWIN_CSV_HPP
