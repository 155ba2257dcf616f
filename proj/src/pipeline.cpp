#include "sagtwin/pipeline.hpp"

#include <algorithm>
#include <array>

namespace sagtwin::pipeline {

bool is_valid(const PlantRecord& rec, const ValidityCriteria& c) {
    if (c.require_sag_running && !rec.sag_running) return false;
    if (c.require_expert_online && !rec.expert_online) return false;
    if (rec.u[0] < c.min_feed) return false;
    if (rec.u[1] < c.min_solids) return false;
    return true;
}

std::vector<SampledSeries> filter_valid(const std::vector<PlantRecord>& records,
                                        const ValidityCriteria& criteria,
                                        double sample_period) {
    std::vector<SampledSeries> segments;
    SampledSeries current;
    current.sample_period = sample_period;

    auto flush = [&] {
        if (!current.records.empty()) {
            segments.push_back(std::move(current));
            current = SampledSeries{};
            current.sample_period = sample_period;
        }
    };

    for (const auto& rec : records) {
        if (!is_valid(rec, criteria)) {
            flush();
            continue;
        }
        if (!current.records.empty()) {
            const double dt = rec.timestamp - current.records.back().timestamp;
            if (dt > sample_period + 1e-9) flush();
        }
        current.records.push_back(rec);
    }
    flush();
    return segments;
}

namespace {

double median6(std::array<double, 6> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[2] + v[3]);
}

}  // namespace

SampledSeries median_downsample(const SampledSeries& segment) {
    constexpr std::size_t kBlock = 6;
    if (segment.size() < kBlock)
        throw SegmentTooShort("median_downsample: segment shorter than 6 records");

    SampledSeries out;
    out.sample_period = segment.sample_period * static_cast<double>(kBlock);
    const std::size_t n_blocks = segment.size() / kBlock;
    out.records.reserve(n_blocks);

    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t base = b * kBlock;
        PlantRecord rec;
        // Output timestamp is the last sample of the block, so consecutive
        // outputs are exactly one new sample_period apart.
        rec.timestamp = segment[base + kBlock - 1].timestamp;
        rec.sag_running = segment[base + kBlock - 1].sag_running;
        rec.expert_online = segment[base + kBlock - 1].expert_online;

        std::array<double, 6> vals;
        for (int ch = 0; ch < kNumMV; ++ch) {
            for (std::size_t i = 0; i < kBlock; ++i) vals[i] = segment[base + i].u[ch];
            rec.u[ch] = median6(vals);
            for (std::size_t i = 0; i < kBlock; ++i) vals[i] = segment[base + i].u_sp[ch];
            rec.u_sp[ch] = median6(vals);
        }
        for (int ch = 0; ch < kNumCV; ++ch) {
            for (std::size_t i = 0; i < kBlock; ++i) vals[i] = segment[base + i].y[ch];
            rec.y[ch] = median6(vals);
        }
        out.records.push_back(rec);
    }
    return out;
}

std::pair<SampledSeries, SampledSeries> select_train_test(
    const std::vector<SampledSeries>& segments) {
    if (segments.size() < 2)
        throw InsufficientSegments("select_train_test: need at least two segments");

    auto better = [](const SampledSeries& a, const SampledSeries& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.records.front().timestamp < b.records.front().timestamp;
    };

    std::size_t best = 0, second = 1;
    if (better(segments[1], segments[0])) std::swap(best, second);
    for (std::size_t i = 2; i < segments.size(); ++i) {
        if (better(segments[i], segments[best])) {
            second = best;
            best = i;
        } else if (better(segments[i], segments[second])) {
            second = i;
        }
    }
    return {segments[best], segments[second]};
}

}  // namespace sagtwin::pipeline
