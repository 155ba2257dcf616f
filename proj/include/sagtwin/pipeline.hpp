#ifndef SAGTWIN_PIPELINE_HPP
#define SAGTWIN_PIPELINE_HPP

#include <utility>
#include <vector>

#include "sagtwin/types.hpp"

namespace sagtwin::pipeline {

/// Operational validity filter settings for raw plant records.
struct ValidityCriteria {
    double min_feed = 0.0;    // t/h
    double min_solids = 0.0;  // %
    bool require_sag_running = true;
    bool require_expert_online = true;
};

bool is_valid(const PlantRecord& rec, const ValidityCriteria& criteria);

/// Splits a time-ordered record stream into maximal contiguous runs of valid
/// records. A record failing any criterion, or a timestamp gap larger than
/// `sample_period`, ends the current segment.
std::vector<SampledSeries> filter_valid(const std::vector<PlantRecord>& records,
                                        const ValidityCriteria& criteria,
                                        double sample_period = 5.0);

/// Downsamples a 5 s series to 30 s by taking the component-wise median of
/// non-overlapping blocks of 6 records. The trailing partial block is dropped.
SampledSeries median_downsample(const SampledSeries& segment);

/// Picks training and test sets: the longest and second-longest segments,
/// ties broken by earlier start time.
std::pair<SampledSeries, SampledSeries> select_train_test(
    const std::vector<SampledSeries>& segments);

}  // namespace sagtwin::pipeline

#endif  // SAGTWIN_PIPELINE_HPP
