#pragma once

#include "cinetrack/detector.hpp"
#include "cinetrack/imaging.hpp"

namespace cinetrack {

struct LearnParams {
    double pos_overlap = 0.6;     // IoU above which grid boxes are positive context
    double neg_overlap = 0.2;     // IoU below which boxes are negatives
    double core_valid_sim = 0.7;  // trajectory trust threshold for learning
    int max_patches = 100;        // cap per patch set, FIFO eviction

    void validate() const;
};

/// Builds the appearance model from the first frame: initial patch variance,
/// positive set = init patch + warped variants, negatives from high-variance
/// off-target grid boxes.
ObjectModel init_model(const Frame& first_frame, const BoundingBox& init_box,
                       const ScanGrid& grid, const LearnParams& lp, const DetectorParams& dp);

/// P-expert: positive fern updates from the grid boxes closest to the trusted
/// box, plus one positive patch insertion when the trusted patch is not yet
/// an exact NN hit.
void p_expert(const Frame& frame, const BoundingBox& trusted_box, const ScanGrid& grid,
              ObjectModel& model, const LearnParams& lp);

/// N-expert: fern-stage survivors far from the trusted box become negative
/// fern updates; the most confident one is stored as a negative patch.
void n_expert(const Frame& frame, const BoundingBox& trusted_box,
              const std::vector<BoundingBox>& fern_survivors, ObjectModel& model,
              const LearnParams& lp);

}  // namespace cinetrack
