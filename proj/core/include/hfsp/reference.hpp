#pragma once

#include <span>
#include <string>
#include <vector>

namespace hfsp {

// A job in an idealized divisible-capacity system.
struct FluidJob {
    std::string id;
    double arrival = 0.0;
    double work = 0.0;      // slot-seconds
    double max_rate = 1.0;  // slots the job can use at once
    double weight = 1.0;
};

// Completion times, in input order, under capped (generalized) processor sharing.
std::vector<double> processor_sharing_schedule(std::span<const FluidJob> jobs, double capacity);

// Completion times under ideal FSP: jobs ranked by their processor-sharing completion
// (re-evaluated at each arrival) and served greedily in rank order up to max_rate.
std::vector<double> fsp_schedule(std::span<const FluidJob> jobs, double capacity);

}  // namespace hfsp
