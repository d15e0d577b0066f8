#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hfsp/model.hpp"

namespace hfsp {

// Slot: integral virtual slots, as in the real cluster. Fluid: divisible capacity.
enum class Granularity : std::uint8_t { Slot, Fluid };

std::string_view to_string(Granularity g);

struct DemandEntry {
    PhaseId id{};
    int demand = 0;
    double weight = 1.0;
    std::uint64_t arrival_seq = 0;
};

using VirtualAllocation = std::map<PhaseId, double>;

// Weighted round robin, smallest residual demand first, one slot per turn.
VirtualAllocation allocate_max_min(std::span<const DemandEntry> jobs, int capacity);
// Weighted water filling with demand caps.
VirtualAllocation allocate_max_min_fluid(std::span<const DemandEntry> jobs, double capacity);
VirtualAllocation allocate(std::span<const DemandEntry> jobs, double capacity, Granularity g);

struct ProjectedCompletion {
    PhaseId id{};
    double finish = 0.0;
};

class VirtualCluster {
public:
    explicit VirtualCluster(int capacity = 1, Granularity granularity = Granularity::Slot)
        : capacity_(capacity), granularity_(granularity) {}

    // `unbounded` jobs take no virtual capacity and rank after everything else.
    void add_job(PhaseId id, double size, int demand, double weight, bool unbounded = false);
    void remove_job(PhaseId id);
    void set_demand(PhaseId id, int demand);
    // Replaces the size estimate; virtual service already received is kept.
    void set_size(PhaseId id, double size, bool unbounded = false);
    void age_jobs(double now);

    std::vector<ProjectedCompletion> project_completions() const;
    VirtualAllocation allocation() const;

    bool contains(PhaseId id) const { return jobs_.count(id) > 0; }
    double remaining(PhaseId id) const;
    double served(PhaseId id) const;
    double last_update() const { return last_update_; }
    std::size_t size() const { return jobs_.size(); }
    int capacity() const { return capacity_; }
    Granularity granularity() const { return granularity_; }

private:
    struct Job {
        double size = 0.0;
        double served = 0.0;
        double remaining = 0.0;
        int demand = 0;
        double weight = 1.0;
        std::uint64_t arrival_seq = 0;
        bool unbounded = false;
    };

    std::vector<DemandEntry> bounded_demands() const;
    const Job& get(PhaseId id) const;

    int capacity_;
    Granularity granularity_;
    double last_update_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::map<PhaseId, Job> jobs_;
};

}  // namespace hfsp
