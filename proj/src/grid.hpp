#pragma once

#include <span>
#include <vector>

#include "common.hpp"

namespace hyst {

// Uniform grid on [0, T] with N steps, nodes t_i = i * dt.
class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double horizon, int steps);

    double horizon() const { return horizon_; }
    int steps() const { return steps_; }          // N
    int nodes() const { return steps_ + 1; }      // N + 1 values per path
    double dt() const { return dt_; }
    double node(int i) const { return static_cast<double>(i) * dt_; }

    bool operator==(const TimeGrid& o) const {
        return horizon_ == o.horizon_ && steps_ == o.steps_;
    }

private:
    double horizon_ = 0.0;
    int steps_ = 0;
    double dt_ = 0.0;
};

inline TimeGrid make_grid(double horizon, int steps) { return TimeGrid(horizon, steps); }

// Non-owning view of one path's node values on a grid.
struct PathRef {
    const TimeGrid* grid = nullptr;
    std::span<const double> v;

    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
    double dt() const { return grid->dt(); }
    int steps() const { return grid->steps(); }
};

enum class PathKind { Continuous, CadlagBumped };

// Owning path. A CadlagBumped path differs from its parent at one node only.
struct SamplePath {
    TimeGrid grid;
    std::vector<double> values;
    PathKind kind = PathKind::Continuous;

    SamplePath() = default;
    SamplePath(TimeGrid g, std::vector<double> vals, PathKind k = PathKind::Continuous);

    PathRef ref() const { return PathRef{&grid, values}; }
    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

// Adds eps to the value at node i (Dupire bump). eps = 0 returns the path unchanged
// apart from the kind tag.
SamplePath bump_path(const SamplePath& path, int i, double eps);

// Freezes the path at node i and extends it flatly for k extra steps: nodes
// i+1 .. i+k carry the value at i. Nodes past i+k also carry that value, so
// an adapted functional evaluated at i+k sees exactly the extended prefix.
SamplePath flat_extend(const SamplePath& path, int i, int k);

// Cameron-Martin shift: node i gains eps * sum_{j<i} z_j * dt (left-endpoint
// quadrature of the direction z).
SamplePath perturb_direction(const SamplePath& path, const SamplePath& z, double eps);

// In-place variant working on raw node values; shared by the Malliavin code paths.
void perturb_direction_inplace(std::span<double> values, std::span<const double> z,
                               double eps, double dt);

} // namespace hyst
