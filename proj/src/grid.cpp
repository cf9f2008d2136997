#include "grid.hpp"

#include <utility>

namespace hyst {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0)) throw ConfigError("grid horizon must be positive");
    if (steps < 2) throw ConfigError("grid needs at least 2 steps");
    dt_ = horizon_ / static_cast<double>(steps_);
}

SamplePath::SamplePath(TimeGrid g, std::vector<double> vals, PathKind k)
    : grid(g), values(std::move(vals)), kind(k) {
    if (values.size() != static_cast<std::size_t>(grid.nodes()))
        throw ConfigError("path length does not match grid");
}

SamplePath bump_path(const SamplePath& path, int i, double eps) {
    if (i < 0 || i > path.grid.steps())
        throw ConfigError("bump node out of range");
    SamplePath out = path;
    out.values[static_cast<std::size_t>(i)] += eps;
    out.kind = PathKind::CadlagBumped;
    return out;
}

SamplePath flat_extend(const SamplePath& path, int i, int k) {
    if (i < 0 || k < 0 || i + k > path.grid.steps())
        throw ConfigError("flat extension past grid end");
    SamplePath out = path;
    const double vi = path[i];
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < out.values.size(); ++j)
        out.values[j] = vi;
    return out;
}

void perturb_direction_inplace(std::span<double> values, std::span<const double> z,
                               double eps, double dt) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] += eps * acc;
        acc += z[i] * dt;
    }
}

SamplePath perturb_direction(const SamplePath& path, const SamplePath& z, double eps) {
    if (!(path.grid == z.grid)) throw ConfigError("direction lives on a different grid");
    SamplePath out = path;
    perturb_direction_inplace(out.values, z.values, eps, path.grid.dt());
    return out;
}

} // namespace hyst
