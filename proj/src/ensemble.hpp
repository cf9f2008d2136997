#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grid.hpp"

namespace hyst {

// M Brownian paths sampled on a shared grid. Storage is one flat row-major
// buffer; paths are handed out as views. Immutable after construction.
//
// Path j is generated from its own engine seeded by mix64(master_seed, j),
// so the ensemble does not depend on generation order or worker count.
class BrownianEnsemble {
public:
    BrownianEnsemble(TimeGrid grid, int paths, std::uint64_t master_seed);

    // Wraps externally supplied rows (CSV import, tests).
    BrownianEnsemble(TimeGrid grid, std::vector<double> rows, std::uint64_t master_seed);

    const TimeGrid& grid() const { return grid_; }
    int paths() const { return paths_; }
    std::uint64_t master_seed() const { return seed_; }

    PathRef path(int j) const {
        return PathRef{&grid_, {data_.data() + static_cast<std::size_t>(j) * stride_, stride_}};
    }
    std::span<const double> row(int j) const { return path(j).v; }

    void write_csv(const std::string& file) const;
    static BrownianEnsemble read_csv(const std::string& file);

private:
    TimeGrid grid_;
    int paths_ = 0;
    std::uint64_t seed_ = 0;
    std::size_t stride_ = 0;
    std::vector<double> data_;
};

// Fills out[0..N] with one Brownian path: out[0] = 0, increments ~ N(0, dt).
void fill_brownian_path(std::span<double> out, double dt, std::uint64_t seed);

// Continuation used by nested Monte Carlo: keeps nodes 0..i of prefix and
// appends fresh increments beyond node i.
void fill_continuation(std::span<double> out, std::span<const double> prefix, int i,
                       double dt, std::uint64_t seed);

inline BrownianEnsemble sample_brownian(const TimeGrid& grid, int paths, std::uint64_t seed) {
    return BrownianEnsemble(grid, paths, seed);
}

} // namespace hyst
