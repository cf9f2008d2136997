#include "ensemble.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "common.hpp"
#include "parallel.hpp"

namespace hyst {

void fill_brownian_path(std::span<double> out, double dt, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
    out[0] = 0.0;
    for (std::size_t i = 1; i < out.size(); ++i)
        out[i] = out[i - 1] + gauss(eng);
}

void fill_continuation(std::span<double> out, std::span<const double> prefix, int i,
                       double dt, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
    for (std::size_t k = 0; k <= static_cast<std::size_t>(i); ++k) out[k] = prefix[k];
    for (std::size_t k = static_cast<std::size_t>(i) + 1; k < out.size(); ++k)
        out[k] = out[k - 1] + gauss(eng);
}

BrownianEnsemble::BrownianEnsemble(TimeGrid grid, int paths, std::uint64_t master_seed)
    : grid_(grid), paths_(paths), seed_(master_seed),
      stride_(static_cast<std::size_t>(grid.nodes())) {
    if (paths < 1) throw ConfigError("ensemble needs at least one path");
    data_.resize(stride_ * static_cast<std::size_t>(paths_));
    const double dt = grid_.dt();
    parallel_chunks(static_cast<std::size_t>(paths_), 2048,
                    [&](std::size_t b, std::size_t e, std::size_t) {
                        for (std::size_t j = b; j < e; ++j)
                            fill_brownian_path({data_.data() + j * stride_, stride_}, dt,
                                               mix64(seed_, j));
                    });
}

BrownianEnsemble::BrownianEnsemble(TimeGrid grid, std::vector<double> rows,
                                   std::uint64_t master_seed)
    : grid_(grid), seed_(master_seed), stride_(static_cast<std::size_t>(grid.nodes())),
      data_(std::move(rows)) {
    if (data_.empty() || data_.size() % stride_ != 0)
        throw ConfigError("ensemble rows do not match grid");
    paths_ = static_cast<int>(data_.size() / stride_);
}

void BrownianEnsemble::write_csv(const std::string& file) const {
    std::FILE* f = std::fopen(file.c_str(), "w");
    if (!f) throw ConfigError("cannot open " + file + " for writing");
    for (int i = 0; i < grid_.nodes(); ++i)
        std::fprintf(f, "%s%s", i ? "," : "", fmt_full(grid_.node(i)).c_str());
    std::fprintf(f, "\n");
    for (int j = 0; j < paths_; ++j) {
        auto r = row(j);
        for (std::size_t i = 0; i < r.size(); ++i)
            std::fprintf(f, "%s%s", i ? "," : "", fmt_full(r[i]).c_str());
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

namespace {
std::vector<double> parse_csv_line(const std::string& line) {
    std::vector<double> out;
    const char* p = line.c_str();
    char* end = nullptr;
    while (*p) {
        double x = std::strtod(p, &end);
        if (end == p) break;
        out.push_back(x);
        p = end;
        if (*p == ',') ++p;
    }
    return out;
}
} // namespace

BrownianEnsemble BrownianEnsemble::read_csv(const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "r");
    if (!f) throw ConfigError("cannot open " + file);
    std::string line;
    std::vector<double> rows;
    std::vector<double> header;
    char buf[1 << 16];
    bool first = true;
    std::size_t stride = 0;
    while (std::fgets(buf, sizeof(buf), f)) {
        line.assign(buf);
        // long rows may span several fgets calls
        while (!line.empty() && line.back() != '\n' && std::fgets(buf, sizeof(buf), f))
            line.append(buf);
        auto vals = parse_csv_line(line);
        if (vals.empty()) continue;
        if (first) {
            header = vals;
            stride = header.size();
            first = false;
            continue;
        }
        if (vals.size() != stride) {
            std::fclose(f);
            throw ConfigError("ragged row in " + file);
        }
        rows.insert(rows.end(), vals.begin(), vals.end());
    }
    std::fclose(f);
    if (stride < 3) throw ConfigError("ensemble CSV needs a time header with at least 3 nodes");
    TimeGrid grid(header.back(), static_cast<int>(stride) - 1);
    return BrownianEnsemble(grid, std::move(rows), 0);
}

} // namespace hyst
