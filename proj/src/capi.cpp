#include "hyst.h"

#include <cstring>
#include <map>
#include <memory>
#include <string>

#include "acceptance.hpp"
#include "common.hpp"
#include "dynamics.hpp"
#include "ensemble.hpp"
#include "experiments.hpp"
#include "functionals.hpp"
#include "parallel.hpp"

using namespace hyst;

namespace {

thread_local std::string g_last_error;

hyst_status fail(const std::exception& e, hyst_status code) {
    g_last_error = e.what();
    return code;
}

template <typename Fn>
hyst_status guarded(Fn&& fn) {
    try {
        fn();
        return HYST_OK;
    } catch (const ConfigError& e) {
        return fail(e, HYST_ERR_CONFIG);
    } catch (const std::exception& e) {
        return fail(e, HYST_ERR_VALIDATION);
    }
}

} // namespace

struct hyst_grid {
    TimeGrid grid;
};

struct hyst_ensemble {
    std::shared_ptr<BrownianEnsemble> ens;
};

struct hyst_functional {
    std::shared_ptr<HysteresisFunctional> h;
    // elasticity conditioner cached per ensemble identity
    std::shared_ptr<ElasticityPipeline> pipeline;
    const void* pipeline_key = nullptr;
};

extern "C" {

const char* hyst_version(void) { return version_string(); }
const char* hyst_last_error(void) { return g_last_error.c_str(); }
void hyst_set_threads(int n) { set_thread_count(n); }

hyst_status hyst_grid_create(double horizon, int steps, hyst_grid** out) {
    return guarded([&] {
        if (!out) throw ConfigError("null output pointer");
        *out = new hyst_grid{TimeGrid(horizon, steps)};
    });
}

void hyst_grid_free(hyst_grid* grid) { delete grid; }
double hyst_grid_dt(const hyst_grid* grid) { return grid ? grid->grid.dt() : 0.0; }
int hyst_grid_steps(const hyst_grid* grid) { return grid ? grid->grid.steps() : 0; }

hyst_status hyst_ensemble_sample(const hyst_grid* grid, int paths,
                                 unsigned long long seed, hyst_ensemble** out) {
    return guarded([&] {
        if (!grid || !out) throw ConfigError("null pointer");
        *out = new hyst_ensemble{
            std::make_shared<BrownianEnsemble>(grid->grid, paths, seed)};
    });
}

int hyst_ensemble_paths(const hyst_ensemble* ens) { return ens ? ens->ens->paths() : 0; }
int hyst_ensemble_nodes(const hyst_ensemble* ens) {
    return ens ? ens->ens->grid().nodes() : 0;
}

hyst_status hyst_ensemble_values(const hyst_ensemble* ens, int path, double* out, int len) {
    return guarded([&] {
        if (!ens || !out) throw ConfigError("null pointer");
        if (path < 0 || path >= ens->ens->paths()) throw ConfigError("path out of range");
        auto row = ens->ens->row(path);
        if (len < static_cast<int>(row.size())) throw ConfigError("buffer too small");
        std::memcpy(out, row.data(), row.size() * sizeof(double));
    });
}

hyst_status hyst_ensemble_write_csv(const hyst_ensemble* ens, const char* file) {
    return guarded([&] {
        if (!ens || !file) throw ConfigError("null pointer");
        ens->ens->write_csv(file);
    });
}

hyst_status hyst_ensemble_read_csv(const char* file, hyst_ensemble** out) {
    return guarded([&] {
        if (!file || !out) throw ConfigError("null pointer");
        *out = new hyst_ensemble{
            std::make_shared<BrownianEnsemble>(BrownianEnsemble::read_csv(file))};
    });
}

void hyst_ensemble_free(hyst_ensemble* ens) { delete ens; }

hyst_status hyst_functional_create(const char* name, const char* const* keys,
                                   const char* const* values, int nparams,
                                   hyst_functional** out) {
    return guarded([&] {
        if (!name || !out) throw ConfigError("null pointer");
        std::map<std::string, std::string> params;
        for (int i = 0; i < nparams; ++i) {
            if (!keys[i] || !values[i]) throw ConfigError("null parameter");
            params[keys[i]] = values[i];
        }
        *out = new hyst_functional{make_functional(name, params), nullptr, nullptr};
    });
}

hyst_status hyst_functional_eval(const hyst_functional* h, const hyst_ensemble* ens,
                                 int path, int node, double* out) {
    return guarded([&] {
        if (!h || !ens || !out) throw ConfigError("null pointer");
        PathRef w = ens->ens->path(path);
        *out = h->h->eval(node, w, w);
    });
}

hyst_status hyst_functional_atom(const hyst_functional* h, const hyst_ensemble* ens,
                                 int path, int node, double* out) {
    return guarded([&] {
        if (!h || !ens || !out) throw ConfigError("null pointer");
        PathRef w = ens->ens->path(path);
        *out = h->h->atom(node, w, w);
    });
}

hyst_status hyst_functional_density(const hyst_functional* h, const hyst_ensemble* ens,
                                    int path, int s_node, int node, double* out) {
    return guarded([&] {
        if (!h || !ens || !out) throw ConfigError("null pointer");
        PathRef w = ens->ens->path(path);
        *out = h->h->density(s_node, node, w, w);
    });
}

void hyst_functional_free(hyst_functional* h) { delete h; }

hyst_status hyst_elasticity_path(const hyst_functional* h, const hyst_ensemble* ens,
                                 int path, double* c_out, double* present_out,
                                 double* future_out) {
    return guarded([&] {
        if (!h || !ens) throw ConfigError("null pointer");
        auto* mut = const_cast<hyst_functional*>(h);
        if (!mut->pipeline || mut->pipeline_key != ens->ens.get()) {
            mut->pipeline =
                std::make_shared<ElasticityPipeline>(*h->h, *ens->ens, BasisSpec{});
            mut->pipeline_key = ens->ens.get();
        }
        const std::size_t nn = static_cast<std::size_t>(ens->ens->grid().nodes());
        std::vector<double> C(nn), I(nn), F(nn);
        mut->pipeline->rows(ens->ens->path(path), C, I, F);
        if (c_out) std::memcpy(c_out, C.data(), nn * sizeof(double));
        if (present_out) std::memcpy(present_out, I.data(), nn * sizeof(double));
        if (future_out) std::memcpy(future_out, F.data(), nn * sizeof(double));
    });
}

hyst_status hyst_run_command(const char* command, const char* config_path,
                             const char* out_dir, int threads, int summary) {
    if (!command) {
        g_last_error = "null command";
        return HYST_ERR_CONFIG;
    }
    const int rc = run_command(command, config_path ? config_path : "",
                               out_dir ? out_dir : "", threads, summary != 0);
    return static_cast<hyst_status>(rc);
}

hyst_status hyst_run_verify(const char* suite, const char* out_dir) {
    const int rc = cmd_verify(suite ? suite : "all", out_dir ? out_dir : "");
    return static_cast<hyst_status>(rc);
}

} // extern "C"
