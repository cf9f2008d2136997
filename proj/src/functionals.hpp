#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "grid.hpp"
#include "kernels.hpp"
#include "smoothfn.hpp"

namespace hyst {

// Non-anticipative hysteresis functional h_t. Evaluation at node i reads only
// nodes 0..i of its arguments. The policy path c and the noise path w are
// passed separately; most functionals read c only, the climate family reads w
// in its coefficients.
//
// Fréchet structure (when class_a() is true):
//   h_t(c + z) - h_t(c) = atom * z_t + sum_{s<t} density(s, t) * z_s * dt + o(||z||)
// density(i, i) is the boundary value delta_t h_t. All time integrals here and
// elsewhere in the engine use the left-endpoint rule, so a bump at node i never
// enters an integral evaluated at i.
class HysteresisFunctional {
public:
    virtual ~HysteresisFunctional() = default;
    virtual std::string name() const = 0;

    virtual double eval(int i, PathRef c, PathRef w) const = 0;

    virtual bool class_a() const { return true; }
    // Derivative data is free of c (so the first order condition is explicit).
    virtual bool linear_in_policy() const { return false; }

    // Fréchet data; numeric differencing of eval() unless overridden.
    virtual double atom(int i, PathRef c, PathRef w) const;
    virtual double density(int s, int i, PathRef c, PathRef w) const;

    // --- optional analytic suppliers; engines fall back to differencing ---

    // Dupire data of the atom family q_t = d_{c_t} h_t along its path argument.
    virtual bool has_atom_dupire() const { return false; }
    virtual double atom_vertical2(int i, PathRef c, PathRef w) const; // d^2_{c_t} h
    virtual double atom_vertical3(int i, PathRef c, PathRef w) const; // d^3_{c_t} h
    virtual double atom_horizontal(int i, PathRef c, PathRef w) const;

    // d/dt of delta_t h_s at fixed s (t <= s).
    virtual bool has_density_dt() const { return false; }
    virtual double density_dt(int t, int s, PathRef c, PathRef w) const;

    // D_t(delta_t h_s) along the unperturbed solution c = w.
    virtual bool has_density_malliavin_w() const { return false; }
    virtual double density_malliavin_w(int t, int s, PathRef w) const;

    // --- batch hooks used by the pipelines (O(N) or O(N^2) per path) ---

    // out[i] = atom(i); overridden where a one-pass scan beats the node loop
    virtual void atom_row(PathRef c, PathRef w, std::span<double> out) const;
    // out[t] = sum_{s=t}^{n_eval-1} density(t, s) * dt  (the future-effect target)
    virtual void future_density_sums(PathRef c, PathRef w, std::span<double> out) const;
    virtual double future_density_sum_at(int t, PathRef c, PathRef w) const;
    // out[t] = sum_{s=t}^{n-1} density_dt(t, s) * dt
    virtual void future_density_dt_sums(PathRef c, PathRef w, std::span<double> out) const;
    // out[t] = sum_{s=t}^{n-1} density_malliavin_w(t, s) * dt, along c = w
    virtual void future_density_malliavin_sums(PathRef w, std::span<double> out) const;

    // One-step structure of the future-density sum, when the integrand is free
    // of the policy time: F_t = q_t dt + gamma_t F_{t+1} pathwise with gamma
    // deterministic. Enables the low-variance backward fit.
    virtual bool has_recursive_tail() const { return false; }
    virtual void tail_increment(PathRef c, PathRef w, std::span<double> q_out) const;
    virtual void tail_gamma(const TimeGrid& grid, std::span<double> out) const;

    // Discrete first-order-condition weight for non-class-A functionals:
    // d/dc_j of sum_i h_i(c) dt divided by dt. Only the midpoint functional
    // carries one.
    virtual double foc_dual_weight(int j, const TimeGrid& grid) const;

    // default step for numeric bumps: 1e-4 * (1 + sup |path|)
    static double default_bump(PathRef p, int i);
};

// h_t(c) = f(c_t): no hysteresis, everything reduces to derivatives of f.
class StateDependentFunctional final : public HysteresisFunctional {
public:
    explicit StateDependentFunctional(SmoothFn f) : f_(std::move(f)) {}
    std::string name() const override { return "state_dependent(" + f_.name + ")"; }
    double eval(int i, PathRef c, PathRef) const override { return f_.f(c[i]); }
    double atom(int i, PathRef c, PathRef) const override { return f_.d1(c[i]); }
    double density(int, int, PathRef, PathRef) const override { return 0.0; }
    bool has_atom_dupire() const override { return true; }
    double atom_vertical2(int i, PathRef c, PathRef) const override { return f_.d2(c[i]); }
    double atom_vertical3(int i, PathRef c, PathRef) const override { return f_.d3(c[i]); }
    double atom_horizontal(int, PathRef, PathRef) const override { return 0.0; }
    bool has_density_dt() const override { return true; }
    double density_dt(int, int, PathRef, PathRef) const override { return 0.0; }
    bool has_density_malliavin_w() const override { return true; }
    double density_malliavin_w(int, int, PathRef) const override { return 0.0; }
    void atom_row(PathRef c, PathRef, std::span<double> out) const override {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f_.d1(c.v[i]);
    }
    void future_density_sums(PathRef, PathRef, std::span<double> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
    }
    void future_density_dt_sums(PathRef, PathRef, std::span<double> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
    }
    void future_density_malliavin_sums(PathRef, std::span<double> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
    }
    const SmoothFn& f() const { return f_; }

private:
    SmoothFn f_;
};

// h_t(c) = c_t * int_0^t c_s ds.
class CumulativeFunctional final : public HysteresisFunctional {
public:
    std::string name() const override { return "cumulative"; }
    double eval(int i, PathRef c, PathRef) const override;
    double atom(int i, PathRef c, PathRef) const override;   // int_0^t c ds
    double density(int s, int i, PathRef c, PathRef) const override; // c_t
    bool has_atom_dupire() const override { return true; }
    double atom_vertical2(int, PathRef, PathRef) const override { return 0.0; }
    double atom_vertical3(int, PathRef, PathRef) const override { return 0.0; }
    double atom_horizontal(int i, PathRef c, PathRef) const override { return c[i]; }
    bool has_density_dt() const override { return true; }
    double density_dt(int, int, PathRef, PathRef) const override { return 0.0; }
    bool has_density_malliavin_w() const override { return true; }
    double density_malliavin_w(int, int, PathRef) const override { return 1.0; }
    bool has_recursive_tail() const override { return true; }
    void tail_increment(PathRef c, PathRef, std::span<double> q_out) const override {
        std::copy(c.v.begin(), c.v.end(), q_out.begin());
    }
    void tail_gamma(const TimeGrid&, std::span<double> out) const override {
        std::fill(out.begin(), out.end(), 1.0);
    }
    void atom_row(PathRef c, PathRef w, std::span<double> out) const override;
    void future_density_sums(PathRef c, PathRef w, std::span<double> out) const override;
    void future_density_dt_sums(PathRef, PathRef, std::span<double> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
    }
    void future_density_malliavin_sums(PathRef w, std::span<double> out) const override;
};

// h_t(c) = h2(c_t, int_0^t a_{t,s} c_s ds).
class KernelAverageFunctional final : public HysteresisFunctional {
public:
    KernelAverageFunctional(BivariateFn h2, std::shared_ptr<const DetKernel> a)
        : h2_(std::move(h2)), a_(std::move(a)) {}
    std::string name() const override { return "kernel_average(" + h2_.name + "," + a_->name() + ")"; }

    double eval(int i, PathRef c, PathRef) const override;
    double atom(int i, PathRef c, PathRef) const override;
    double density(int s, int i, PathRef c, PathRef) const override;
    bool has_atom_dupire() const override { return true; }
    double atom_vertical2(int i, PathRef c, PathRef) const override;
    double atom_vertical3(int i, PathRef c, PathRef) const override;
    double atom_horizontal(int i, PathRef c, PathRef) const override;
    bool has_density_dt() const override { return true; }
    double density_dt(int t, int s, PathRef c, PathRef) const override;
    bool has_density_malliavin_w() const override { return true; }
    double density_malliavin_w(int t, int s, PathRef w) const override;

    void atom_row(PathRef c, PathRef w, std::span<double> out) const override;
    void future_density_sums(PathRef c, PathRef w, std::span<double> out) const override;
    void future_density_dt_sums(PathRef c, PathRef w, std::span<double> out) const override;
    void future_density_malliavin_sums(PathRef w, std::span<double> out) const override;
    bool has_recursive_tail() const override;
    void tail_increment(PathRef c, PathRef w, std::span<double> q_out) const override;
    void tail_gamma(const TimeGrid& grid, std::span<double> out) const override;

    // running average y_i = sum_{j<i} a(t_i, t_j) c_j dt for all i; O(N^2), or
    // O(N) for the exponential kernel
    void averages(PathRef c, std::span<double> out) const;

    const BivariateFn& h2() const { return h2_; }
    const DetKernel& a() const { return *a_; }

private:
    double average_at(int i, PathRef c) const;
    BivariateFn h2_;
    std::shared_ptr<const DetKernel> a_;
};

// Adapted functional of the noise path with optional smooth data; used for the
// contemporaneous damage coefficient g_t(w^t).
class WFunctional {
public:
    virtual ~WFunctional() = default;
    virtual std::string name() const = 0;
    virtual double eval(int i, PathRef w) const = 0;
    virtual bool has_dupire() const { return false; }
    virtual double vertical1(int i, PathRef w) const;
    virtual double vertical2(int i, PathRef w) const;
    virtual double horizontal(int i, PathRef w) const;
};

class ZeroW final : public WFunctional {
public:
    std::string name() const override { return "zero"; }
    double eval(int, PathRef) const override { return 0.0; }
    bool has_dupire() const override { return true; }
    double vertical1(int, PathRef) const override { return 0.0; }
    double vertical2(int, PathRef) const override { return 0.0; }
    double horizontal(int, PathRef) const override { return 0.0; }
};

// g_t(w^t) = w_t
class CurrentNoiseW final : public WFunctional {
public:
    std::string name() const override { return "wt"; }
    double eval(int i, PathRef w) const override { return w[i]; }
    bool has_dupire() const override { return true; }
    double vertical1(int, PathRef) const override { return 1.0; }
    double vertical2(int, PathRef) const override { return 0.0; }
    double horizontal(int, PathRef) const override { return 0.0; }
};

std::unique_ptr<WFunctional> make_w_functional(const std::string& name);

// h_t(c) = g_t(w^t) c_t + int_0^t k_{s,t}(w^t) c_s ds, linear in the policy.
class ClimateFunctional final : public HysteresisFunctional {
public:
    ClimateFunctional(std::shared_ptr<const WFunctional> g, std::shared_ptr<const WKernel> k)
        : g_(std::move(g)), k_(std::move(k)) {}
    std::string name() const override { return "climate(" + g_->name() + "," + k_->name() + ")"; }
    bool linear_in_policy() const override { return true; }

    double eval(int i, PathRef c, PathRef w) const override;
    double atom(int i, PathRef, PathRef w) const override { return g_->eval(i, w); }
    double density(int s, int i, PathRef, PathRef w) const override {
        return k_->eval(s, i, w);
    }
    bool has_density_dt() const override { return true; }
    double density_dt(int t, int s, PathRef, PathRef w) const override {
        return k_->dt(t, s, w);
    }
    bool has_density_malliavin_w() const override { return true; }
    double density_malliavin_w(int t, int s, PathRef w) const override {
        return k_->malliavin(t, s, w);
    }
    void future_density_sums(PathRef c, PathRef w, std::span<double> out) const override;
    void future_density_dt_sums(PathRef c, PathRef w, std::span<double> out) const override;
    void future_density_malliavin_sums(PathRef w, std::span<double> out) const override;
    bool has_recursive_tail() const override;
    void tail_increment(PathRef c, PathRef w, std::span<double> q_out) const override;
    void tail_gamma(const TimeGrid& grid, std::span<double> out) const override;

    const WFunctional& g() const { return *g_; }
    const WKernel& k() const { return *k_; }

private:
    std::shared_ptr<const WFunctional> g_;
    std::shared_ptr<const WKernel> k_;
};

// h_t(c) = int_0^t f(s - theta_t) c_s ds, theta_t = first argmax node of w on [0,t].
// f vanishes on (-inf, 0], so only policy after the running record is weighted.
class TippingFunctional final : public HysteresisFunctional {
public:
    explicit TippingFunctional(SmoothFn f) : f_(std::move(f)) {}
    std::string name() const override { return "tipping(" + f_.name + ")"; }
    bool linear_in_policy() const override { return true; }

    double eval(int i, PathRef c, PathRef w) const override;
    double atom(int, PathRef, PathRef) const override { return 0.0; }
    double density(int s, int i, PathRef, PathRef w) const override;
    void future_density_sums(PathRef c, PathRef w, std::span<double> out) const override;
    double future_density_sum_at(int t, PathRef c, PathRef w) const override;

    const SmoothFn& f() const { return f_; }

private:
    SmoothFn f_;
};

// h_t(c) = c_{t/2} (nearest node, ties down). Not class A: its derivative is an
// interior atom, so only the discrete dual weight is exposed.
class MidpointFunctional final : public HysteresisFunctional {
public:
    std::string name() const override { return "midpoint"; }
    bool class_a() const override { return false; }
    double eval(int i, PathRef c, PathRef) const override { return c[i / 2]; }
    double atom(int, PathRef, PathRef) const override;
    double density(int, int, PathRef, PathRef) const override;
    double foc_dual_weight(int j, const TimeGrid& grid) const override;
};

class ZeroFunctional final : public HysteresisFunctional {
public:
    std::string name() const override { return "zero"; }
    bool linear_in_policy() const override { return true; }
    double eval(int, PathRef, PathRef) const override { return 0.0; }
    double atom(int, PathRef, PathRef) const override { return 0.0; }
    double density(int, int, PathRef, PathRef) const override { return 0.0; }
    bool has_atom_dupire() const override { return true; }
    double atom_vertical2(int, PathRef, PathRef) const override { return 0.0; }
    double atom_vertical3(int, PathRef, PathRef) const override { return 0.0; }
    double atom_horizontal(int, PathRef, PathRef) const override { return 0.0; }
    bool has_density_dt() const override { return true; }
    double density_dt(int, int, PathRef, PathRef) const override { return 0.0; }
    bool has_density_malliavin_w() const override { return true; }
    double density_malliavin_w(int, int, PathRef) const override { return 0.0; }
};

// Exponential pre-smoother: R_tau = c_tau on the prefix [0, t_i], then
// R_j = R_{j+1} + dt * n * (c_{j+1} - R_{j+1}) going backward. Wraps g so that
// g(R^(n) c) is class A even when g's Frechet derivative is a general measure.
class SmoothedFunctional final : public HysteresisFunctional {
public:
    SmoothedFunctional(std::shared_ptr<const HysteresisFunctional> g, double n)
        : g_(std::move(g)), n_(n) {}
    std::string name() const override { return "smoothed(" + g_->name() + ")"; }
    double eval(int i, PathRef c, PathRef w) const override;
    double rate() const { return n_; }

private:
    std::shared_ptr<const HysteresisFunctional> g_;
    double n_;
};

std::unique_ptr<HysteresisFunctional> smooth_approximation(
    std::shared_ptr<const HysteresisFunctional> g, double n);

// --- catalog -------------------------------------------------------------

// Builds a catalog functional from a name and a flat parameter map, the same
// addressing the CLI config uses.
std::unique_ptr<HysteresisFunctional> make_functional(
    const std::string& name, const std::map<std::string, std::string>& params);

struct CatalogEntry {
    std::string name;
    bool analytic_derivatives;
    bool closed_form_oracle;
};
std::vector<CatalogEntry> functional_catalog();

// --- Frechet consistency check -------------------------------------------

struct FrechetReport {
    std::vector<double> eps;
    std::vector<double> residual;
    double observed_order = 0.0; // log-log slope over the ladder
    bool linear = false;         // all residuals at round-off
};

FrechetReport frechet_check(const HysteresisFunctional& h, const SamplePath& c,
                            const SamplePath& z, std::span<const double> eps_ladder,
                            int node, PathRef w);

// Running max of w over nodes 0..i and the first node attaining it.
void scan_running_max(PathRef w, std::span<double> max_out, std::span<int> argmax_out);
int running_argmax(PathRef w, int i);

} // namespace hyst
